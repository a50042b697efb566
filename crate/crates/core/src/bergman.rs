//! The weighted polynomial Hilbert space, its Bergman kernel K_k,
//! Bergman function B_k and log-kernel potential.

use crate::error::{Error, Result};
use crate::point::Point;
use crate::quadrature::{self, QuadRule};
use crate::weights::Weight;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Exponent set of the monomial basis: total-degree or polytope-lattice.
#[derive(Clone, Debug)]
pub struct Basis {
    pub exponents: Vec<[i64; 2]>,
    pub n: usize,
    pub k: u32,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Largest per-axis exponent (at least 0).
    pub fn max_exponent(&self, axis: usize) -> i64 {
        self.exponents.iter().map(|a| a[axis]).max().unwrap_or(0).max(0)
    }

    pub fn min_exponent(&self, axis: usize) -> i64 {
        self.exponents.iter().map(|a| a[axis]).min().unwrap_or(0).min(0)
    }

    pub fn max_total_degree(&self) -> i64 {
        self.exponents
            .iter()
            .map(|a| a[..self.n].iter().map(|&e| e.max(0)).sum::<i64>())
            .max()
            .unwrap_or(0)
    }
}

/// All multi-indices of total degree less than k, lexicographic order;
/// count = C(n + k - 1, n).
pub fn monomial_basis(n: usize, k: u32) -> Basis {
    assert!(n == 1 || n == 2);
    assert!(k >= 1);
    let mut exponents = Vec::new();
    let kk = k as i64;
    if n == 1 {
        for a in 0..kk {
            exponents.push([a, 0]);
        }
    } else {
        for a in 0..kk {
            for b in 0..(kk - a) {
                exponents.push([a, b]);
            }
        }
    }
    Basis { exponents, n, k }
}

fn logsumexp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = terms.iter().map(|&t| (t - m).exp()).sum();
    m + s.ln()
}

/// An orthonormalized model of the weighted polynomial space at degree
/// bound k. Immutable after build; safe to share across threads.
pub struct BergmanModel {
    weight: Weight,
    k: u32,
    basis: Basis,
    rule: QuadRule,
    /// ln of the per-monomial scaling bringing the Gram diagonal to 1.
    log_scale: Vec<f64>,
    /// Cholesky factor of the scaled Gram; identity on the diagonal fast
    /// path (torus-invariant weights make monomials orthogonal).
    chol_l: DMatrix<Complex64>,
    diagonal: bool,
    /// ln of the raw monomial norms ||z^a||^2_{k phi}.
    log_moments: Vec<f64>,
    condition_estimate: f64,
}

impl BergmanModel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn log_moments(&self) -> &[f64] {
        &self.log_moments
    }

    /// Lower-triangular Cholesky factor of the scaled Gram matrix.
    pub fn cholesky_factor(&self) -> &DMatrix<Complex64> {
        &self.chol_l
    }

    /// Orthonormalization as the upper-triangular transform T with
    /// psi_j = sum_a T_{a j} (scaled monomial)_a.
    pub fn transform_upper(&self) -> DMatrix<Complex64> {
        let inv = self
            .chol_l
            .clone()
            .try_inverse()
            .expect("triangular factor is invertible");
        inv.transpose() // (L^{-1})^T, upper triangular
    }

    /// Build the model: Gram matrix of pre-scaled monomials on the rule,
    /// inverse Cholesky transform, conditioning report. Torus-invariant
    /// weights take the diagonal fast path through per-axis radial moments.
    pub fn build(weight: &Weight, basis: Basis, rule: QuadRule) -> Result<BergmanModel> {
        assert_eq!(weight.n(), basis.n);
        assert_eq!(rule.n, basis.n);
        let d = basis.len();
        assert!(d > 0, "empty basis");
        let k = basis.k;

        let diagonal = weight.is_toric() || weight.is_radial();
        if diagonal {
            let log_moments = Self::radial_log_moments(weight, &basis, &rule)?;
            let log_scale: Vec<f64> = log_moments.iter().map(|lm| -0.5 * lm).collect();
            return Ok(BergmanModel {
                weight: weight.clone(),
                k,
                basis,
                rule,
                log_scale,
                chol_l: DMatrix::identity(d, d),
                diagonal: true,
                log_moments,
                condition_estimate: 1.0,
            });
        }

        let required = 2 * basis.max_total_degree() as usize;
        if rule.degree_capacity < required {
            return Err(Error::RuleCapacity { capacity: rule.degree_capacity, required });
        }

        // raw diagonal in log form, for the unit prescaling
        let kf = k as f64;
        let node_count = rule.nodes.len();
        let kphi: Vec<f64> = rule.nodes.iter().map(|z| kf * weight.eval(z)).collect();
        let mut log_moments = vec![0.0; d];
        {
            let mut terms = vec![0.0f64; node_count];
            for (j, a) in basis.exponents.iter().enumerate() {
                for (i, (z, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                    let mut lg = w.ln() - kphi[i];
                    for (axis, zi) in z.coords().iter().enumerate() {
                        let e = a[axis];
                        if e != 0 {
                            lg += e as f64 * zi.norm_sqr().ln();
                        }
                    }
                    terms[i] = lg;
                }
                log_moments[j] = logsumexp(&terms);
            }
        }
        let log_scale: Vec<f64> = log_moments.iter().map(|lm| -0.5 * lm).collect();

        // scaled Gram, accumulated over nodes
        let mut gram = DMatrix::<Complex64>::zeros(d, d);
        let mut u = vec![Complex64::new(0.0, 0.0); d];
        for (i0, (z, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let halfphi = 0.5 * kphi[i0];
            for (j, a) in basis.exponents.iter().enumerate() {
                let mut lg = Complex64::new(log_scale[j] - halfphi, 0.0);
                let mut zero = false;
                for (axis, zi) in z.coords().iter().enumerate() {
                    let e = a[axis];
                    if e != 0 {
                        if zi.norm_sqr() == 0.0 {
                            zero = true;
                            break;
                        }
                        lg += e as f64 * zi.ln();
                    }
                }
                u[j] = if zero { Complex64::new(0.0, 0.0) } else { lg.exp() };
            }
            for i in 0..d {
                let wi = u[i] * w;
                for j in i..d {
                    gram[(i, j)] += wi * u[j].conj();
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                gram[(i, j)] = gram[(j, i)].conj();
            }
        }

        let eigs = gram.clone().symmetric_eigen().eigenvalues;
        let max_e = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_e = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let cond = if min_e > 0.0 { max_e / min_e } else { f64::INFINITY };
        if !(min_e > 0.0) || cond > 1e12 {
            return Err(Error::GramNotPositiveDefinite { cond });
        }
        let chol = gram
            .cholesky()
            .ok_or(Error::GramNotPositiveDefinite { cond })?;

        Ok(BergmanModel {
            weight: weight.clone(),
            k,
            basis,
            rule,
            log_scale,
            chol_l: chol.l(),
            diagonal: false,
            log_moments,
            condition_estimate: cond,
        })
    }

    /// Raw log-moments ln ||z^a||^2 via the per-axis radial rules,
    /// valid for torus-invariant weights.
    fn radial_log_moments(weight: &Weight, basis: &Basis, rule: &QuadRule) -> Result<Vec<f64>> {
        let kf = basis.k as f64;
        let n = basis.n;
        let axes = &rule.radial_axes;
        assert_eq!(axes.len(), n);
        let phi_of = |vs: &[f64]| -> f64 {
            if let Some(p) = weight.toric_profile(vs) {
                p
            } else if n == 1 {
                weight.radial_profile(vs[0]).expect("radial profile")
            } else {
                unreachable!()
            }
        };
        let mut out = Vec::with_capacity(basis.len());
        if n == 1 {
            let axis = &axes[0];
            let phis: Vec<f64> = axis.iter().map(|&(t, _)| phi_of(&[t.ln()])).collect();
            let mut terms = vec![0.0f64; axis.len()];
            for a in &basis.exponents {
                for (i, (&(t, w), &phi)) in axis.iter().zip(&phis).enumerate() {
                    terms[i] = w.ln() + a[0] as f64 * t.ln() - kf * phi;
                }
                let lm = logsumexp(&terms);
                if !lm.is_finite() {
                    return Err(Error::NonFiniteValue { index: 0 });
                }
                out.push(lm);
            }
        } else {
            let (ax0, ax1) = (&axes[0], &axes[1]);
            let mut phis = vec![0.0f64; ax0.len() * ax1.len()];
            for (i, &(t0, _)) in ax0.iter().enumerate() {
                for (j, &(t1, _)) in ax1.iter().enumerate() {
                    phis[i * ax1.len() + j] = phi_of(&[t0.ln(), t1.ln()]);
                }
            }
            let mut terms = vec![0.0f64; ax0.len() * ax1.len()];
            for a in &basis.exponents {
                for (i, &(t0, w0)) in ax0.iter().enumerate() {
                    for (j, &(t1, w1)) in ax1.iter().enumerate() {
                        terms[i * ax1.len() + j] = w0.ln()
                            + w1.ln()
                            + a[0] as f64 * t0.ln()
                            + a[1] as f64 * t1.ln()
                            - kf * phis[i * ax1.len() + j];
                    }
                }
                let lm = logsumexp(&terms);
                if !lm.is_finite() {
                    return Err(Error::NonFiniteValue { index: 0 });
                }
                out.push(lm);
            }
        }
        Ok(out)
    }

    /// Scaled monomial vector M_a(z) = s_a z^a.
    fn scaled_monomials(&self, z: &Point) -> DVector<Complex64> {
        let d = self.dim();
        let mut m = DVector::zeros(d);
        for (j, a) in self.basis.exponents.iter().enumerate() {
            let mut lg = Complex64::new(self.log_scale[j], 0.0);
            // at a zero coordinate: z^e is 0 for e > 0 and a pole for e < 0
            let mut special: Option<Complex64> = None;
            for (axis, zi) in z.coords().iter().enumerate() {
                let e = a[axis];
                if e != 0 {
                    if zi.norm_sqr() == 0.0 {
                        special = Some(if e > 0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(f64::INFINITY, 0.0)
                        });
                        break;
                    }
                    lg += e as f64 * zi.ln();
                }
            }
            m[j] = special.unwrap_or_else(|| lg.exp());
        }
        m
    }

    /// Orthonormal basis functions psi_i(z).
    pub fn psi(&self, z: &Point) -> DVector<Complex64> {
        let m = self.scaled_monomials(z);
        if self.diagonal {
            m
        } else {
            self.chol_l
                .solve_lower_triangular(&m)
                .expect("triangular solve")
        }
    }

    /// psi_i(z) e^{-k phi(z)/2}; bounded vectors suitable for kernels at
    /// large k.
    pub fn weighted_frame(&self, z: &Point) -> DVector<Complex64> {
        let damp = (-0.5 * self.k as f64 * self.weight.eval(z)).exp();
        self.psi(z) * Complex64::new(damp, 0.0)
    }

    /// K_k(z, w) = sum_i psi_i(z) conj(psi_i(w)).
    pub fn kernel(&self, z: &Point, w: &Point) -> Complex64 {
        let pz = self.psi(z);
        let pw = self.psi(w);
        pz.iter().zip(pw.iter()).map(|(a, b)| a * b.conj()).sum()
    }

    /// K_k(z, w) e^{-k phi(z)/2 - k phi(w)/2}.
    pub fn weighted_kernel(&self, z: &Point, w: &Point) -> Complex64 {
        let fz = self.weighted_frame(z);
        let fw = self.weighted_frame(w);
        fz.iter().zip(fw.iter()).map(|(a, b)| a * b.conj()).sum()
    }

    /// B_k(z) = K_k(z, z) e^{-k phi(z)}.
    pub fn bergman_function(&self, z: &Point) -> f64 {
        if self.diagonal {
            (self.log_kernel_diag(z) - self.k as f64 * self.weight.eval(z)).exp()
        } else {
            self.weighted_frame(z).iter().map(|c| c.norm_sqr()).sum()
        }
    }

    /// ln K_k(z, z), overflow-safe on the diagonal fast path.
    pub fn log_kernel_diag(&self, z: &Point) -> f64 {
        if self.diagonal {
            let terms: Vec<f64> = self
                .basis
                .exponents
                .iter()
                .zip(&self.log_moments)
                .map(|(a, lm)| {
                    let mut lg = -lm;
                    for (axis, zi) in z.coords().iter().enumerate() {
                        let e = a[axis];
                        if e != 0 {
                            lg += e as f64 * zi.norm_sqr().ln();
                        }
                    }
                    lg
                })
                .collect();
            logsumexp(&terms)
        } else {
            self.psi(z).iter().map(|c| c.norm_sqr()).sum::<f64>().ln()
        }
    }

    /// k^{-1} ln K_k(z, z).
    pub fn log_kernel_potential(&self, z: &Point) -> f64 {
        self.log_kernel_diag(z) / self.k as f64
    }

    /// |int B_k dlambda - dim| / dim on the model's own rule.
    pub fn dimension_residual(&self) -> Result<f64> {
        let d = self.dim() as f64;
        let total = self.integrate_bergman(|_z, _t| true)?;
        Ok((total - d).abs() / d)
    }

    /// Integral of B_k over the set selected by `keep` (given the point and
    /// its per-axis t = |z_i|^2 values), on the model's rule.
    pub fn integrate_bergman<F: Fn(&Point, &[f64]) -> bool>(&self, keep: F) -> Result<f64> {
        if self.diagonal {
            // torus-invariant: integrate over the radial axes only
            let axes = &self.rule.radial_axes;
            if self.basis.n == 1 {
                let vals: Vec<f64> = axes[0]
                    .iter()
                    .map(|&(t, w)| {
                        let z = Point::real(t.sqrt());
                        if keep(&z, &[t]) {
                            w * self.bergman_function(&z)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Ok(quadrature::compensated_sum(&vals))
            } else {
                let mut vals = Vec::with_capacity(axes[0].len() * axes[1].len());
                for &(t0, w0) in &axes[0] {
                    for &(t1, w1) in &axes[1] {
                        let z = Point::two(
                            Complex64::new(t0.sqrt(), 0.0),
                            Complex64::new(t1.sqrt(), 0.0),
                        );
                        vals.push(if keep(&z, &[t0, t1]) {
                            w0 * w1 * self.bergman_function(&z)
                        } else {
                            0.0
                        });
                    }
                }
                Ok(quadrature::compensated_sum(&vals))
            }
        } else {
            let vals: Vec<f64> = self
                .rule
                .nodes
                .iter()
                .zip(&self.rule.weights)
                .map(|(z, w)| {
                    let ts: Vec<f64> = z.coords().iter().map(|c| c.norm_sqr()).collect();
                    if keep(z, &ts) {
                        w * self.bergman_function(z)
                    } else {
                        0.0
                    }
                })
                .collect();
            Ok(quadrature::compensated_sum(&vals))
        }
    }

    /// |f(z)|^2 e^{-k phi(z)} / ||f||^2 for f = sum c_i psi_i; always at
    /// most B_k(z) by Cauchy-Schwarz.
    pub fn extremal_ratio(&self, coeffs: &[Complex64], z: &Point) -> Result<f64> {
        let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::ZeroVector);
        }
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: coeffs.len() });
        }
        let frame = self.weighted_frame(z);
        let val: Complex64 = coeffs
            .iter()
            .zip(frame.iter())
            .map(|(c, f)| c * f)
            .sum();
        Ok(val.norm_sqr() / norm2)
    }

    /// Monomial coefficients of f = sum c_i psi_i (coefficient of z^a for
    /// each basis exponent a, including the scaling).
    pub fn monomial_coefficients(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.dim());
        let d = self.dim();
        if self.diagonal {
            (0..d)
                .map(|j| coeffs[j] * Complex64::new(self.log_scale[j].exp(), 0.0))
                .collect()
        } else {
            // f = c^T L^{-1} M  =>  row vector a = c^T L^{-1}, i.e. solve
            // L^T x = c
            let c = DVector::from_column_slice(coeffs);
            let lt = self.chol_l.transpose();
            let x = lt.solve_upper_triangular(&c).expect("triangular solve");
            (0..d)
                .map(|j| x[j] * Complex64::new(self.log_scale[j].exp(), 0.0))
                .collect()
        }
    }
}

/// Rule sized for Gram assembly of the given basis: truncation radii from
/// the weight's tail bound and node counts covering degree 2 x max degree
/// plus the e^{-k phi} scale.
pub fn default_rule(w: &Weight, basis: &Basis, tol: f64) -> Result<QuadRule> {
    let k = basis.k;
    if w.n() == 1 {
        let (r_in, r_out) =
            quadrature::truncation_interval(w, k, basis.min_exponent(0), basis.max_exponent(0), tol)?;
        let d = basis.max_exponent(0) - basis.min_exponent(0);
        let span = r_out * r_out - r_in * r_in;
        let n_radial = (32usize)
            .max(d as usize + 2)
            .max((k as f64 * span / 2.5).ceil() as usize);
        let n_angular = (48usize).max(2 * d as usize + 16);
        quadrature::annular_rule(r_in, r_out, n_radial, n_angular)
    } else {
        let mut axes = Vec::new();
        for axis in 0..2 {
            let (r_in, r_out) =
                quadrature::truncation_interval(w, k, basis.min_exponent(axis), basis.max_exponent(axis), tol)?;
            let d = basis.max_exponent(axis) - basis.min_exponent(axis);
            let span = r_out * r_out - r_in * r_in;
            let diag = w.is_toric();
            // the generic path pays nodes^2; keep tensor factors lean there
            let n_radial = if diag {
                (32usize).max(d as usize + 2).max((k as f64 * span / 2.5).ceil() as usize)
            } else {
                (24usize).max(d as usize + 2).max((k as f64 * span / 2.0).ceil() as usize)
            };
            let n_angular = (16usize).max(2 * d as usize + 16);
            axes.push(quadrature::annular_rule(r_in, r_out, n_radial, n_angular)?);
        }
        Ok(quadrature::product_rule(&axes[0], &axes[1]))
    }
}

/// Total-degree model with an automatically sized rule.
pub fn default_model(w: &Weight, k: u32) -> Result<BergmanModel> {
    let basis = monomial_basis(w.n(), k);
    let rule = default_rule(w, &basis, 1e-16)?;
    BergmanModel::build(w, basis, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn zp(re: f64, im: f64) -> Point {
        Point::one(Complex64::new(re, im))
    }

    #[test]
    fn basis_counts() {
        assert_eq!(monomial_basis(1, 3).exponents, vec![[0, 0], [1, 0], [2, 0]]);
        assert_eq!(monomial_basis(2, 3).len(), 6);
        assert_eq!(monomial_basis(2, 1).exponents, vec![[0, 0]]);
    }

    #[test]
    fn gaussian_k1_kernel_is_k_over_pi() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let m = default_model(&w, 1).unwrap();
        let v = m.kernel(&zp(0.3, -0.4), &zp(-1.0, 0.2));
        assert!((v.re - 1.0 / PI).abs() < 1e-12 && v.im.abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments_closed_form() {
        // ||z^j||^2 = pi j! / k^{j+1}
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let k = 8u32;
        let m = default_model(&w, k).unwrap();
        assert!(m.is_diagonal());
        let mut lfact = 0.0;
        for (j, lm) in m.log_moments().iter().enumerate() {
            if j > 0 {
                lfact += (j as f64).ln();
            }
            let exact = PI.ln() + lfact - (j as f64 + 1.0) * (k as f64).ln();
            assert!((lm - exact).abs() < 1e-10, "j = {j}: {lm} vs {exact}");
        }
    }

    #[test]
    fn bergman_at_zero_is_k_over_pi() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        for k in [8u32, 16, 32, 64] {
            let m = default_model(&w, k).unwrap();
            let b = m.bergman_function(&zp(0.0, 0.0));
            assert!((b - k as f64 / PI).abs() < 1e-8 * k as f64, "k = {k}: {b}");
        }
    }

    #[test]
    fn bergman_partial_sum_oracle() {
        // B_k(z) = (k/pi) e^{-k t} sum_{j<k} (k t)^j / j!
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let k = 32u32;
        let m = default_model(&w, k).unwrap();
        for t in [0.3, 1.0, 2.5] {
            let kt = k as f64 * t;
            let mut term = 1.0;
            let mut sum = 1.0;
            for j in 1..k as u64 {
                term *= kt / j as f64;
                sum += term;
            }
            let oracle = k as f64 / PI * (-kt).exp() * sum;
            let b = m.bergman_function(&zp(t.sqrt(), 0.0));
            assert!(
                (b - oracle).abs() < 1e-8 * oracle.max(1e-12),
                "t = {t}: {b} vs {oracle}"
            );
        }
        // decay outside the disc
        let b = m.bergman_function(&zp(2.0, 0.0));
        assert!(b / k as f64 <= 1e-6);
    }

    #[test]
    fn poisson_median_at_boundary() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let m = default_model(&w, 128).unwrap();
        let b = m.bergman_function(&zp(1.0, 0.0)) / 128.0;
        // P(Pois(k) <= k-1) -> 1/2
        assert!((b - 0.5 / PI).abs() < 0.02 / PI, "{b}");
    }

    #[test]
    fn log_kernel_potential_constant_for_k1() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let m = default_model(&w, 1).unwrap();
        let v = m.log_kernel_potential(&zp(1.3, 0.7));
        assert!((v - (1.0 / PI).ln()).abs() < 1e-10);
    }

    #[test]
    fn log_kernel_matches_envelope_at_rate() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let k = 64u32;
        let m = default_model(&w, k).unwrap();
        let rate = 2.0 * (k as f64).ln() / k as f64;
        let v = m.log_kernel_potential(&zp(0.5, 0.0));
        assert!((v - 0.25).abs() <= rate, "{v}");
        let v = m.log_kernel_potential(&zp(2.0, 0.0));
        assert!((v - (4.0f64.ln() + 1.0)).abs() <= rate, "{v}");
    }

    #[test]
    fn dimension_residual_small() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let m = default_model(&w, 16).unwrap();
        assert!(m.dimension_residual().unwrap() <= 1e-8);
    }

    #[test]
    fn kernel_diag_nonnegative_and_hermitian() {
        let w = Weight::make_builtin("perturbed-gaussian", &[0.2, 3.0]).unwrap();
        let m = default_model(&w, 6).unwrap();
        let pts: Vec<Point> = (0..20)
            .map(|i| {
                let th = i as f64 * 0.7;
                zp(1.3 * th.cos() * (0.1 * i as f64).sin().abs(), 0.9 * th.sin())
            })
            .collect();
        for z in &pts {
            assert!(m.kernel(z, z).re >= 0.0);
            assert!(m.kernel(z, z).im.abs() < 1e-10 * m.kernel(z, z).re.max(1e-300));
        }
        for z in &pts[..5] {
            for u in &pts[5..10] {
                let a = m.kernel(z, u);
                let b = m.kernel(u, z);
                assert!((a - b.conj()).norm() <= 1e-10 * a.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn kernel_matrix_psd() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let m = default_model(&w, 12).unwrap();
        let pts: Vec<Point> = (0..15)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / 15.0;
                zp(0.1 + 0.09 * i as f64 * th.cos(), 0.08 * i as f64 * th.sin())
            })
            .collect();
        let mut km = DMatrix::<Complex64>::zeros(15, 15);
        for i in 0..15 {
            for j in 0..15 {
                km[(i, j)] = m.weighted_kernel(&pts[i], &pts[j]);
            }
        }
        let eigs = km.symmetric_eigen().eigenvalues;
        let trace: f64 = eigs.iter().sum();
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8 * trace.abs(), "min eig {min}, trace {trace}");
    }

    #[test]
    fn reproducing_property_on_rule() {
        let w = Weight::make_builtin("perturbed-gaussian", &[0.15, 3.0]).unwrap();
        let m = default_model(&w, 8).unwrap();
        let kf = m.k() as f64;
        // f = psi_2 + 0.5 i psi_5
        let mut c = vec![Complex64::new(0.0, 0.0); m.dim()];
        c[2] = Complex64::new(1.0, 0.0);
        c[5] = Complex64::new(0.0, 0.5);
        let f = |z: &Point| -> Complex64 {
            let p = m.psi(z);
            c.iter().zip(p.iter()).map(|(ci, pi)| ci * pi).sum()
        };
        for z in [zp(0.4, 0.1), zp(-0.5, 0.6), zp(0.9, -0.2)] {
            let lhs = quadrature::integrate(m.rule(), |u| {
                m.kernel(&z, u) * f(u) * Complex64::new((-kf * w.eval(u)).exp(), 0.0)
            })
            .unwrap();
            let rhs = f(&z);
            assert!((lhs - rhs).norm() <= 1e-6 * rhs.norm().max(1e-6), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn extremal_ratio_below_bergman() {
        let w = Weight::make_builtin("gaussian", &[]).unwrap();
        let m = default_model(&w, 10).unwrap();
        let d = m.dim();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let c: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let z = zp(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
            let r = m.extremal_ratio(&c, &z).unwrap();
            let b = m.bergman_function(&z);
            assert!(r <= b * (1.0 + 1e-9), "{r} vs {b}");
        }
        // equality for the reproducing direction
        let z = zp(0.37, -0.21);
        let frame = m.weighted_frame(&z);
        let c: Vec<Complex64> = frame.iter().map(|v| v.conj()).collect();
        let r = m.extremal_ratio(&c, &z).unwrap();
        let b = m.bergman_function(&z);
        assert!((r - b).abs() <= 1e-9 * b);
        assert!(matches!(
            m.extremal_ratio(&vec![Complex64::new(0.0, 0.0); d], &z),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn radial_weight_gives_diagonal_transform_and_symmetry() {
        let w = Weight::make_builtin("annulus", &[]).unwrap();
        let m = default_model(&w, 12).unwrap();
        assert!(m.is_diagonal());
        let b0 = m.bergman_function(&zp(1.1, 0.0));
        for j in 1..12 {
            let th = 2.0 * PI * j as f64 / 12.0;
            let b = m.bergman_function(&zp(1.1 * th.cos(), 1.1 * th.sin()));
            assert!((b - b0).abs() <= 1e-8 * b0);
        }
    }

    #[test]
    fn gauge_invariance_of_bergman_function() {
        use std::sync::Arc;
        // constant gauge phi -> phi - 2 Re(a)
        let base = Weight::make_builtin("perturbed-gaussian", &[0.2, 3.0]).unwrap();
        let a = 0.37;
        let shifted = {
            let b = base.clone();
            Weight::new(1, Arc::new(move |p: &Point| b.eval(p) - 2.0 * a))
                .with_growth(0.5, 3.0)
        };
        let k = 8u32;
        let basis = monomial_basis(1, k);
        let rule = default_rule(&base, &basis, 1e-16).unwrap();
        let m0 = BergmanModel::build(&base, basis.clone(), rule.clone()).unwrap();
        let m1 = BergmanModel::build(&shifted, basis, rule).unwrap();
        for z in [zp(0.5, 0.2), zp(-1.0, 0.8), zp(1.5, -0.3)] {
            let b0 = m0.bergman_function(&z);
            let b1 = m1.bergman_function(&z);
            assert!((b0 - b1).abs() <= 1e-6 * b0, "{b0} vs {b1}");
        }

        // coordinate translation for the gaussian: same B up to the shift
        let g = Weight::make_builtin("gaussian", &[]).unwrap();
        let mg = default_model(&g, 12).unwrap();
        let translated = {
            Weight::new(
                1,
                Arc::new(move |p: &Point| {
                    let z = p[0] - Complex64::new(0.4, 0.0);
                    z.norm_sqr()
                }),
            )
            .with_growth(0.4, 3.0)
        };
        let basis = monomial_basis(1, 12);
        let rule = quadrature::polar_rule(3.2, 128, 128).unwrap();
        let mt = BergmanModel::build(&translated, basis, rule).unwrap();
        for x in [0.0, 0.3, 0.9] {
            let b0 = mg.bergman_function(&zp(x, 0.0));
            let b1 = mt.bergman_function(&zp(x + 0.4, 0.0));
            assert!((b0 - b1).abs() <= 1e-6 * b0.max(1e-12), "{b0} vs {b1}");
        }
    }

    #[test]
    fn gram_conditioning_reported() {
        let w = Weight::make_builtin("perturbed-gaussian", &[0.1, 3.0]).unwrap();
        let m = default_model(&w, 10).unwrap();
        assert!(m.condition_estimate().is_finite());
        assert!(m.condition_estimate() >= 1.0);
    }

    #[test]
    fn orthonormality_on_refined_rule() {
        let w = Weight::make_builtin("perturbed-gaussian", &[0.2, 3.0]).unwrap();
        let basis = monomial_basis(1, 8);
        let rule = default_rule(&w, &basis, 1e-16).unwrap();
        let m = BergmanModel::build(&w, basis, rule).unwrap();
        // doubled rule
        let refined = quadrature::annular_rule(
            0.0,
            m.rule().truncation_radius,
            2 * m.rule().radial_axes[0].len(),
            96,
        )
        .unwrap();
        let kf = m.k() as f64;
        for i in 0..m.dim() {
            for j in i..m.dim() {
                let g = quadrature::integrate(&refined, |z| {
                    let p = m.psi(z);
                    p[i] * p[j].conj() * Complex64::new((-kf * w.eval(z)).exp(), 0.0)
                })
                .unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g - Complex64::new(expect, 0.0)).norm() < 1e-8,
                    "({i},{j}): {g}"
                );
            }
        }
    }
}
