//! Determinantal eigenvalue ensembles and Gaussian random-polynomial
//! zeros (n = 1), with radial-CDF comparisons against B_k and the
//! log-kernel Laplacian.

use crate::bergman::BergmanModel;
use crate::error::{Error, Result};
use crate::lapack;
use crate::point::Point;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleKind {
    DppEigenvalues,
    PolynomialZeros,
}

#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub points: Vec<Complex64>,
    pub seed: u64,
    pub kind: SampleKind,
    pub k: u32,
    /// Degenerate coefficient draws that were repeated (zeros only).
    pub redraws: u32,
    /// Far-field roots discarded (zeros only).
    pub discarded: u32,
}

fn standard_complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    // E |c|^2 = 1
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    Complex64::from_polar((-u1.ln()).sqrt(), 2.0 * PI * u2)
}

/// Exact sample of the projection determinantal process with kernel
/// K_k(z,w) e^{-k phi(z)/2 - k phi(w)/2}, by the sequential conditional
/// algorithm: the next point is drawn from the residual intensity after
/// projecting out the directions of the points already selected. Always
/// returns dim H_k points.
pub fn sample_dpp(m: &BergmanModel, seed: u64) -> Result<SampleBatch> {
    assert_eq!(m.basis().n, 1, "dpp sampling is n = 1 only");
    let d = m.dim();
    let radius = m.rule().truncation_radius;
    let area = PI * radius * radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // rejection envelope: sup B_k over the truncated disc, with headroom
    let mut bmax = 0.0f64;
    for i in 0..4096 {
        let r = radius * ((i as f64 + 0.5) / 4096.0).sqrt();
        let th = 2.0 * PI * ((i as f64 * 0.618_033_988_749_894_9) % 1.0);
        let b = m.bergman_function(&Point::one(Complex64::from_polar(r, th)));
        bmax = bmax.max(b);
    }
    bmax *= 1.15;

    let mut selected: Vec<DVector<Complex64>> = Vec::with_capacity(d);
    let mut points = Vec::with_capacity(d);
    let mut proposals = 0u64;
    let max_proposals = 200_000u64 * d as u64;
    for _ in 0..d {
        loop {
            proposals += 1;
            if proposals > max_proposals {
                return Err(Error::RejectionStalled {
                    rate: points.len() as f64 / proposals as f64,
                });
            }
            let r = radius * rng.gen::<f64>().sqrt();
            let th = 2.0 * PI * rng.gen::<f64>();
            let z = Complex64::from_polar(r, th);
            let f = m.weighted_frame(&Point::one(z));
            let mut resid: f64 = f.iter().map(|c| c.norm_sqr()).sum();
            for e in &selected {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..d {
                    dot += e[i].conj() * f[i];
                }
                resid -= dot.norm_sqr();
            }
            if rng.gen::<f64>() * bmax <= resid {
                // orthonormalize the accepted direction against the span
                let mut g = f;
                for e in &selected {
                    let mut dot = Complex64::new(0.0, 0.0);
                    for i in 0..d {
                        dot += e[i].conj() * g[i];
                    }
                    g -= e * dot;
                }
                let norm = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    selected.push(g / Complex64::new(norm, 0.0));
                }
                points.push(z);
                break;
            }
        }
    }
    let _ = area;
    Ok(SampleBatch {
        points,
        seed,
        kind: SampleKind::DppEigenvalues,
        k: m.k(),
        redraws: 0,
        discarded: 0,
    })
}

/// Zeros of f = sum c_i psi_i with i.i.d. standard complex Gaussian c,
/// extracted as eigenvalues of the balanced companion matrix of the
/// monomial coefficient vector.
pub fn sample_zeros(m: &BergmanModel, seed: u64) -> Result<SampleBatch> {
    assert_eq!(m.basis().n, 1, "zero sampling is n = 1 only");
    let d = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut redraws = 0u32;
    let coeffs = loop {
        let c: Vec<Complex64> = (0..d).map(|_| standard_complex_gaussian(&mut rng)).collect();
        let a = m.monomial_coefficients(&c);
        let max_abs = a.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
        if a[d - 1].norm() > 1e-14 * max_abs {
            break a;
        }
        redraws += 1;
        if redraws > 64 {
            return Err(Error::Config("degenerate coefficient draws persist".into()));
        }
    };

    // companion matrix of the monic polynomial, column-major
    let deg = d - 1;
    let mut points = Vec::new();
    let mut discarded = 0u32;
    if deg > 0 {
        let top = coeffs[deg];
        let mut comp = vec![Complex64::new(0.0, 0.0); deg * deg];
        for i in 1..deg {
            comp[(i - 1) * deg + i] = Complex64::new(1.0, 0.0); // subdiagonal
        }
        for i in 0..deg {
            comp[(deg - 1) * deg + i] = -coeffs[i] / top; // last column
        }
        let roots = lapack::complex_eigenvalues(&mut comp, deg).map_err(Error::EigFailure)?;
        let cutoff = 10.0 * m.rule().truncation_radius;
        for r in roots {
            if r.is_finite() && r.norm() <= cutoff {
                points.push(r);
            } else {
                discarded += 1;
            }
        }
    }
    Ok(SampleBatch {
        points,
        seed,
        kind: SampleKind::PolynomialZeros,
        k: m.k(),
        redraws,
        discarded,
    })
}

/// Per-batch seeds derived from a base seed; batch i is reproducible in
/// isolation.
pub fn batch_seed(base: u64, index: u64) -> u64 {
    // splitmix64 step keyed by (base, index)
    let mut x = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Radial CDF r -> F(r) tabulated on a uniform grid in t = r^2.
#[derive(Clone, Debug)]
pub struct RadialCdf {
    t_values: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialCdf {
    pub fn eval(&self, r: f64) -> f64 {
        let t = r * r;
        let ts = &self.t_values;
        let n = ts.len();
        if t <= ts[0] {
            return 0.0;
        }
        if t >= ts[n - 1] {
            return 1.0;
        }
        let i = ts.partition_point(|&x| x < t).max(1);
        let frac = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
        self.cdf[i - 1] * (1.0 - frac) + self.cdf[i] * frac
    }

    /// CDF of B_k / dim for a radial model, by trapezoid in t.
    pub fn from_bergman(m: &BergmanModel, resolution: usize) -> RadialCdf {
        let t_max = m.rule().truncation_radius.powi(2);
        let t_values: Vec<f64> = (0..resolution)
            .map(|i| t_max * i as f64 / (resolution - 1) as f64)
            .collect();
        let b: Vec<f64> = t_values
            .iter()
            .map(|&t| m.bergman_function(&Point::real(t.sqrt())))
            .collect();
        let mut cdf = vec![0.0; resolution];
        for i in 1..resolution {
            cdf[i] = cdf[i - 1] + 0.5 * (b[i] + b[i - 1]) * (t_values[i] - t_values[i - 1]);
        }
        let total = cdf[resolution - 1];
        for c in cdf.iter_mut() {
            *c /= total;
        }
        RadialCdf { t_values, cdf }
    }

    /// CDF of the radialized Laplacian of k^{-1} ln K_k: for radial
    /// subharmonic potentials the mass inside |z| <= r equals the slope
    /// du/dv at v = ln r^2, normalized by the slope at the outer edge.
    pub fn from_potential_laplacian(m: &BergmanModel, resolution: usize) -> RadialCdf {
        let t_max = m.rule().truncation_radius.powi(2);
        let v_lo = (t_max * 1e-6).ln();
        let v_hi = t_max.ln();
        let vs: Vec<f64> = (0..resolution)
            .map(|i| v_lo + (v_hi - v_lo) * i as f64 / (resolution - 1) as f64)
            .collect();
        let u: Vec<f64> = vs
            .iter()
            .map(|&v| m.log_kernel_potential(&Point::real((v / 2.0).exp())))
            .collect();
        let mut slope = vec![0.0; resolution];
        for i in 1..resolution - 1 {
            slope[i] = (u[i + 1] - u[i - 1]) / (vs[i + 1] - vs[i - 1]);
        }
        slope[0] = slope[1];
        slope[resolution - 1] = slope[resolution - 2];
        let total = slope[resolution - 1];
        let t_values: Vec<f64> = vs.iter().map(|&v| v.exp()).collect();
        let cdf: Vec<f64> = slope.iter().map(|&s| (s / total).clamp(0.0, 1.0)).collect();
        RadialCdf { t_values, cdf }
    }
}

/// Sup over radial bin edges of |empirical CDF - reference CDF|.
pub fn empirical_discrepancy(
    batches: &[SampleBatch],
    reference: &RadialCdf,
    bins: usize,
    r_max: f64,
) -> Result<f64> {
    let mut radii: Vec<f64> = batches
        .iter()
        .flat_map(|b| b.points.iter().map(|z| z.norm()))
        .collect();
    if radii.len() < 1000 {
        return Err(Error::Config(format!(
            "need at least 1000 points, got {}",
            radii.len()
        )));
    }
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = radii.len() as f64;
    let mut sup = 0.0f64;
    for i in 1..=bins {
        let r = r_max * i as f64 / bins as f64;
        let emp = radii.partition_point(|&x| x <= r) as f64 / total;
        sup = sup.max((emp - reference.eval(r)).abs());
    }
    Ok(sup)
}
