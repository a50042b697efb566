//! Equilibrium potentials phi_e, coincidence sets and the convergence
//! checks tying B_k and k^{-1} ln K_k to the equilibrium data.

use crate::bergman::BergmanModel;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::quadrature::{self, QuadRule};
use crate::weights::{self, Weight};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeftMode {
    /// Weight finite as v -> -infinity (extends over the origin); only
    /// slopes >= 0 are admissible.
    ExtendsOverOrigin,
    /// Punctured domain; the slope interval is taken as given.
    Punctured,
}

/// Radial profile Phi(v) sampled on an increasing grid in v = ln |z|^2.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    pub v_values: Vec<f64>,
    pub phi_values: Vec<f64>,
    pub left_mode: LeftMode,
}

impl RadialGrid {
    pub fn new(v_values: Vec<f64>, phi_values: Vec<f64>, left_mode: LeftMode) -> Result<RadialGrid> {
        if v_values.len() != phi_values.len() || v_values.len() < 3 {
            return Err(Error::Config("radial grid needs matching lists, length >= 3".into()));
        }
        for w in v_values.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config("v grid must be strictly increasing".into()));
            }
        }
        if v_values.iter().chain(&phi_values).any(|x| !x.is_finite()) {
            return Err(Error::Config("non-finite radial grid entry".into()));
        }
        Ok(RadialGrid { v_values, phi_values, left_mode })
    }

    pub fn len(&self) -> usize {
        self.v_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_values.is_empty()
    }

    /// Uniform sampling of the weight's radial profile on [v_min, v_max].
    pub fn from_weight(w: &Weight, v_min: f64, v_max: f64, len: usize) -> Result<RadialGrid> {
        let profile = radial_profile_fn(w)?;
        let v_values: Vec<f64> = (0..len)
            .map(|i| v_min + (v_max - v_min) * i as f64 / (len - 1) as f64)
            .collect();
        let phi_values: Vec<f64> = v_values.iter().map(|&v| profile(v)).collect();
        RadialGrid::new(v_values, phi_values, LeftMode::ExtendsOverOrigin)
    }

    /// Default grid [-12, ln(growth_radius^2) + 4] with 4001 points.
    pub fn default_for(w: &Weight) -> Result<RadialGrid> {
        let v_growth = (w.growth_radius() * w.growth_radius()).ln();
        RadialGrid::from_weight(w, -12.0, v_growth + 4.0, 4001)
    }
}

fn radial_profile_fn(w: &Weight) -> Result<impl Fn(f64) -> f64 + '_> {
    if w.n() != 1 || !(w.is_radial() || w.is_toric()) {
        return Err(Error::NoEnvelopePath);
    }
    Ok(move |v: f64| {
        w.radial_profile(v)
            .or_else(|| w.toric_profile(&[v]))
            .expect("radial or toric profile")
    })
}

/// Slope-constrained convex envelope of a radial profile.
#[derive(Clone, Debug)]
pub struct EnvelopeResult {
    pub phi_e_values: Vec<f64>,
    /// Left derivatives of Phi_e.
    pub slopes: Vec<f64>,
    pub contact_mask: Vec<bool>,
    /// Second derivative of Phi_e as an a.e. density in v.
    pub ma_density_v: Vec<f64>,
    pub slope_interval: (f64, f64),
    /// Contact touches the growth-side grid boundary (grid too short).
    pub boundary_contact: bool,
}

impl EnvelopeResult {
    /// Total mass of ma_density_v in v; equals the attained slope range.
    pub fn mass(&self) -> f64 {
        let n = self.slopes.len();
        self.slopes[n - 1] - self.slopes[1]
    }

    /// Contact interval [v_lo, v_hi], if any contact exists.
    pub fn contact_interval(&self, g: &RadialGrid) -> Option<(f64, f64)> {
        let first = self.contact_mask.iter().position(|&c| c)?;
        let last = self.contact_mask.iter().rposition(|&c| c)?;
        Some((g.v_values[first], g.v_values[last]))
    }
}

/// Discrete Legendre transform max_i (s v_i - phi_i) over an ascending
/// slope list; the argmax index is nondecreasing in s (upper envelope of
/// lines with increasing slopes), so a single sweep suffices.
fn legendre_sweep(args: &[f64], vals: &[f64], at: &[f64]) -> Vec<f64> {
    let n = args.len();
    let mut out = Vec::with_capacity(at.len());
    let mut j = 0usize;
    for &s in at {
        loop {
            let cur = s * args[j] - vals[j];
            if j + 1 < n && s * args[j + 1] - vals[j + 1] >= cur {
                j += 1;
            } else {
                out.push(cur);
                break;
            }
        }
    }
    out
}

/// Restricted discrete Legendre biconjugate: Phi_e = (Phi^*)^* with the
/// conjugate slope s confined to `slope_interval`. The slope grid has 4x
/// the v-grid resolution and contains the exact interval endpoints.
pub fn radial_envelope(g: &RadialGrid, slope_interval: (f64, f64)) -> Result<EnvelopeResult> {
    let mut env = radial_envelope_tau(g, slope_interval, 0.0)?;
    // tau scaled by the envelope (at most linear growth), not by Phi
    // itself, which explodes on the growth side of the grid
    let max_abs = env.phi_e_values.iter().fold(0.0f64, |m, &p| m.max(p.abs()));
    let tau = 1e-6 * (1.0 + max_abs);
    env.contact_mask = g
        .phi_values
        .iter()
        .zip(&env.phi_e_values)
        .map(|(&p, &pe)| p - pe <= tau)
        .collect();
    env.boundary_contact = *env.contact_mask.last().unwrap()
        || (g.left_mode == LeftMode::Punctured && env.contact_mask[0]);
    Ok(env)
}

pub fn radial_envelope_tau(
    g: &RadialGrid,
    slope_interval: (f64, f64),
    tau: f64,
) -> Result<EnvelopeResult> {
    let (s_lo, s_hi) = slope_interval;
    if !(s_lo <= s_hi) || !s_lo.is_finite() || !s_hi.is_finite() {
        return Err(Error::SlopeInterval { lo: s_lo, hi: s_hi });
    }
    let nv = g.len();
    let ns = (4 * nv).max(2);
    let slope_grid: Vec<f64> = (0..ns)
        .map(|i| s_lo + (s_hi - s_lo) * i as f64 / (ns - 1) as f64)
        .collect();

    let star = legendre_sweep(&g.v_values, &g.phi_values, &slope_grid);
    let phi_e_values = legendre_sweep(&slope_grid, &star, &g.v_values);

    let mut slopes = vec![0.0; nv];
    for i in 1..nv {
        slopes[i] = (phi_e_values[i] - phi_e_values[i - 1]) / (g.v_values[i] - g.v_values[i - 1]);
        slopes[i] = slopes[i].clamp(s_lo, s_hi);
    }
    slopes[0] = slopes[1];

    let contact_mask: Vec<bool> = g
        .phi_values
        .iter()
        .zip(&phi_e_values)
        .map(|(&p, &pe)| p - pe <= tau)
        .collect();
    // growth-side contact always indicates a short grid; origin-side only
    // on punctured domains (slopes >= 0 make left contact legitimate)
    let boundary_contact = *contact_mask.last().unwrap()
        || (g.left_mode == LeftMode::Punctured && contact_mask[0]);

    let mut ma_density_v = vec![0.0; nv];
    for i in 1..nv - 1 {
        let dv = 0.5 * (g.v_values[i + 1] - g.v_values[i - 1]);
        ma_density_v[i] = ((slopes[i + 1] - slopes[i]) / dv).max(0.0);
    }

    Ok(EnvelopeResult {
        phi_e_values,
        slopes,
        contact_mask,
        ma_density_v,
        slope_interval,
        boundary_contact,
    })
}

/// Exact-envelope oracle for torus-invariant weights on C (n = 1).
pub struct RadialOracle {
    pub grid: RadialGrid,
    pub envelope: EnvelopeResult,
}

impl RadialOracle {
    pub fn for_weight(w: &Weight) -> Result<RadialOracle> {
        let grid = RadialGrid::default_for(w)?;
        let envelope = radial_envelope(&grid, (0.0, 1.0))?;
        Ok(RadialOracle { grid, envelope })
    }

    /// Phi_e(v) by linear interpolation; linear extension with the end
    /// slopes outside the grid.
    pub fn phi_e_v(&self, v: f64) -> f64 {
        let vs = &self.grid.v_values;
        let pe = &self.envelope.phi_e_values;
        let n = vs.len();
        if v <= vs[0] {
            return pe[0] - self.envelope.slopes[1] * (vs[0] - v);
        }
        if v >= vs[n - 1] {
            return pe[n - 1] + self.envelope.slopes[n - 1] * (v - vs[n - 1]);
        }
        let i = vs.partition_point(|&x| x < v).max(1);
        let t = (v - vs[i - 1]) / (vs[i] - vs[i - 1]);
        pe[i - 1] * (1.0 - t) + pe[i] * t
    }

    pub fn phi_e_point(&self, z: &Point) -> f64 {
        let t = z.norm_sqr();
        if t == 0.0 {
            // v -> -infinity limit: constant extension of the left end
            return self.phi_e_v(self.grid.v_values[0]);
        }
        self.phi_e_v(t.ln())
    }

    pub fn contact_interval_v(&self) -> Option<(f64, f64)> {
        self.envelope.contact_interval(&self.grid)
    }
}

/// Equilibrium potential at a point for torus-invariant n = 1 weights.
pub fn phi_e_point(w: &Weight, z: &Point) -> Result<f64> {
    Ok(RadialOracle::for_weight(w)?.phi_e_point(z))
}

/// k^{-1} ln K_k(z, z) as the envelope approximation, with the theorem's
/// error budget C n ln k / k attached.
pub fn phi_e_point_from_model(m: &BergmanModel, z: &Point, c: f64) -> (f64, f64) {
    let k = m.k() as f64;
    let budget = c * m.basis().n as f64 * k.ln() / k;
    (m.log_kernel_potential(z), budget)
}

/// Default contact tolerance for oracle potentials on a point set.
pub fn default_tau_oracle(w: &Weight, pts: &[Point]) -> f64 {
    let max_abs = pts.iter().fold(0.0f64, |m, p| m.max(w.eval(p).abs()));
    1e-6 * (1.0 + max_abs)
}

/// Contact tolerance for log-kernel potentials: three times the theorem
/// rate.
pub fn default_tau_kernel(c: f64, n: usize, k: u32) -> f64 {
    3.0 * c * n as f64 * (k as f64).ln() / k as f64
}

/// mask(z) = (phi(z) - phi_e(z) <= tau).
pub fn coincidence_set<F: Fn(&Point) -> f64>(
    w: &Weight,
    phi_e: F,
    pts: &[Point],
    tau: f64,
) -> Vec<bool> {
    pts.iter().map(|z| w.eval(z) - phi_e(z) <= tau).collect()
}

/// Square grid of res x res points on [-extent, extent]^2 in C.
pub fn square_grid(extent: f64, res: usize) -> Vec<Point> {
    let mut pts = Vec::with_capacity(res * res);
    for i in 0..res {
        let x = -extent + 2.0 * extent * i as f64 / (res - 1) as f64;
        for j in 0..res {
            let y = -extent + 2.0 * extent * j as f64 / (res - 1) as f64;
            pts.push(Point::one(Complex64::new(x, y)));
        }
    }
    pts
}

/// int |k^{-n} B_k - target| dlambda over the rule.
pub fn l1_error<F: Fn(&Point) -> f64>(
    m: &BergmanModel,
    target: F,
    rule: &QuadRule,
) -> Result<f64> {
    let scale = (m.k() as f64).powi(m.basis().n as i32);
    quadrature::integrate_real(rule, |z| (m.bergman_function(z) / scale - target(z)).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct DecayReport {
    pub c_fit: f64,
    pub violations: usize,
}

/// Fits the smallest C with k^{-n} B_k(z) <= C e^{-k (phi - phi_e)} over
/// the samples; computed in logs so the far-field exponents cancel.
pub fn decay_check<F: Fn(&Point) -> f64>(
    m: &BergmanModel,
    phi_e: F,
    samples: &[Point],
) -> Result<DecayReport> {
    let w = m.weight().clone();
    let kf = m.k() as f64;
    let n = m.basis().n;
    let ln_k_n = n as f64 * kf.ln();
    let tau = default_tau_oracle(&w, samples);
    let mut sup_density = 0.0f64;
    let mut log_cs = Vec::with_capacity(samples.len());
    for z in samples {
        // ln [k^{-n} B e^{k (phi - phi_e)}] = ln K(z,z) - k phi_e - n ln k
        let lc = m.log_kernel_diag(z) - kf * phi_e(z) - ln_k_n;
        log_cs.push(lc);
        if w.eval(z) - phi_e(z) <= tau {
            let d = weights::ma_density(&w, z, weights::default_fd_step(z))?;
            sup_density = sup_density.max(d);
        }
    }
    let c_fit = log_cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp();
    let threshold = (10.0 * sup_density).ln();
    let violations = log_cs.iter().filter(|&&lc| lc > threshold).count();
    Ok(DecayReport { c_fit, violations })
}

#[derive(Clone, Copy, Debug)]
pub struct DominationReport {
    pub ratio: f64,
}

/// max |f|^2 e^{-k phi_e} over the grid divided by max |f|^2 e^{-k phi}
/// over the masked set D; at most 1 up to discretization.
pub fn domination_check<F: Fn(&Point) -> f64>(
    m: &BergmanModel,
    coeffs: &[Complex64],
    grid: &[Point],
    mask_d: &[bool],
    phi_e: F,
) -> Result<DominationReport> {
    assert_eq!(grid.len(), mask_d.len());
    let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let w = m.weight().clone();
    let kf = m.k() as f64;
    let log_f2 = |z: &Point| -> f64 {
        let p = m.psi(z);
        let mut v = Complex64::new(0.0, 0.0);
        for (c, pi) in coeffs.iter().zip(p.iter()) {
            v += c * pi;
        }
        v.norm_sqr().ln()
    };
    let mut num = f64::NEG_INFINITY;
    let mut den = f64::NEG_INFINITY;
    for (z, &in_d) in grid.iter().zip(mask_d) {
        let lf = log_f2(z);
        num = num.max(lf - kf * phi_e(z));
        if in_d {
            den = den.max(lf - kf * w.eval(z));
        }
    }
    if !den.is_finite() {
        return Err(Error::Config("mask selects no grid points".into()));
    }
    Ok(DominationReport { ratio: (num - den).exp() })
}

/// k^{-n} double integral of |K_k(z,w)|^2 e^{-k phi(z) - k phi(w)} over
/// |z - w| > eta, via the factorized total minus the near-diagonal part.
pub fn offdiag_mass(
    m: &BergmanModel,
    eta: f64,
    rule_z: &QuadRule,
    rule_w: &QuadRule,
) -> Result<f64> {
    assert!(eta >= 0.0);
    let scale = (m.k() as f64).powi(m.basis().n as i32);
    if eta >= rule_z.truncation_radius + rule_w.truncation_radius {
        return Ok(0.0);
    }
    let d = m.dim();
    let frames_z: Vec<_> = rule_z.nodes.iter().map(|z| m.weighted_frame(z)).collect();
    let frames_w: Vec<_> = rule_w.nodes.iter().map(|z| m.weighted_frame(z)).collect();

    // total = sum_{ij} G1_ij conj(G2_ij) with G the frame Gram per rule
    let gram = |weights: &[f64], frames: &[nalgebra::DVector<Complex64>]| {
        let mut g = vec![Complex64::new(0.0, 0.0); d * d];
        for (w, f) in weights.iter().zip(frames) {
            for i in 0..d {
                let wi = f[i] * *w;
                for j in 0..d {
                    g[i * d + j] += wi * f[j].conj();
                }
            }
        }
        g
    };
    let g1 = gram(&rule_z.weights, &frames_z);
    let g2 = gram(&rule_w.weights, &frames_w);
    let mut total = 0.0;
    for (a, b) in g1.iter().zip(&g2) {
        total += (a * b.conj()).re;
    }

    // near-diagonal part |z - w| <= eta by direct pair summation
    let mut near = 0.0;
    if eta > 0.0 {
        for (iz, (z, wz)) in rule_z.nodes.iter().zip(&rule_z.weights).enumerate() {
            let rz = z.norm();
            for (iw, (u, wu)) in rule_w.nodes.iter().zip(&rule_w.weights).enumerate() {
                if (rz - u.norm()).abs() > eta || z.dist(u) > eta {
                    continue;
                }
                let fz = &frames_z[iz];
                let fu = &frames_w[iw];
                let mut kzw = Complex64::new(0.0, 0.0);
                for i in 0..d {
                    kzw += fz[i] * fu[i].conj();
                }
                near += wz * wu * kzw.norm_sqr();
            }
        }
    }
    Ok(((total - near) / scale).max(0.0))
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeReport {
    pub c0: f64,
    pub slope: f64,
}

/// Richardson analysis of k^{-n} B_k(z) over models at k, 2k, 4k:
/// extrapolated limit c0 and fitted order of the first correction.
pub fn expansion_probe(models: &[&BergmanModel; 3], z: &Point) -> Result<ProbeReport> {
    let k0 = models[0].k();
    assert_eq!(models[1].k(), 2 * k0);
    assert_eq!(models[2].k(), 4 * k0);
    let w = models[0].weight();
    if w.n() == 1 && (w.is_radial() || w.is_toric()) {
        let oracle = RadialOracle::for_weight(w)?;
        let tau = default_tau_oracle(w, &[*z]);
        if w.eval(z) - oracle.phi_e_point(z) > tau {
            return Err(Error::NotInterior);
        }
    }
    let f: Vec<f64> = models
        .iter()
        .map(|m| m.bergman_function(z) / (m.k() as f64).powi(m.basis().n as i32))
        .collect();
    let d1 = f[0] - f[1];
    let d2 = f[1] - f[2];
    let scale = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if d1.abs() <= 1e-13 * scale && d2.abs() <= 1e-13 * scale {
        // no visible correction term; the value is already converged
        return Ok(ProbeReport { c0: f[2], slope: 0.0 });
    }
    let ratio = d1 / d2;
    if !(ratio > 0.0) {
        return Ok(ProbeReport { c0: f[2], slope: f64::NAN });
    }
    let q = ratio.log2();
    let c0 = f[2] - d2 / (2.0f64.powf(q) - 1.0);
    Ok(ProbeReport { c0, slope: -q })
}

/// Least-squares slope and intercept of ln y against ln x.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::default_model;
    use std::f64::consts::PI;

    fn zp(re: f64, im: f64) -> Point {
        Point::one(Complex64::new(re, im))
    }

    fn gaussian() -> Weight {
        Weight::make_builtin("gaussian", &[]).unwrap()
    }

    #[test]
    fn gaussian_envelope_closed_form() {
        // Phi = e^v: envelope e^v for v <= 0, v + 1 beyond
        let g = RadialGrid::default_for(&gaussian()).unwrap();
        let env = radial_envelope(&g, (0.0, 1.0)).unwrap();
        for (i, &v) in g.v_values.iter().enumerate() {
            let exact = if v <= 0.0 { v.exp() } else { v + 1.0 };
            assert!(
                (env.phi_e_values[i] - exact).abs() < 5e-5,
                "v = {v}: {} vs {exact}",
                env.phi_e_values[i]
            );
        }
        let (lo, hi) = env.contact_interval(&g).unwrap();
        assert!(lo <= -11.9 && hi.abs() < 0.05, "contact [{lo}, {hi}]");
        assert!(!env.boundary_contact);
    }

    #[test]
    fn annulus_envelope_free_boundary() {
        // contact [0, v*] with e^{v*} = (1 + sqrt 3)/2
        let w = Weight::make_builtin("annulus", &[]).unwrap();
        let g = RadialGrid::default_for(&w).unwrap();
        let env = radial_envelope(&g, (0.0, 1.0)).unwrap();
        let v_star = ((1.0 + 3.0f64.sqrt()) / 2.0).ln();
        let (lo, hi) = env.contact_interval(&g).unwrap();
        assert!(lo.abs() < 0.02, "{lo}");
        assert!((hi - v_star).abs() < 0.02, "{hi} vs {v_star}");
        // flat at 0 below the annulus, affine continuation above
        let i = g.v_values.partition_point(|&v| v < -2.0);
        assert!(env.phi_e_values[i].abs() < 1e-5);
        let j = g.v_values.partition_point(|&v| v < v_star + 1.0);
        let exact = ((v_star.exp() - 1.0).powi(2)) + (g.v_values[j] - v_star);
        assert!((env.phi_e_values[j] - exact).abs() < 1e-4);
    }

    #[test]
    fn envelope_idempotent_and_monotone() {
        let g = RadialGrid::default_for(&gaussian()).unwrap();
        let env = radial_envelope(&g, (0.0, 1.0)).unwrap();
        let g2 = RadialGrid::new(g.v_values.clone(), env.phi_e_values.clone(), g.left_mode).unwrap();
        let env2 = radial_envelope(&g2, (0.0, 1.0)).unwrap();
        for (a, b) in env.phi_e_values.iter().zip(&env2.phi_e_values) {
            assert!((a - b).abs() <= 1e-10);
        }
        assert!(env2.contact_mask.iter().all(|&c| c));

        // monotonicity
        let shifted: Vec<f64> = g.phi_values.iter().map(|p| p + 0.3).collect();
        let gs = RadialGrid::new(g.v_values.clone(), shifted, g.left_mode).unwrap();
        let envs = radial_envelope(&gs, (0.0, 1.0)).unwrap();
        for (a, b) in env.phi_e_values.iter().zip(&envs.phi_e_values) {
            assert!(*a <= b + 1e-10);
        }
    }

    #[test]
    fn envelope_invariants() {
        for name in ["gaussian", "annulus"] {
            let w = Weight::make_builtin(name, &[]).unwrap();
            let g = RadialGrid::default_for(&w).unwrap();
            let env = radial_envelope(&g, (0.0, 1.0)).unwrap();
            for (p, pe) in g.phi_values.iter().zip(&env.phi_e_values) {
                assert!(pe <= &(p + 1e-12));
            }
            for s in env.slopes.windows(2) {
                assert!(s[1] >= s[0] - 1e-9, "{name}: slopes {s:?}");
            }
            assert!(env.slopes.iter().all(|&s| (-1e-12..=1.0 + 1e-12).contains(&s)));
            let mass = env.mass();
            assert!(mass <= 1.0 + 1e-9, "{name}: mass {mass}");
            // super-logarithmic growth on the right, flat left end: full mass
            assert!((mass - 1.0).abs() < 1e-3, "{name}: mass {mass}");
        }
    }

    #[test]
    fn envelope_regularity() {
        // Phi_e'' >= 0 and bounded by the contact-set curvature of Phi
        let w = Weight::make_builtin("annulus", &[]).unwrap();
        let g = RadialGrid::default_for(&w).unwrap();
        let env = radial_envelope(&g, (0.0, 1.0)).unwrap();
        let dv = g.v_values[1] - g.v_values[0];
        let second = |vals: &[f64], i: usize| (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (dv * dv);
        let mut max_contact_curv = 0.0f64;
        for i in 1..g.len() - 1 {
            if env.contact_mask[i] {
                max_contact_curv = max_contact_curv.max(second(&g.phi_values, i));
            }
        }
        for i in 1..g.len() - 1 {
            let s = second(&env.phi_e_values, i);
            assert!(s >= -1e-8, "i = {i}: {s}");
            assert!(s <= max_contact_curv + 1e-6, "i = {i}: {s} vs {max_contact_curv}");
        }
    }

    #[test]
    fn admissible_profile_unchanged() {
        // convex with slopes within [0, 1] is its own envelope
        let v: Vec<f64> = (0..500).map(|i| -3.0 + 6.0 * i as f64 / 499.0).collect();
        let phi: Vec<f64> = v.iter().map(|&x| 0.5 * x + 0.1 * (x / 3.0).powi(2)).collect();
        let g = RadialGrid::new(v, phi.clone(), LeftMode::Punctured).unwrap();
        let env = radial_envelope(&g, (0.0, 1.0)).unwrap();
        for (a, b) in phi.iter().zip(&env.phi_e_values) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!(env.contact_mask.iter().all(|&c| c));
    }

    #[test]
    fn reversed_slope_interval_rejected() {
        let g = RadialGrid::default_for(&gaussian()).unwrap();
        assert!(matches!(
            radial_envelope(&g, (1.0, 0.0)),
            Err(Error::SlopeInterval { .. })
        ));
    }

    #[test]
    fn phi_e_point_values() {
        let w = gaussian();
        assert!((phi_e_point(&w, &zp(2.0, 0.0)).unwrap() - (4.0f64.ln() + 1.0)).abs() < 1e-4);
        assert!(phi_e_point(&w, &zp(0.0, 0.0)).unwrap().abs() < 1e-5);
        let a = Weight::make_builtin("annulus", &[]).unwrap();
        let z = zp(1.2f64.sqrt(), 0.0);
        assert!((phi_e_point(&a, &z).unwrap() - 0.04).abs() < 1e-4);
    }

    #[test]
    fn gaussian_coincidence_is_unit_disc() {
        let w = gaussian();
        let oracle = RadialOracle::for_weight(&w).unwrap();
        let pts = square_grid(1.5, 301);
        let tau = default_tau_oracle(&w, &pts);
        let mask = coincidence_set(&w, |z| oracle.phi_e_point(z), &pts, tau);
        let h = 3.0 / 300.0;
        for (z, &m) in pts.iter().zip(&mask) {
            let r = z.norm();
            if r < 1.0 - h {
                assert!(m, "missing contact at r = {r}");
            }
            if r > 1.0 + h {
                assert!(!m, "spurious contact at r = {r}");
            }
        }
    }

    #[test]
    fn l1_error_zero_against_self_and_trend() {
        let w = gaussian();
        let m8 = default_model(&w, 8).unwrap();
        let m32 = default_model(&w, 32).unwrap();
        let rule = quadrature::polar_rule(2.5, 96, 64).unwrap();
        let selferr = l1_error(&m8, |z| m8.bergman_function(z) / 8.0, &rule).unwrap();
        assert!(selferr == 0.0);
        let target = |z: &Point| if z.norm_sqr() <= 1.0 { 1.0 / PI } else { 0.0 };
        let e8 = l1_error(&m8, target, &rule).unwrap();
        let e32 = l1_error(&m32, target, &rule).unwrap();
        assert!(e32 < e8, "{e32} vs {e8}");
    }

    #[test]
    fn decay_check_gaussian() {
        let w = gaussian();
        let m = default_model(&w, 32).unwrap();
        let oracle = RadialOracle::for_weight(&w).unwrap();
        let mut samples = Vec::new();
        for i in 0..60 {
            let r = 2.5 * i as f64 / 59.0;
            let th = 2.4 * i as f64;
            samples.push(zp(r * th.cos(), r * th.sin()));
        }
        let rep = decay_check(&m, |z| oracle.phi_e_point(z), &samples).unwrap();
        assert!(rep.c_fit <= 2.0 / PI, "{}", rep.c_fit);
        assert_eq!(rep.violations, 0);
        // far-field arithmetic: B tiny out at |z| = 2
        let b = m.bergman_function(&zp(2.0, 0.0)) / 32.0;
        let bound = rep.c_fit * (-32.0 * (4.0 - (4.0f64.ln() + 1.0))).exp();
        assert!(b <= bound * 1.0001, "{b} vs {bound}");
    }

    #[test]
    fn domination_ratio_bounded() {
        use rand::{Rng, SeedableRng};
        let w = gaussian();
        let m = default_model(&w, 16).unwrap();
        let oracle = RadialOracle::for_weight(&w).unwrap();
        let pts = square_grid(3.0, 101);
        let tau = default_tau_oracle(&w, &pts);
        let mask = coincidence_set(&w, |z| oracle.phi_e_point(z), &pts, tau);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let mut c: Vec<Complex64> = (0..m.dim())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            if trial == 0 {
                c = vec![Complex64::new(0.0, 0.0); m.dim()];
                c[0] = Complex64::new(1.0, 0.0);
            }
            if trial == 1 {
                c = vec![Complex64::new(0.0, 0.0); m.dim()];
                let d = m.dim();
                c[d - 1] = Complex64::new(1.0, 0.0);
            }
            let rep = domination_check(&m, &c, &pts, &mask, |z| oracle.phi_e_point(z)).unwrap();
            assert!(rep.ratio <= 1.0 + 1e-3, "trial {trial}: {}", rep.ratio);
        }
    }

    #[test]
    fn offdiag_total_is_trace() {
        let w = gaussian();
        for k in [8u32, 16] {
            let m = default_model(&w, k).unwrap();
            let total = offdiag_mass(&m, 0.0, m.rule(), m.rule()).unwrap();
            let expect = m.dim() as f64 / k as f64;
            assert!((total - expect).abs() <= 1e-6 * expect, "k = {k}: {total} vs {expect}");
        }
    }

    #[test]
    fn offdiag_mass_decreases_and_vanishes() {
        let w = gaussian();
        let m16 = default_model(&w, 16).unwrap();
        let m32 = default_model(&w, 32).unwrap();
        let a = offdiag_mass(&m16, 0.3, m16.rule(), m16.rule()).unwrap();
        let b = offdiag_mass(&m32, 0.3, m32.rule(), m32.rule()).unwrap();
        assert!(b < a, "{b} vs {a}");
        let far = offdiag_mass(&m16, 100.0, m16.rule(), m16.rule()).unwrap();
        assert_eq!(far, 0.0);
    }

    #[test]
    fn expansion_probe_gaussian() {
        let w = gaussian();
        let ms: Vec<_> = [16u32, 32, 64].iter().map(|&k| default_model(&w, k).unwrap()).collect();
        let probe = expansion_probe(&[&ms[0], &ms[1], &ms[2]], &zp(0.0, 0.0)).unwrap();
        assert!((probe.c0 - 1.0 / PI).abs() < 1e-9, "{}", probe.c0);
        assert_eq!(probe.slope, 0.0);
        let probe = expansion_probe(&[&ms[0], &ms[1], &ms[2]], &zp(0.5, 0.0)).unwrap();
        assert!((probe.c0 - 1.0 / PI).abs() < 1e-3, "{}", probe.c0);
        // outside D the probe refuses
        assert!(matches!(
            expansion_probe(&[&ms[0], &ms[1], &ms[2]], &zp(2.0, 0.0)),
            Err(Error::NotInterior)
        ));
    }

    #[test]
    fn loglog_fit_recovers_power() {
        let xs = [16.0f64, 32.0, 64.0, 128.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.25)).collect();
        let (slope, intercept) = fit_loglog_slope(&xs, &ys);
        assert!((slope - 1.25).abs() < 1e-12);
        assert!((intercept - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rate_constant_stable() {
        // sup |k^{-1} ln K - phi_e| / (ln k / k) within a factor 3 band
        let w = gaussian();
        let oracle = RadialOracle::for_weight(&w).unwrap();
        let mut cs = Vec::new();
        for k in [8u32, 16, 32, 64] {
            let m = default_model(&w, k).unwrap();
            let mut sup = 0.0f64;
            for i in 0..201 {
                let r = 3.0 * i as f64 / 200.0;
                let z = zp(r, 0.0);
                sup = sup.max((m.log_kernel_potential(&z) - oracle.phi_e_point(&z)).abs());
            }
            cs.push(sup * k as f64 / (k as f64).ln());
        }
        let cmax = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cmin = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(cmax / cmin <= 3.0, "{cs:?}");
    }
}
