//! Truncated integration rules on C^n accurate for |polynomial|^2 e^{-k phi}
//! integrands, with reproducible compensated summation.

use crate::error::{Error, Result};
use crate::point::Point;
use crate::weights::Weight;
use num_complex::Complex64;
use std::f64::consts::PI;

/// A positive cubature on a truncated disc/annulus (n = 1) or polydisc
/// (n = 2, tensor of per-coordinate polar rules).
#[derive(Clone)]
pub struct QuadRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub truncation_radius: f64,
    pub inner_radius: f64,
    pub degree_capacity: usize,
    pub n: usize,
    /// Per-coordinate radial rules in t = r^2: sum of w f(t) ~ pi * int f(t) dt.
    pub radial_axes: Vec<Vec<(f64, f64)>>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Polar rule on the disc |z| <= R: Gauss-Legendre in t = r^2 (so radial
/// monomial moments are polynomial in t) tensored with the uniform
/// trapezoid in angle.
pub fn polar_rule(radius: f64, n_radial: usize, n_angular: usize) -> Result<QuadRule> {
    annular_rule(0.0, radius, n_radial, n_angular)
}

/// Polar rule on the annulus r_inner <= |z| <= radius.
pub fn annular_rule(
    r_inner: f64,
    radius: f64,
    n_radial: usize,
    n_angular: usize,
) -> Result<QuadRule> {
    if n_radial < 8 || n_angular < 8 {
        return Err(Error::InvalidRuleCounts { n_radial, n_angular });
    }
    assert!(radius > r_inner && r_inner >= 0.0);
    let (gx, gw) = gauss_legendre(n_radial);
    let t_lo = r_inner * r_inner;
    let t_hi = radius * radius;
    let half_len = (t_hi - t_lo) / 2.0;
    let radial: Vec<(f64, f64)> = gx
        .iter()
        .zip(&gw)
        .map(|(&x, &w)| (t_lo + (x + 1.0) * half_len, w * half_len * PI))
        .collect();

    let mut nodes = Vec::with_capacity(n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    for &(t, wt) in &radial {
        let r = t.sqrt();
        for j in 0..n_angular {
            let theta = 2.0 * PI * j as f64 / n_angular as f64;
            nodes.push(Point::one(Complex64::from_polar(r, theta)));
            weights.push(wt / n_angular as f64);
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        truncation_radius: radius,
        inner_radius: r_inner,
        degree_capacity: (2 * n_radial - 2).min(n_angular / 2 - 1),
        n: 1,
        radial_axes: vec![radial],
    })
}

/// Tensor product of two n = 1 polar rules: a positive cubature on a
/// polydisc in C^2.
pub fn product_rule(a: &QuadRule, b: &QuadRule) -> QuadRule {
    assert!(a.n == 1 && b.n == 1);
    let mut nodes = Vec::with_capacity(a.len() * b.len());
    let mut weights = Vec::with_capacity(a.len() * b.len());
    for (za, wa) in a.nodes.iter().zip(&a.weights) {
        for (zb, wb) in b.nodes.iter().zip(&b.weights) {
            nodes.push(Point::two(za[0], zb[0]));
            weights.push(wa * wb);
        }
    }
    QuadRule {
        nodes,
        weights,
        truncation_radius: a.truncation_radius.max(b.truncation_radius),
        inner_radius: a.inner_radius.min(b.inner_radius),
        degree_capacity: a.degree_capacity.min(b.degree_capacity),
        n: 2,
        radial_axes: vec![a.radial_axes[0].clone(), b.radial_axes[0].clone()],
    }
}

fn directions(n: usize, count: usize) -> Vec<Point> {
    let golden = 0.618_033_988_749_894_9_f64;
    (0..count)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / count as f64;
            if n == 1 {
                Point::one(Complex64::from_polar(1.0, theta))
            } else {
                let alpha = 0.5 * PI * ((j as f64 * golden) % 1.0);
                Point::two(
                    Complex64::from_polar(alpha.cos(), theta),
                    Complex64::from_polar(alpha.sin(), 2.0 * PI * ((j as f64 * golden * golden) % 1.0)),
                )
            }
        })
        .collect()
}

fn scale(p: &Point, r: f64) -> Point {
    let cs: Vec<Complex64> = p.coords().iter().map(|z| z * r).collect();
    Point::from_slice(&cs)
}

/// Smallest R >= max(1, growth radius) such that the integrand bound
/// 2 d ln R - k phi(R u) <= ln tol holds for all sampled directions u and
/// stays satisfied on the sampled grid beyond R.
pub fn truncation_radius(w: &Weight, k: u32, max_degree: usize, tol: f64) -> Result<f64> {
    assert!(k >= 1);
    assert!(tol > 0.0 && tol <= 1e-6);
    let log_tol = tol.ln();
    let dirs = directions(w.n(), if w.n() == 1 { 16 } else { 48 });
    let bound = |r: f64| -> f64 {
        let phi_min = dirs
            .iter()
            .map(|u| w.eval(&scale(u, r)))
            .fold(f64::INFINITY, f64::min);
        2.0 * max_degree as f64 * r.ln() - k as f64 * phi_min
    };
    // the floor keeps the rule covering the bulk of every moment even when
    // the pointwise bound is already satisfied at small radii
    let r_min = w.growth_radius().max(1.0);
    let r_max = 1e3;
    let grid_len = 2000usize;
    let ratio = (r_max / r_min).ln() / (grid_len - 1) as f64;
    let rs: Vec<f64> = (0..grid_len).map(|i| r_min * (ratio * i as f64).exp()).collect();
    let ok: Vec<bool> = rs.iter().map(|&r| bound(r) <= log_tol).collect();
    // first index from which the condition holds at every sampled radius
    let mut start = None;
    for i in (0..grid_len).rev() {
        if ok[i] {
            start = Some(i);
        } else {
            break;
        }
    }
    let Some(i0) = start else {
        return Err(Error::TruncationUnsatisfiable { k, degree: max_degree, limit: r_max });
    };
    if i0 == 0 {
        return Ok(rs[0]);
    }
    // refine between the last failing and first passing radius
    let mut lo = rs[i0 - 1];
    let mut hi = rs[i0];
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) <= log_tol {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Truncation interval for Laurent bases: radii (r_in, r_out) such that
/// both tails of |z^a|^2 e^{-k phi} are below tol for all exponents
/// a in [min_exp, max_exp].
pub fn truncation_interval(
    w: &Weight,
    k: u32,
    min_exp: i64,
    max_exp: i64,
    tol: f64,
) -> Result<(f64, f64)> {
    let r_out = truncation_radius(w, k, max_exp.max(0) as usize, tol)?;
    // inner tail: as r -> 0 the worst exponent is the most negative one
    let log_tol = tol.ln();
    let dirs = directions(w.n(), 16);
    let bound = |r: f64| -> f64 {
        let phi_min = dirs
            .iter()
            .map(|u| w.eval(&scale(u, r)))
            .fold(f64::INFINITY, f64::min);
        2.0 * min_exp.min(0) as f64 * r.ln() - k as f64 * phi_min
    };
    if min_exp >= 0 {
        return Ok((0.0, r_out));
    }
    // ascending log grid; keep the largest r* with the bound satisfied at
    // every sampled radius below it
    let grid_len = 2000usize;
    let r_lo = 1e-9f64;
    let r_hi = r_out.min(1.0);
    let ratio = (r_hi / r_lo).ln() / (grid_len - 1) as f64;
    let rs: Vec<f64> = (0..grid_len).map(|i| r_lo * (ratio * i as f64).exp()).collect();
    let mut last_ok = None;
    for (i, &r) in rs.iter().enumerate() {
        if bound(r) <= log_tol {
            last_ok = Some(i);
        } else {
            break;
        }
    }
    let Some(j) = last_ok else {
        return Err(Error::TruncationUnsatisfiable {
            k,
            degree: min_exp.unsigned_abs() as usize,
            limit: r_lo,
        });
    };
    if j + 1 >= grid_len {
        return Ok((rs[j], r_out));
    }
    let mut lo = rs[j];
    let mut hi = rs[j + 1];
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) <= log_tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, r_out))
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

/// Sum of w_i f(node_i) with compensated summation in fixed node order;
/// bit-reproducible across runs.
pub fn integrate<F: FnMut(&Point) -> Complex64>(rule: &QuadRule, mut f: F) -> Result<Complex64> {
    let mut sre = 0.0;
    let mut cre = 0.0;
    let mut sim = 0.0;
    let mut cim = 0.0;
    for (i, (node, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(node);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFiniteValue { index: i });
        }
        neumaier(&mut sre, &mut cre, w * v.re);
        neumaier(&mut sim, &mut cim, w * v.im);
    }
    Ok(Complex64::new(sre + cre, sim + cim))
}

pub fn integrate_real<F: FnMut(&Point) -> f64>(rule: &QuadRule, mut f: F) -> Result<f64> {
    let mut s = 0.0;
    let mut c = 0.0;
    for (i, (node, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(node);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { index: i });
        }
        neumaier(&mut s, &mut c, w * v);
    }
    Ok(s + c)
}

/// Compensated sum of a pre-evaluated value array in fixed order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &v in values {
        neumaier(&mut s, &mut c, v);
    }
    s + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Weight;

    fn gamma_moment(j: u32, k: f64) -> f64 {
        // int |z|^{2j} e^{-k|z|^2} dlambda = pi j! / k^{j+1}
        let mut fact = 1.0;
        for i in 1..=j {
            fact *= i as f64;
        }
        PI * fact / k.powi(j as i32 + 1)
    }

    #[test]
    fn unit_area() {
        let rule = polar_rule(3.0, 32, 32).unwrap();
        let area = integrate_real(&rule, |_| 1.0).unwrap();
        assert!((area - 9.0 * PI).abs() < 1e-10 * 9.0 * PI);
    }

    #[test]
    fn gaussian_integral() {
        let rule = polar_rule(6.0, 64, 64).unwrap();
        let v = integrate_real(&rule, |p| (-p.norm_sqr()).exp()).unwrap();
        assert!((v - PI).abs() <= 1e-12 * PI, "{v}");
    }

    #[test]
    fn weighted_monomial_moments() {
        let rule = polar_rule(6.0, 64, 64).unwrap();
        let v = integrate_real(&rule, |p| p.norm_sqr().powi(5) * (-3.0 * p.norm_sqr()).exp()).unwrap();
        let exact = gamma_moment(5, 3.0);
        assert!((v - exact).abs() <= 1e-10 * exact);

        let v = integrate_real(&rule, |p| (-4.0 * p.norm_sqr()).exp()).unwrap();
        assert!((v - PI / 4.0).abs() <= 1e-10 * PI / 4.0);
    }

    #[test]
    fn angular_symmetry_kills_odd_monomials() {
        let rule = polar_rule(2.0, 16, 16).unwrap();
        let v = integrate(&rule, |p| p[0]).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn exactness_up_to_capacity() {
        // int_{|z|<=R} |z|^{2j} = pi R^{2j+2} / (j + 1), exact for the rule
        let rule = polar_rule(5.0, 24, 48).unwrap();
        for j in 0..=rule.degree_capacity.min(12) as u32 {
            let v = integrate_real(&rule, |p| p.norm_sqr().powi(j as i32)).unwrap();
            let exact = PI * 25.0f64.powi(j as i32 + 1) / (j as f64 + 1.0);
            assert!((v - exact).abs() <= 1e-13 * exact, "j = {j}: {v} vs {exact}");
        }
        // mixed harmonics below the angular capacity vanish
        let v = integrate(&rule, |p| p[0].powu(5) * p[0].conj().powu(2)).unwrap();
        assert!(v.norm() < 1e-7);
    }

    #[test]
    fn doubling_plateau() {
        let f = |p: &Point| (-1.5 * p.norm_sqr()).exp() * p.norm_sqr().powi(3);
        let a = integrate_real(&polar_rule(6.0, 48, 32).unwrap(), f).unwrap();
        let b = integrate_real(&polar_rule(6.0, 96, 32).unwrap(), f).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn product_rule_integrates_separable() {
        let r1 = polar_rule(5.0, 32, 16).unwrap();
        let rule = product_rule(&r1, &r1);
        let v = integrate_real(&rule, |p| (-p.norm_sqr()).exp()).unwrap();
        assert!((v - PI * PI).abs() < 1e-10 * PI * PI, "{v}");
    }

    #[test]
    fn truncation_radius_gaussian() {
        let g = Weight::make_builtin("gaussian", &[]).unwrap();
        let tol = (-20.0f64).exp();
        // 6 ln R - 4 R^2 = -20 => R = 2.5281
        let r = truncation_radius(&g, 4, 3, tol).unwrap();
        assert!((r - 2.5281).abs() < 0.01, "{r}");
        // -16 R^2 = -20 at R = 1.118, below the growth-radius floor of 2
        let r = truncation_radius(&g, 16, 0, tol).unwrap();
        assert!((r - 2.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn truncation_fails_for_log_weight() {
        use std::sync::Arc;
        let log = Weight::new(1, Arc::new(|p: &Point| p.norm_sqr().ln())).with_growth(0.1, 2.0);
        assert!(matches!(
            truncation_radius(&log, 4, 3, 1e-9),
            Err(Error::TruncationUnsatisfiable { .. })
        ));
    }

    #[test]
    fn non_finite_reported_with_index() {
        let rule = polar_rule(2.0, 8, 8).unwrap();
        let err = integrate_real(&rule, |p| 1.0 / (p.norm_sqr() - rule.nodes[3].norm_sqr()))
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
    }
}
