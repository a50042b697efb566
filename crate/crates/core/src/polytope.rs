//! Newton polytopes: support weights H_Delta, lattice bases of k Delta,
//! polytope growth validation and the toric coincidence oracle
//! D_Delta = (grad Phi)^{-1}(Delta).

use crate::bergman::Basis;
use crate::equilibrium::{radial_envelope, EnvelopeResult, RadialGrid};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::weights::{GrowthReport, Weight};

const MEMBERSHIP_TOL: f64 = 1e-9;

/// A convex lattice polytope in R^n (n = 1: interval, n = 2: polygon)
/// with non-empty interior.
#[derive(Clone, Debug)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    /// Counterclockwise hull order (n = 2); [min, max] for n = 1.
    hull: Vec<Vec<f64>>,
    n: usize,
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn convex_hull(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Polytope> {
        if vertices.is_empty() {
            return Err(Error::DegeneratePolytope);
        }
        let n = vertices[0].len();
        if !(n == 1 || n == 2) || vertices.iter().any(|v| v.len() != n) {
            return Err(Error::DegeneratePolytope);
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DegeneratePolytope);
        }
        let hull = if n == 1 {
            let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo + 1e-12) {
                return Err(Error::DegeneratePolytope);
            }
            vec![vec![lo], vec![hi]]
        } else {
            let hull = convex_hull(&vertices);
            if hull.len() < 3 {
                return Err(Error::DegeneratePolytope);
            }
            // every input vertex must lie on the hull (convex position)
            for v in &vertices {
                let on = hull.iter().any(|h| (h[0] - v[0]).abs() < 1e-12 && (h[1] - v[1]).abs() < 1e-12);
                if !on {
                    return Err(Error::DegeneratePolytope);
                }
            }
            let mut area = 0.0;
            for i in 0..hull.len() {
                let a = &hull[i];
                let b = &hull[(i + 1) % hull.len()];
                area += a[0] * b[1] - b[0] * a[1];
            }
            if area.abs() / 2.0 < 1e-12 {
                return Err(Error::DegeneratePolytope);
            }
            hull
        };
        Ok(Polytope { vertices, hull, n })
    }

    pub fn interval(a: f64, b: f64) -> Result<Polytope> {
        Polytope::new(vec![vec![a], vec![b]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Interval bounds for n = 1.
    pub fn bounds(&self) -> (f64, f64) {
        assert_eq!(self.n, 1);
        (self.hull[0][0], self.hull[1][0])
    }

    pub fn scaled(&self, factor: f64) -> Polytope {
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| x * factor).collect())
            .collect();
        Polytope::new(vertices).expect("scaling preserves convex position")
    }

    /// Closed membership with tolerance.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        assert_eq!(x.len(), self.n);
        if self.n == 1 {
            let (lo, hi) = self.bounds();
            return x[0] >= lo - tol && x[0] <= hi + tol;
        }
        let m = self.hull.len();
        for i in 0..m {
            let a = &self.hull[i];
            let b = &self.hull[(i + 1) % m];
            let edge = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            if cross(a, b, &x.to_vec()) < -tol * edge.max(1.0) {
                return false;
            }
        }
        true
    }

    /// Support function in log coordinates: max over vertices of p . v.
    pub fn support(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.n);
        self.vertices
            .iter()
            .map(|p| p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// H_Delta(z) = 2 max over vertices p of sum p_i ln |z_i|.
pub fn support_weight(delta: &Polytope, z: &Point) -> Result<f64> {
    if z.coords().iter().any(|c| c.norm_sqr() == 0.0) {
        return Err(Error::ZeroCoordinate);
    }
    Ok(delta.support(&z.log_radial()))
}

/// All alpha in Z^n with alpha / k in Delta (closed, tolerance 1e-9).
pub fn lattice_basis(delta: &Polytope, k: u32) -> Basis {
    assert!(k >= 1);
    let kf = k as f64;
    let mut exponents = Vec::new();
    if delta.n() == 1 {
        let (lo, hi) = delta.bounds();
        let a = (kf * lo - MEMBERSHIP_TOL).ceil() as i64;
        let b = (kf * hi + MEMBERSHIP_TOL).floor() as i64;
        for e in a..=b {
            exponents.push([e, 0]);
        }
    } else {
        let lo0 = delta.vertices().iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi0 = delta.vertices().iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        let lo1 = delta.vertices().iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
        let hi1 = delta.vertices().iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
        for e0 in (kf * lo0 - 1.0).floor() as i64..=(kf * hi0 + 1.0).ceil() as i64 {
            for e1 in (kf * lo1 - 1.0).floor() as i64..=(kf * hi1 + 1.0).ceil() as i64 {
                if delta.contains(&[e0 as f64 / kf, e1 as f64 / kf], MEMBERSHIP_TOL) {
                    exponents.push([e0, e1]);
                }
            }
        }
    }
    Basis { exponents, n: delta.n(), k }
}

/// Samples log-radii v with large norm and checks phi >= (1 + eps) H_Delta
/// at every sample.
pub fn validate_growth_polytope(w: &Weight, delta: &Polytope, eps: f64) -> GrowthReport {
    assert_eq!(w.n(), delta.n());
    assert!(eps > 0.0);
    let n = delta.n();
    let phi_at = |v: &[f64]| -> f64 {
        w.toric_profile(v).unwrap_or_else(|| {
            let cs: Vec<num_complex::Complex64> = v
                .iter()
                .map(|&vi| num_complex::Complex64::new((vi / 2.0).exp(), 0.0))
                .collect();
            w.eval(&Point::from_slice(&cs))
        })
    };
    let mut worst = f64::INFINITY;
    let radii = [8.0, 10.0, 12.0, 16.0];
    let dirs = if n == 1 { 2 } else { 64 };
    for &rho in &radii {
        for j in 0..dirs {
            let v: Vec<f64> = if n == 1 {
                vec![if j == 0 { rho } else { -rho }]
            } else {
                let th = 2.0 * std::f64::consts::PI * j as f64 / dirs as f64;
                vec![rho * th.cos(), rho * th.sin()]
            };
            let margin = phi_at(&v) - (1.0 + eps) * delta.support(&v);
            if margin < worst {
                worst = margin;
            }
        }
    }
    GrowthReport { ok: worst >= 0.0, worst_margin: worst }
}

/// mask(v) = (grad Phi(v) in Delta), gradient by central differences.
/// Convexity of the profile is spot-checked by second differences.
pub fn toric_coincidence<F: Fn(&[f64]) -> f64>(
    profile: F,
    delta: &Polytope,
    v_points: &[Vec<f64>],
) -> Result<Vec<bool>> {
    let n = delta.n();
    let h = 1e-5;
    // convexity along coordinate axes at a sample of the points
    let stride = (v_points.len() / 64).max(1);
    for v in v_points.iter().step_by(stride) {
        for axis in 0..n {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[axis] += 1e-3;
            vm[axis] -= 1e-3;
            let second = profile(&vp) - 2.0 * profile(v) + profile(&vm);
            if second < -1e-8 {
                return Err(Error::NonConvexProfile(second));
            }
        }
    }
    let grad_tol = 1e-4;
    Ok(v_points
        .iter()
        .map(|v| {
            let mut g = vec![0.0; n];
            for axis in 0..n {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[axis] += h;
                vm[axis] -= h;
                g[axis] = (profile(&vp) - profile(&vm)) / (2.0 * h);
            }
            delta.contains(&g, grad_tol)
        })
        .collect())
}

/// Slope-constrained envelope for Delta = [a, b]: the phi_{Delta,e}
/// construction for torus-invariant n = 1 weights.
pub fn polytope_equilibrium(g: &RadialGrid, delta: &Polytope) -> Result<EnvelopeResult> {
    assert_eq!(delta.n(), 1);
    radial_envelope(g, delta.bounds())
}
