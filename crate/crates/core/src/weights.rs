//! Weight functions phi on C^n: builtin families, growth validation and
//! pointwise Monge-Ampere densities.

use crate::error::{Error, Result};
use crate::point::Point;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

pub type EvalFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&Point) -> Vec<f64> + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&Point) -> DMatrix<Complex64> + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ToricProfileFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothness {
    CInfinity,
    C11,
    Hoelder(f64),
}

/// A weight function phi with optional analytic derivatives and growth
/// metadata. All closures are shared; `Weight` is cheap to clone and safe
/// for concurrent read-only use.
#[derive(Clone)]
pub struct Weight {
    n: usize,
    eval: EvalFn,
    gradient: Option<GradientFn>,
    complex_hessian: Option<HessianFn>,
    growth_epsilon: f64,
    growth_radius: f64,
    radial_profile: Option<ProfileFn>,
    toric_profile: Option<ToricProfileFn>,
    smoothness: Smoothness,
    family: Option<BuiltinFamily>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuiltinFamily {
    /// phi = |z|^2
    Gaussian,
    /// phi = (|z|^2 - 1)^2, n = 1
    Annulus,
    /// phi = |z|^{2 - delta}
    Hoelder { delta: f64 },
    /// phi = sum_i (ln|z_i|^2)^2 / 2 on the punctured torus
    ToricQuadratic,
    /// phi = |z|^2 + a Re(z^m) e^{-|z|^2}, n = 1, non-radial
    PerturbedGaussian { a: f64, m: u32 },
}

impl BuiltinFamily {
    pub fn parse(name: &str, params: &[f64]) -> Result<Self> {
        match name {
            "gaussian" => Ok(BuiltinFamily::Gaussian),
            "annulus" => Ok(BuiltinFamily::Annulus),
            "hoelder" => {
                let delta = *params.first().ok_or_else(|| Error::InvalidParams {
                    family: name.into(),
                    reason: "expected delta".into(),
                })?;
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(Error::InvalidParams {
                        family: name.into(),
                        reason: format!("delta = {delta} outside (0, 1]"),
                    });
                }
                Ok(BuiltinFamily::Hoelder { delta })
            }
            "toric-quadratic" => Ok(BuiltinFamily::ToricQuadratic),
            "perturbed-gaussian" => {
                let a = *params.first().ok_or_else(|| Error::InvalidParams {
                    family: name.into(),
                    reason: "expected amplitude a".into(),
                })?;
                let m = params.get(1).copied().unwrap_or(3.0);
                if m < 1.0 || m.fract() != 0.0 {
                    return Err(Error::InvalidParams {
                        family: name.into(),
                        reason: format!("m = {m} is not a positive integer"),
                    });
                }
                Ok(BuiltinFamily::PerturbedGaussian { a, m: m as u32 })
            }
            _ => Err(Error::UnknownFamily(name.into())),
        }
    }
}

impl Weight {
    /// Builtin family by name with n = 1.
    pub fn make_builtin(name: &str, params: &[f64]) -> Result<Weight> {
        Self::make_builtin_n(name, params, 1)
    }

    pub fn make_builtin_n(name: &str, params: &[f64], n: usize) -> Result<Weight> {
        Self::builtin(BuiltinFamily::parse(name, params)?, n)
    }

    pub fn builtin(family: BuiltinFamily, n: usize) -> Result<Weight> {
        assert!(n == 1 || n == 2, "only n = 1, 2 supported");
        let w = match family {
            BuiltinFamily::Gaussian => {
                let hess = move |p: &Point| DMatrix::identity(p.dim(), p.dim());
                let mut w = Weight::new(n, Arc::new(|p: &Point| p.norm_sqr()))
                    .with_hessian(Arc::new(hess))
                    .with_gradient(Arc::new(|p: &Point| {
                        p.to_real().iter().map(|x| 2.0 * x).collect()
                    }))
                    .with_toric_profile(Arc::new(|v: &[f64]| v.iter().map(|vi| vi.exp()).sum()))
                    .with_growth(0.5, 2.0)
                    .with_smoothness(Smoothness::CInfinity);
                if n == 1 {
                    w = w.with_radial_profile(Arc::new(|v: f64| v.exp()));
                }
                w
            }
            BuiltinFamily::Annulus => {
                if n != 1 {
                    return Err(Error::InvalidParams {
                        family: "annulus".into(),
                        reason: "only n = 1".into(),
                    });
                }
                // phi = (t - 1)^2, t = |z|^2; complex Hessian 4t - 2.
                let hess = |p: &Point| {
                    DMatrix::from_element(1, 1, Complex64::new(4.0 * p.norm_sqr() - 2.0, 0.0))
                };
                Weight::new(1, Arc::new(|p: &Point| (p.norm_sqr() - 1.0).powi(2)))
                    .with_hessian(Arc::new(hess))
                    .with_radial_profile(Arc::new(|v: f64| (v.exp() - 1.0).powi(2)))
                    .with_toric_profile(Arc::new(|v: &[f64]| (v[0].exp() - 1.0).powi(2)))
                    .with_growth(1.0, 2.0)
                    .with_smoothness(Smoothness::CInfinity)
            }
            BuiltinFamily::Hoelder { delta } => {
                // phi = |z|^{2 - delta} = t^c with c = 1 - delta/2.
                let c = 1.0 - delta / 2.0;
                let hess = move |p: &Point| {
                    let t = p.norm_sqr();
                    DMatrix::from_element(p.dim(), p.dim(), Complex64::new(c * c * t.powf(c - 1.0), 0.0))
                };
                let mut w = Weight::new(n, Arc::new(move |p: &Point| p.norm_sqr().powf(c)))
                    .with_growth(0.5, 2.0)
                    .with_smoothness(Smoothness::Hoelder(delta));
                if n == 1 {
                    w = w
                        .with_hessian(Arc::new(hess))
                        .with_radial_profile(Arc::new(move |v: f64| (c * v).exp()))
                        .with_toric_profile(Arc::new(move |v: &[f64]| (c * v[0]).exp()));
                }
                w
            }
            BuiltinFamily::ToricQuadratic => {
                let eval = move |p: &Point| -> f64 {
                    p.log_radial().iter().map(|v| v * v / 2.0).sum()
                };
                let hess = |p: &Point| {
                    let mut h = DMatrix::zeros(p.dim(), p.dim());
                    for (i, t) in p.coords().iter().map(|z| z.norm_sqr()).enumerate() {
                        h[(i, i)] = Complex64::new(1.0 / t, 0.0);
                    }
                    h
                };
                let mut w = Weight::new(n, Arc::new(eval))
                    .with_hessian(Arc::new(hess))
                    .with_toric_profile(Arc::new(|v: &[f64]| {
                        v.iter().map(|vi| vi * vi / 2.0).sum()
                    }))
                    .with_growth(0.5, 5.0)
                    .with_smoothness(Smoothness::CInfinity);
                if n == 1 {
                    w = w.with_radial_profile(Arc::new(|v: f64| v * v / 2.0));
                }
                w
            }
            BuiltinFamily::PerturbedGaussian { a, m } => {
                if n != 1 {
                    return Err(Error::InvalidParams {
                        family: "perturbed-gaussian".into(),
                        reason: "only n = 1".into(),
                    });
                }
                let eval = move |p: &Point| {
                    let z = p[0];
                    let t = z.norm_sqr();
                    t + a * z.powu(m).re * (-t).exp()
                };
                Weight::new(1, Arc::new(eval))
                    .with_growth(0.5, 3.0)
                    .with_smoothness(Smoothness::CInfinity)
            }
        };
        Ok(w.with_family(family))
    }

    pub fn new(n: usize, eval: EvalFn) -> Weight {
        Weight {
            n,
            eval,
            gradient: None,
            complex_hessian: None,
            growth_epsilon: 0.5,
            growth_radius: 2.0,
            radial_profile: None,
            toric_profile: None,
            smoothness: Smoothness::C11,
            family: None,
        }
    }

    pub fn with_gradient(mut self, g: GradientFn) -> Self {
        self.gradient = Some(g);
        self
    }

    pub fn with_hessian(mut self, h: HessianFn) -> Self {
        self.complex_hessian = Some(h);
        self
    }

    pub fn with_radial_profile(mut self, p: ProfileFn) -> Self {
        self.radial_profile = Some(p);
        self
    }

    pub fn with_toric_profile(mut self, p: ToricProfileFn) -> Self {
        self.toric_profile = Some(p);
        self
    }

    pub fn with_growth(mut self, epsilon: f64, radius: f64) -> Self {
        assert!(epsilon > 0.0 && radius > 0.0);
        self.growth_epsilon = epsilon;
        self.growth_radius = radius;
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    fn with_family(mut self, f: BuiltinFamily) -> Self {
        self.family = Some(f);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, z: &Point) -> f64 {
        (self.eval)(z)
    }

    pub fn gradient(&self, z: &Point) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(z))
    }

    pub fn growth_epsilon(&self) -> f64 {
        self.growth_epsilon
    }

    pub fn growth_radius(&self) -> f64 {
        self.growth_radius
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn family(&self) -> Option<BuiltinFamily> {
        self.family
    }

    pub fn is_radial(&self) -> bool {
        self.n == 1 && self.radial_profile.is_some()
    }

    pub fn is_toric(&self) -> bool {
        self.toric_profile.is_some()
    }

    pub fn radial_profile(&self, v: f64) -> Option<f64> {
        self.radial_profile.as_ref().map(|p| p(v))
    }

    pub fn toric_profile(&self, v: &[f64]) -> Option<f64> {
        self.toric_profile.as_ref().map(|p| p(v))
    }

    pub fn has_analytic_hessian(&self) -> bool {
        self.complex_hessian.is_some()
    }

    /// The complex Hessian [d^2 phi / dz_i dzbar_j], analytic when available,
    /// otherwise central second differences with step `fd_step`.
    pub fn complex_hessian(&self, z: &Point, fd_step: f64) -> Result<DMatrix<Complex64>> {
        if let Some(h) = &self.complex_hessian {
            let m = h(z);
            if m.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
                return Err(Error::HessianFailure);
            }
            return Ok(m);
        }
        self.fd_complex_hessian(z, fd_step)
    }

    fn fd_complex_hessian(&self, z: &Point, h: f64) -> Result<DMatrix<Complex64>> {
        let n = self.n;
        let x0 = z.to_real();
        let d = 2 * n;
        let f = |xs: &[f64]| (self.eval)(&Point::from_real(xs));
        let f0 = f(&x0);
        let mut real_hess = vec![vec![0.0f64; d]; d];
        for i in 0..d {
            for j in i..d {
                let v = if i == j {
                    let mut xp = x0.clone();
                    let mut xm = x0.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h)
                } else {
                    let mut xpp = x0.clone();
                    let mut xpm = x0.clone();
                    let mut xmp = x0.clone();
                    let mut xmm = x0.clone();
                    xpp[i] += h;
                    xpp[j] += h;
                    xpm[i] += h;
                    xpm[j] -= h;
                    xmp[i] -= h;
                    xmp[j] += h;
                    xmm[i] -= h;
                    xmm[j] -= h;
                    (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h)
                };
                if !v.is_finite() {
                    return Err(Error::HessianFailure);
                }
                real_hess[i][j] = v;
                real_hess[j][i] = v;
            }
        }
        // H_{jl} = 1/4 [phi_{x_j x_l} + phi_{y_j y_l} + i (phi_{x_j y_l} - phi_{y_j x_l})]
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for l in 0..n {
                let re = real_hess[2 * j][2 * l] + real_hess[2 * j + 1][2 * l + 1];
                let im = real_hess[2 * j][2 * l + 1] - real_hess[2 * j + 1][2 * l];
                m[(j, l)] = Complex64::new(re / 4.0, im / 4.0);
            }
        }
        Ok(m)
    }
}

/// Default finite-difference step 1e-4 (1 + |z|).
pub fn default_fd_step(z: &Point) -> f64 {
    1e-4 * (1.0 + z.norm())
}

#[derive(Clone, Copy, Debug)]
pub struct GrowthReport {
    pub ok: bool,
    pub worst_margin: f64,
}

/// Samples |z| in [growth_radius, 4 growth_radius] (log-uniform radii,
/// uniform angles) and checks phi(z) >= (1 + eps) ln |z|^2 at every sample.
pub fn validate_growth(w: &Weight, sample_count: usize) -> GrowthReport {
    assert!(sample_count >= 100, "need at least 100 samples");
    let r0 = w.growth_radius();
    let eps = w.growth_epsilon();
    let m_r = (sample_count as f64).sqrt().ceil() as usize;
    let m_a = sample_count.div_ceil(m_r);
    let golden = 0.618_033_988_749_894_9_f64;
    let mut worst = f64::INFINITY;
    for i in 0..m_r {
        let frac = i as f64 / (m_r - 1).max(1) as f64;
        let r = r0 * 4.0f64.powf(frac);
        for j in 0..m_a {
            let theta = 2.0 * PI * j as f64 / m_a as f64;
            let p = if w.n() == 1 {
                Point::one(Complex64::from_polar(r, theta))
            } else {
                // split the radius between the coordinates with a
                // low-discrepancy mixing angle
                let alpha = 0.5 * PI * (((i * m_a + j) as f64 * golden) % 1.0);
                let theta2 = 2.0 * PI * (((i * m_a + j) as f64 * golden * golden) % 1.0);
                Point::two(
                    Complex64::from_polar(r * alpha.cos(), theta),
                    Complex64::from_polar(r * alpha.sin(), theta2),
                )
            };
            let margin = w.eval(&p) - (1.0 + eps) * p.norm_sqr().ln();
            if margin < worst {
                worst = margin;
            }
        }
    }
    GrowthReport { ok: worst >= 0.0, worst_margin: worst }
}

/// Monge-Ampere density det(dd^c phi) at z, against standard Lebesgue
/// measure: det of the complex Hessian over pi^n when it is positive
/// definite, zero otherwise.
pub fn ma_density(w: &Weight, z: &Point, fd_step: f64) -> Result<f64> {
    assert!(fd_step > 0.0);
    let h = w.complex_hessian(z, fd_step)?;
    let n = w.n();
    let (det, pd) = match n {
        1 => {
            let a = h[(0, 0)].re;
            (a, a > 0.0)
        }
        _ => {
            let a = h[(0, 0)].re;
            let c = h[(1, 1)].re;
            let det = a * c - h[(0, 1)].norm_sqr();
            (det, a > 0.0 && det > 0.0)
        }
    };
    if pd {
        Ok(det / PI.powi(n as i32))
    } else {
        Ok(0.0)
    }
}
