//! Experiment runner: builds models from a config, runs the convergence
//! suites and writes plot-ready CSV artifacts.

use crate::bergman::{default_rule, monomial_basis, Basis, BergmanModel};
use crate::config::ExperimentConfig;
use crate::equilibrium::{
    self, default_tau_oracle, offdiag_mass, radial_envelope, square_grid, EnvelopeResult,
    RadialGrid, RadialOracle,
};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::polytope::{lattice_basis, Polytope};
use crate::quadrature;
use crate::stochastic::{batch_seed, sample_dpp, sample_zeros, SampleBatch, SampleKind};
use crate::weights::{self, Weight};
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

/// 17 significant digits; round-trips f64 exactly.
fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

fn csv_writer(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn config_weight(cfg: &ExperimentConfig) -> Result<Weight> {
    Weight::make_builtin_n(&cfg.family, &cfg.params, cfg.n)
}

fn config_polytope(cfg: &ExperimentConfig) -> Result<Option<Polytope>> {
    match &cfg.polytope_vertices {
        Some(vs) => Ok(Some(Polytope::new(vs.clone())?)),
        None => Ok(None),
    }
}

fn config_basis(cfg: &ExperimentConfig, delta: Option<&Polytope>, k: u32) -> Basis {
    match delta {
        Some(d) => lattice_basis(d, k),
        None => monomial_basis(cfg.n, k),
    }
}

fn build_model(cfg: &ExperimentConfig, w: &Weight, delta: Option<&Polytope>, k: u32) -> Result<BergmanModel> {
    let basis = config_basis(cfg, delta, k);
    let rule = match (cfg.n_radial, cfg.n_angular) {
        (None, None) => default_rule(w, &basis, cfg.tol)?,
        (nr, na) => {
            if w.n() != 1 {
                return Err(Error::Config("quad.radial / quad.angular overrides are n = 1 only".into()));
            }
            let (r_in, r_out) = quadrature::truncation_interval(
                w,
                k,
                basis.min_exponent(0),
                basis.max_exponent(0),
                cfg.tol,
            )?;
            let auto = default_rule(w, &basis, cfg.tol)?;
            let auto_radial = auto.radial_axes[0].len();
            let auto_angular = auto.len() / auto_radial;
            quadrature::annular_rule(
                r_in,
                r_out,
                nr.unwrap_or(auto_radial),
                na.unwrap_or(auto_angular),
            )?
        }
    };
    BergmanModel::build(w, basis, rule)
}

/// Exact-envelope oracle when one exists: n = 1 torus-invariant weight,
/// with the slope interval taken from the polytope when present.
fn config_oracle(w: &Weight, delta: Option<&Polytope>) -> Option<RadialOracle> {
    let grid = RadialGrid::default_for(w).ok()?;
    let interval = match delta {
        Some(d) => d.bounds(),
        None => (0.0, 1.0),
    };
    let envelope = radial_envelope(&grid, interval).ok()?;
    Some(RadialOracle { grid, envelope })
}

/// Grid point for the density / potential sweep; for n = 2 the (re, im)
/// columns are the two real coordinates (x1, x2).
fn grid_point(n: usize, p: &Point) -> Point {
    if n == 1 {
        p.clone()
    } else {
        let c = p.coords()[0];
        Point::two((c.re).into(), (c.im).into())
    }
}

struct KReport {
    k: u32,
    dim: usize,
    dim_residual: f64,
    l1_error: f64,
    sup_potential_error: f64,
    offdiag: f64,
    mass_on_d: f64,
}

fn run_one_k(
    cfg: &ExperimentConfig,
    w: &Weight,
    delta: Option<&Polytope>,
    oracle: Option<&RadialOracle>,
    k: u32,
    write_files: bool,
) -> Result<(KReport, BergmanModel)> {
    let m = build_model(cfg, w, delta, k)?;
    let kn = (k as f64).powi(cfg.n as i32);
    let grid = square_grid(cfg.grid_extent, cfg.grid_res);
    let pts: Vec<Point> = grid.iter().map(|p| grid_point(cfg.n, p)).collect();
    let tau = default_tau_oracle(w, &pts);
    let in_d = |z: &Point| -> bool {
        match oracle {
            Some(o) => w.eval(z) - o.phi_e_point(z) <= tau,
            None => false,
        }
    };
    let target = |z: &Point| -> f64 {
        if oracle.is_some() && in_d(z) {
            weights::ma_density(w, z, weights::default_fd_step(z)).unwrap_or(f64::NAN)
        } else {
            0.0
        }
    };

    let mut density_rows = Vec::with_capacity(pts.len());
    let mut potential_rows = Vec::with_capacity(pts.len());
    let mut sup_potential_error = f64::NAN;
    for z in &pts {
        let c = z.coords();
        let (re, im) = if cfg.n == 1 {
            (c[0].re, c[0].im)
        } else {
            (c[0].re, c[1].re)
        };
        let b = m.bergman_function(z) / kn;
        let u = m.log_kernel_potential(z);
        match oracle {
            Some(o) => {
                let t = target(z);
                let pe = o.phi_e_point(z);
                let err = (u - pe).abs();
                if sup_potential_error.is_nan() || err > sup_potential_error {
                    sup_potential_error = err;
                }
                density_rows.push(format!("{},{},{},{},{}", fmt(re), fmt(im), fmt(b), fmt(t), fmt((b - t).abs())));
                potential_rows.push(format!("{},{},{},{},{}", fmt(re), fmt(im), fmt(u), fmt(pe), fmt(err)));
            }
            None => {
                density_rows.push(format!("{},{},{},,", fmt(re), fmt(im), fmt(b)));
                potential_rows.push(format!("{},{},{},,", fmt(re), fmt(im), fmt(u)));
            }
        }
    }

    if write_files {
        let mut fd = csv_writer(&cfg.out_dir, &format!("bergman_density_k{k}.csv"))?;
        writeln!(fd, "re,im,Bk_over_kn,target_density,abs_diff")?;
        for row in &density_rows {
            writeln!(fd, "{row}")?;
        }
        fd.flush()?;
        let mut fp = csv_writer(&cfg.out_dir, &format!("potential_k{k}.csv"))?;
        writeln!(fp, "re,im,log_kernel_potential,phi_e_oracle,abs_err")?;
        for row in &potential_rows {
            writeln!(fp, "{row}")?;
        }
        fp.flush()?;
    }

    let l1 = match oracle {
        Some(_) => equilibrium::l1_error(&m, &target, m.rule())?,
        None => f64::NAN,
    };
    let mass_on_d = match oracle {
        Some(o) => {
            let masked = m.integrate_bergman(|z, _t| w.eval(z) - o.phi_e_point(z) <= tau)?;
            masked / (m.dim() as f64)
        }
        None => f64::NAN,
    };
    let report = KReport {
        k,
        dim: m.dim(),
        dim_residual: m.dimension_residual()?,
        l1_error: l1,
        sup_potential_error,
        offdiag: offdiag_mass(&m, 0.3, m.rule(), m.rule())?,
        mass_on_d,
    };
    Ok((report, m))
}

fn sample_batches(m: &BergmanModel, base_seed: u64, batches: usize) -> Result<Vec<SampleBatch>> {
    let mut out = Vec::with_capacity(2 * batches);
    for b in 0..batches as u64 {
        out.push(sample_dpp(m, batch_seed(base_seed, 2 * b))?);
        out.push(sample_zeros(m, batch_seed(base_seed, 2 * b + 1))?);
    }
    Ok(out)
}

fn write_samples(cfg: &ExperimentConfig, batches: &[SampleBatch]) -> Result<()> {
    let mut f = csv_writer(&cfg.out_dir, "samples.csv")?;
    writeln!(f, "re,im,batch,kind")?;
    for (i, batch) in batches.iter().enumerate() {
        let kind = match batch.kind {
            SampleKind::DppEigenvalues => "dpp",
            SampleKind::PolynomialZeros => "zeros",
        };
        for z in &batch.points {
            writeln!(f, "{},{},{},{}", fmt(z.re), fmt(z.im), i / 2, kind)?;
        }
    }
    f.flush()?;
    Ok(())
}

/// `run` subcommand: per-k density and potential sweeps, one summary row
/// per k, optional sample batches at the largest k.
pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let w = config_weight(cfg)?;
    let delta = config_polytope(cfg)?;
    let oracle = config_oracle(&w, delta.as_ref());

    let mut summary = csv_writer(&cfg.out_dir, "summary.csv")?;
    writeln!(
        summary,
        "k,dim,dim_residual,l1_error,sup_potential_error,offdiag_mass_eta0p3,mass_on_D"
    )?;
    let mut last_model = None;
    for &k in &cfg.ks {
        let (r, m) = run_one_k(cfg, &w, delta.as_ref(), oracle.as_ref(), k, true)?;
        writeln!(
            summary,
            "{},{},{},{},{},{},{}",
            r.k,
            r.dim,
            fmt(r.dim_residual),
            fmt(r.l1_error),
            fmt(r.sup_potential_error),
            fmt(r.offdiag),
            fmt(r.mass_on_d)
        )?;
        last_model = Some(m);
    }
    summary.flush()?;

    if let Some(batches) = cfg.batches {
        if cfg.n != 1 {
            return Err(Error::Config("stochastic sampling is n = 1 only".into()));
        }
        let m = last_model.expect("ks is non-empty");
        let drawn = sample_batches(&m, cfg.seed, batches)?;
        write_samples(cfg, &drawn)?;
    }
    Ok(())
}

/// `table` subcommand: per-k convergence rows on stdout. The third column
/// is the sup potential error scaled by k / ln k and stays bounded for
/// admissible weights.
pub fn table(cfg: &ExperimentConfig, out: &mut dyn std::io::Write) -> Result<()> {
    let w = config_weight(cfg)?;
    let delta = config_polytope(cfg)?;
    let oracle = config_oracle(&w, delta.as_ref());
    writeln!(
        out,
        "{:>6} {:>14} {:>14} {:>14} {:>14}",
        "k", "sup_err", "err*k/ln(k)", "l1_error", "offdiag"
    )?;
    let mut b0 = Vec::new();
    for &k in &cfg.ks {
        let (r, m) = run_one_k(cfg, &w, delta.as_ref(), oracle.as_ref(), k, false)?;
        let rate = r.sup_potential_error * k as f64 / (k as f64).ln();
        writeln!(
            out,
            "{:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.k, r.sup_potential_error, rate, r.l1_error, r.offdiag
        )?;
        b0.push(m.bergman_function(&Point::real(0.0)));
    }
    if cfg.family == "hoelder" && cfg.ks.len() >= 2 {
        let ks: Vec<f64> = cfg.ks.iter().map(|&k| k as f64).collect();
        let (slope, _) = equilibrium::fit_loglog_slope(&ks, &b0);
        writeln!(out, "fitted slope of ln B_k(0) vs ln k: {slope:.6}")?;
    }
    Ok(())
}

/// `sample` subcommand: samples.csv only, at the largest configured k.
pub fn sample(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.n != 1 {
        return Err(Error::Config("stochastic sampling is n = 1 only".into()));
    }
    let batches = cfg
        .batches
        .ok_or_else(|| Error::Config("stochastic.batches is required for sampling".into()))?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let w = config_weight(cfg)?;
    let delta = config_polytope(cfg)?;
    let k = *cfg.ks.last().expect("ks is non-empty");
    let m = build_model(cfg, &w, delta.as_ref(), k)?;
    let drawn = sample_batches(&m, cfg.seed, batches)?;
    write_samples(cfg, &drawn)
}

/// `envelope` subcommand: phi_e profile CSV (v, phi, phi_e, slope,
/// contact) on the weight's default radial grid.
pub fn envelope(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let w = config_weight(cfg)?;
    let delta = config_polytope(cfg)?;
    let grid = RadialGrid::default_for(&w)?;
    let interval = match &delta {
        Some(d) => d.bounds(),
        None => (0.0, 1.0),
    };
    let env: EnvelopeResult = radial_envelope(&grid, interval)?;
    let mut f = csv_writer(&cfg.out_dir, "envelope.csv")?;
    writeln!(f, "v,phi,phi_e,slope,contact")?;
    for i in 0..grid.len() {
        writeln!(
            f,
            "{},{},{},{},{}",
            fmt(grid.v_values[i]),
            fmt(grid.phi_values[i]),
            fmt(env.phi_e_values[i]),
            fmt(env.slopes[i]),
            env.contact_mask[i] as u8
        )?;
    }
    f.flush()?;
    Ok(())
}

/// Process exit code for an error: 1 config, 3 I/O, 2 numerical refusal.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownFamily(_) | Error::InvalidParams { .. } => 1,
        Error::Io(_) => 3,
        _ => 2,
    }
}
