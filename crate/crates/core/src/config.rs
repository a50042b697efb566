//! Flat key = value experiment configuration.

use crate::error::{Error, Result};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub family: String,
    pub params: Vec<f64>,
    pub n: usize,
    pub ks: Vec<u32>,
    pub n_radial: Option<usize>,
    pub n_angular: Option<usize>,
    pub tol: f64,
    pub grid_extent: f64,
    pub grid_res: usize,
    pub polytope_vertices: Option<Vec<Vec<f64>>>,
    pub batches: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn parse_floats(v: &str, key: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: `{s}` is not a number")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig {
            family: String::new(),
            params: Vec::new(),
            n: 1,
            ks: Vec::new(),
            n_radial: None,
            n_angular: None,
            tol: 1e-16,
            grid_extent: 1.5,
            grid_res: 201,
            polytope_vertices: None,
            batches: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("{key}: {what} (`{value}`)"));
            match key {
                "weight.family" => cfg.family = value.to_string(),
                "weight.params" => cfg.params = parse_floats(value, key)?,
                "space.n" => {
                    cfg.n = value.parse().map_err(|_| bad("expected 1 or 2"))?;
                    if cfg.n != 1 && cfg.n != 2 {
                        return Err(bad("expected 1 or 2"));
                    }
                }
                "space.k" => {
                    cfg.ks = value
                        .split(',')
                        .map(|s| s.trim().parse::<u32>().map_err(|_| bad("expected integers")))
                        .collect::<Result<_>>()?;
                }
                "quad.radial" => cfg.n_radial = Some(value.parse().map_err(|_| bad("expected integer"))?),
                "quad.angular" => cfg.n_angular = Some(value.parse().map_err(|_| bad("expected integer"))?),
                "quad.tol" => cfg.tol = value.parse().map_err(|_| bad("expected number"))?,
                "grid.extent" => cfg.grid_extent = value.parse().map_err(|_| bad("expected number"))?,
                "grid.res" => cfg.grid_res = value.parse().map_err(|_| bad("expected integer"))?,
                "polytope.vertices" => {
                    let vertices: Vec<Vec<f64>> = value
                        .split(';')
                        .map(|p| parse_floats(p, key))
                        .collect::<Result<_>>()?;
                    cfg.polytope_vertices = Some(vertices);
                }
                "stochastic.batches" => {
                    cfg.batches = Some(value.parse().map_err(|_| bad("expected integer"))?)
                }
                "stochastic.seed" => cfg.seed = value.parse().map_err(|_| bad("expected integer"))?,
                "out.dir" => cfg.out_dir = PathBuf::from(value),
                _ => return Err(Error::Config(format!("unknown key `{key}`"))),
            }
        }
        if cfg.family.is_empty() {
            return Err(Error::Config("weight.family is required".into()));
        }
        if cfg.ks.is_empty() {
            return Err(Error::Config("space.k is required".into()));
        }
        if cfg.ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("space.k must be strictly ascending".into()));
        }
        if cfg.grid_res < 64 {
            return Err(Error::Config("grid.res must be at least 64".into()));
        }
        if !(cfg.tol > 0.0 && cfg.tol <= 1e-6) {
            return Err(Error::Config("quad.tol must lie in (0, 1e-6]".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::parse_str(&text)
    }
}
