//! Weighted Bergman kernels of polynomial spaces on C^n (n = 1, 2),
//! equilibrium potentials and measures, Newton-polytope variants, and
//! determinantal / random-polynomial sampling harnesses.

pub mod bergman;
pub mod config;
pub mod equilibrium;
pub mod experiment;
pub mod error;
mod lapack;
pub mod point;
pub mod polytope;
pub mod quadrature;
pub mod stochastic;
pub mod weights;

pub use error::{Error, Result};
pub use point::Point;
pub use weights::Weight;
