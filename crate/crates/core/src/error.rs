use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("unknown weight family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameters for weight family `{family}`: {reason}")]
    InvalidParams { family: String, reason: String },

    #[error("non-finite value encountered at node {index}")]
    NonFiniteValue { index: usize },

    #[error("non-finite Hessian at sample point")]
    HessianFailure,

    #[error("truncation bound never satisfied below R = {limit}; weight grows too slowly for k = {k}, degree {degree}")]
    TruncationUnsatisfiable { k: u32, degree: usize, limit: f64 },

    #[error("invalid quadrature counts: n_radial = {n_radial}, n_angular = {n_angular}")]
    InvalidRuleCounts { n_radial: usize, n_angular: usize },

    #[error("Gram matrix not numerically positive definite (condition estimate {cond:.3e} > 1e12); use a larger rule or smaller k")]
    GramNotPositiveDefinite { cond: f64 },

    #[error("rule degree capacity {capacity} below required {required}")]
    RuleCapacity { capacity: usize, required: usize },

    #[error("slope interval [{lo}, {hi}] is empty or reversed")]
    SlopeInterval { lo: f64, hi: f64 },

    #[error("zero coefficient vector")]
    ZeroVector,

    #[error("zero coordinate: support weight needs z in the punctured torus")]
    ZeroCoordinate,

    #[error("polytope vertices are not in convex position or have empty interior")]
    DegeneratePolytope,

    #[error("profile is not convex (second difference {0:.3e} at a sample)")]
    NonConvexProfile(f64),

    #[error("no equilibrium-potential path available for this weight")]
    NoEnvelopePath,

    #[error("point is not interior to the coincidence set")]
    NotInterior,

    #[error("rejection acceptance rate {rate:.3e} below 1e-4; sampling envelope misconfigured")]
    RejectionStalled { rate: f64 },

    #[error("eigenvalue routine failed (LAPACK info = {0})")]
    EigFailure(i32),

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
