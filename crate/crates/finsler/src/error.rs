//! Crate-wide error type. Numerical failures carry the offending magnitude so
//! callers (and test logs) can see how badly an input missed its contract.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("jet order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("partial-derivative degree {degree} exceeds jet order {order}")]
    DegreeExceedsOrder { degree: usize, order: usize },

    #[error("jet arithmetic on mismatched shapes ({0} vs {1} variables)")]
    ShapeMismatch(usize, usize),

    #[error("jet division by a jet with zero constant term")]
    DivisionByZeroJet,

    #[error("jet {func} requires a positive constant term, got {value:.3e}")]
    BadFunctionDomain { func: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("element outside kernel domain: {0}")]
    OutOfDomain(String),

    #[error("fundamental tensor not positive definite (smallest eigenvalue {min_eigen:.3e})")]
    NotPositiveDefinite { min_eigen: f64 },

    #[error("linearly dependent input vectors (pivot norm {pivot:.3e})")]
    DependentVectors { pivot: f64 },

    #[error("singular matrix in tensor assembly (pivot {pivot:.3e})")]
    SingularMatrix { pivot: f64 },

    #[error("degenerate flag: span denominator {denominator:.3e} below 1e-12")]
    DegenerateFlag { denominator: f64 },

    #[error("frame is not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("vector is not tangent to the submanifold (normal component {magnitude:.3e})")]
    NotTangent { magnitude: f64 },

    #[error("vector is not normal to the submanifold (tangential component {magnitude:.3e})")]
    NotNormal { magnitude: f64 },

    #[error("immersion is rank-deficient at this parameter point")]
    RankDeficient,

    #[error("geodesic left the kernel domain at t = {t:.6}")]
    DomainExit { t: f64 },

    #[error("invalid spec: {0}")]
    Spec(String),

    #[error("spec JSON: {0}")]
    SpecJson(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
