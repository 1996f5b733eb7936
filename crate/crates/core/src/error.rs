use thiserror::Error;

/// Errors raised by the solver and its oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpdgError {
    #[error("invalid gas model: kappa = {kappa}, gamma = {gamma}")]
    InvalidGasModel { kappa: f64, gamma: f64 },

    #[error("specific volume must be positive, got {0}")]
    NonPositiveVolume(f64),

    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),

    #[error("unsupported polynomial degree {0} (supported: 1..=8)")]
    UnsupportedDegree(usize),

    #[error("node index {index} out of range for degree {degree}")]
    NodeIndex { index: usize, degree: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("inadmissible state in element {element}, node {node}: {what} = {value}")]
    Inadmissible {
        element: usize,
        node: usize,
        what: &'static str,
        value: f64,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("subcharacteristic condition violated: a = {a}, required > {required}")]
    Subcharacteristic { a: f64, required: f64 },

    #[error("subcharacteristic retries exhausted after {retries} doublings of a")]
    RetriesExhausted { retries: usize },

    #[error("mean density {mean} in element {element} does not exceed eps = {eps}")]
    MeanInadmissible { element: usize, mean: f64, eps: f64 },

    #[error("entropy limiter root solve did not converge in element {element}")]
    RootSolve { element: usize },

    #[error("vacuum forms in the exact Riemann solution")]
    Vacuum,

    #[error("nonlinear iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, LpdgError>;
