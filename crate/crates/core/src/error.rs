use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Outcome of one construction attempt, kept for diagnostics when the
/// retune budget runs out.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AttemptSummary {
    pub attempt: usize,
    pub epsilon: f64,
    pub beta: f64,
    /// `rho((I - Ybar) A)`, if the attempt got far enough to compute it.
    pub rho_virus1: Option<f64>,
    /// `rho((I - Xbar) B)`, if the attempt got far enough to compute it.
    pub rho_virus2: Option<f64>,
    pub failure: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("matrix reducible: {} strongly connected components {components:?}", components.len())]
    Reducible { components: Vec<Vec<usize>> },

    #[error("spectral radius {rho} does not exceed 1 (no endemic equilibrium)")]
    Subthreshold { rho: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("not a nonsingular M-matrix: {0}")]
    NotMMatrix(String),

    #[error("state outside the feasible set at node {node}: {detail}")]
    OutsideState { node: usize, detail: String },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("z placement violated: z[{col}] < 0 but a[{row}][{col}] = 0")]
    Placement { row: usize, col: usize },

    #[error("epsilon {epsilon} exceeds nonnegativity bound {bound} set by entry ({row}, {col})")]
    EpsilonTooLarge {
        epsilon: f64,
        bound: f64,
        row: usize,
        col: usize,
    },

    #[error("z is not orthogonal to the endemic equilibrium (z^T x = {0:e})")]
    NotOrthogonal(f64),

    #[error("left eigenvectors are numerically parallel (best ratio separation {0:e})")]
    ParallelEigenvectors(f64),

    #[error("sign condition failed: u~^T s = {u_margin:e}, v~^T s = {v_margin:e}")]
    SignCondition { u_margin: f64, v_margin: f64 },

    #[error("retune budget exhausted after {} attempts", attempts.len())]
    RetuneExhausted { attempts: Vec<AttemptSummary> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
