use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    NumericFailure(String),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    /// The Jacobian of a Newton problem is numerically singular.
    #[error("nondegeneracy failure: {0}")]
    Nondegeneracy(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("integral index {index} out of range (s = {count})")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    BlowUp { t: f64 },

    #[error("degenerate torus: {0}")]
    DegenerateTorus(String),

    #[error("degenerate point: {0}")]
    DegeneratePoint(String),

    #[error("chart overflow: {0}")]
    ChartOverflow(String),

    #[error("singular frequency matrix (|A| = {det:e})")]
    SingularFrequencyMatrix { det: f64 },

    #[error("grid geometry: {0}")]
    Geometry(String),

    #[error("invalid model specification: {0}")]
    Spec(String),

    #[error("oracle query not supported: {0}")]
    UnsupportedOracle(String),

    #[error("system self-test failed: {0}")]
    SelfTest(String),
}
