use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or fit failed to reach its tolerance.
    #[error("numerical error: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    /// The augmented tensor left its admissible range during propagation.
    #[error("propagation became unstable at step {step}: {reason}")]
    Instability { step: usize, reason: String },

    /// The requested problem size exceeds what the operation supports.
    #[error("capacity exceeded: {requested} > {limit} ({what})")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// The fitted data shows no decay on the sampled window.
    #[error("no decay: {0}")]
    NoDecay(String),

    /// A threshold was never crossed on the search grid.
    #[error("threshold not reached before grid end {grid_end} ps")]
    Saturation { grid_end: f64 },

    /// A rate vanishes so the associated time is infinite.
    #[error("infinite time: {0}")]
    InfiniteTime(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
