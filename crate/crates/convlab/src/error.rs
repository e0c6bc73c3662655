use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {achieved:.3e} exceeds tolerance {required:.3e}")]
    Quadrature { achieved: f64, required: f64 },

    /// Leverage optimization with gamma = 0: utility is linear in L, so the
    /// growth-optimal investor has no finite optimum for threshold rules.
    #[error("unbounded leverage: utility is linear in leverage when gamma = 0")]
    UnboundedLeverage,

    /// The operation is only defined for a subset of policy kinds.
    #[error("unsupported policy: {0}")]
    UnsupportedPolicy(&'static str),

    /// A regression or statistic cannot be formed from the given series.
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// The pair density of the process diverges at zero lag.
    #[error("singular at tau = 0: the two-time density has no zero-lag limit")]
    SingularLag,

    /// A data file failed validation; `line` is the 1-based line number.
    #[error("line {line}: {reason}")]
    Ingestion { line: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
