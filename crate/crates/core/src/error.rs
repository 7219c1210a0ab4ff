use thiserror::Error;

/// Errors raised by the counting library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid margins: {0}")]
    InvalidMargins(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A term, state or node budget was exhausted.
    #[error("budget exceeded: {what} needs more than {limit} (reached {reached})")]
    Budget {
        what: &'static str,
        limit: usize,
        reached: usize,
    },

    #[error("matrix of size {size} exceeds the permanent size limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("numerical rank {rank} of the weight matrix exceeds the bound {bound}")]
    RankBound { rank: usize, bound: usize },

    #[error("surjection sampling gave up after {attempts} attempts")]
    SamplingExhausted { attempts: u64 },
}

impl Error {
    /// True for errors caused by resource caps rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::Budget { .. } | Error::SizeLimit { .. } | Error::SamplingExhausted { .. }
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidMargins(_) => "invalid_margins",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Budget { .. } => "budget_exceeded",
            Error::SizeLimit { .. } => "size_limit",
            Error::RankBound { .. } => "rank_bound",
            Error::SamplingExhausted { .. } => "sampling_exhausted",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
