use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("sensor index {index} out of range for a network of {len} sensors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("transmit time of sensor {sensor} is zero; the Hessian is undefined there")]
    Boundary { sensor: usize },

    #[error("{what} supports at most {max} sensors, got {found}")]
    UnsupportedDimension {
        what: &'static str,
        max: usize,
        found: usize,
    },

    #[error("backscatter-only policy cannot meet the energy floor of sensor {sensor}")]
    InfeasibleUnderBackscatterOnly { sensor: usize },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
