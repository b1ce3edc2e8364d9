use thiserror::Error;

/// Errors raised by the channel, rate and optimizer layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("transmitter and receiver are co-located")]
    ZeroDistance,

    #[error("normal vector is not unit length (norm = {0})")]
    NonUnitNormal(f64),

    #[error("mixture would have {components} components, above the cap of {cap}")]
    ComponentCap { components: u128, cap: usize },

    #[error("quadrature grid [{lo}, {hi}] does not cover mean {mean} +/- 6 sigma")]
    GridCoverage { lo: f64, hi: f64, mean: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidPmf(String),

    #[error("zero-forcing is infeasible: {0}")]
    ZfInfeasible(String),

    #[error("every firefly has NaN brightness")]
    AllNan,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
