use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SimError {
    /// An argument fell outside the domain of a delay or capacity formula.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("empty snapshot: at least one {0} is required")]
    EmptySnapshot(&'static str),

    #[error("enumeration bound exceeded: {name} = {value} > {limit}")]
    BoundExceeded {
        name: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("invalid scenario:\n{0}")]
    InvalidScenario(ValidationReport),

    #[error("unknown scheme {name:?}; valid names: {valid}")]
    UnknownScheme { name: String, valid: String },

    #[error("unknown QoS class {0:?}")]
    UnknownQos(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        SimError::Domain {
            name,
            value,
            reason,
        }
    }
}
