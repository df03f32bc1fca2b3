use thiserror::Error;

use crate::sica::SicaVerdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate slot {0}")]
    DuplicateSlot(u64),

    #[error("slot {0} is missing; slots must form a contiguous range starting at 0")]
    MissingSlot(u64),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("Sica's condition does not hold ({} witness(es))", .0.witnesses.len())]
    SicaViolated(Box<SicaVerdict>),

    #[error(
        "quarter {quarter} needs {required} discarded slot(s) but the discard budget is {budget}"
    )]
    Unbalanced {
        quarter: &'static str,
        required: usize,
        budget: usize,
    },

    #[error("enumeration needs {required} tables but the budget is {budget}")]
    Budget { required: u128, budget: u64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the input (bad data, violated preconditions)
    /// rather than by the environment.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
