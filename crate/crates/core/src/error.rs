use thiserror::Error;

/// Errors raised by the arithmetic, series and checker layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A p-adic value ran out of guaranteed digits.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// A division that must be exact was not, or a coefficient left its
    /// localized ring.
    #[error("integrality violation: {0}")]
    Integrality(String),

    /// The leading part of a series is not a unit.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// No rational of the requested height matches the residues.
    #[error("rational reconstruction failed: {0}")]
    Reconstruction(String),

    /// A jet order exceeded the budget of the ring it lives in.
    #[error("order budget exceeded: {0}")]
    OrderBudget(String),

    /// Required input data was not supplied.
    #[error("missing data: {0}")]
    Missing(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::PrecisionExhausted(_) => "precision_exhausted",
            Error::Integrality(_) => "integrality_violation",
            Error::NotInvertible(_) => "not_invertible",
            Error::Reconstruction(_) => "reconstruction_failed",
            Error::OrderBudget(_) => "order_budget_exceeded",
            Error::Missing(_) => "missing_data",
            Error::Parse(_) => "parse_error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
