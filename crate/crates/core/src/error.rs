use thiserror::Error;

use crate::vector::ProductVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} products, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A sale exceeded the order-up-to level it was drawn from.
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// The order-up-to level does not dominate the inventory state (`y_t ⪰ x_t` fails).
    #[error("feasibility violation at period {t}: level {level:?} does not dominate state {state:?}")]
    Feasibility {
        t: usize,
        level: ProductVector,
        state: ProductVector,
    },

    /// A transition produced a state above the leftover stock `[y - d]^+`.
    #[error("dynamics violation at period {t}: next state exceeds leftover stock")]
    Dynamics { t: usize },

    #[error("demand source exhausted at period {t}")]
    EndOfData { t: usize },

    #[error("ingestion error at row {row}: {message}")]
    Ingestion { row: usize, message: String },

    #[error("refused: {0}")]
    Refused(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
