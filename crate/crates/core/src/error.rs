use alloc::string::String;

/// Everything that can go wrong while building or running a model.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("cell pair (k={k}, l={l}) is not valid for n={n}: need 1 <= l < k <= n")]
    BadPair { k: usize, l: usize, n: usize },

    #[error("at least two cells are required, got {0}")]
    TooFewCells(usize),

    #[error("all cell voltages are equal; there is no pair to equalize")]
    NoPair,

    #[error("unknown topology `{0}`")]
    UnknownTopology(String),

    #[error("efficiency fixed point did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("netlist: {0}")]
    Netlist(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
