use crate::spectrum::MultiIndex;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("box cardinality {cardinality} exceeds enumeration cap {cap}")]
    CapExceeded { cardinality: u128, cap: u128 },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("tau[{index}] is zero; folding sequences must have nonzero entries")]
    ZeroTau { index: usize },

    #[error("empty sequence")]
    Empty,

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("folding collision at beta = {beta}: {a} and {b} map to the same frequency")]
    Collision { beta: i128, a: MultiIndex, b: MultiIndex },

    #[error("certified grid needs {required:?} samples per axis ({total} total), over the budget of {budget} points")]
    GridBudget {
        required: Vec<usize>,
        total: u128,
        budget: u128,
    },

    #[error("folding sequence fails the growth condition at index {index}")]
    NotAdmissible { index: usize },

    #[error("spectrum support outside the declared box: {0}")]
    SupportOutsideBox(MultiIndex),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
