use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input violates a data invariant (non-positive price, unordered timestamps, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Zero (or numerically zero) return variance; such assets must be excluded.
    #[error("degenerate series for asset {asset}: {reason}")]
    Degenerate { asset: String, reason: String },

    #[error("insufficient data: need at least {needed} {what}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    /// The design matrix does not have full column rank.
    #[error("singular fit: feature `{feature}` is collinear with earlier features or constant")]
    SingularFit { feature: &'static str },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("duplicate entry: {0}")]
    Duplicate(String),
}
