use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown kernel id `{0}`")]
    UnknownKernel(String),

    #[error("kernel `{kernel}` has no {what}")]
    MissingEvaluator { kernel: String, what: &'static str },

    #[error("profile `{profile}` is not in the moment class for alpha = {alpha}: {detail}")]
    MomentClass { profile: String, alpha: f64, detail: String },

    #[error("non-positive weight value {value} at x = {x:?}")]
    NonPositiveWeight { x: Vec<f64>, value: f64 },

    #[error("degenerate symbol: |m| = {value:e} < {floor:e} at xi = {frequency:?}")]
    DegenerateSymbol { frequency: Vec<f64>, value: f64, floor: f64 },

    #[error("field is not mean-zero: |f^(0)| = {dc:e} (limit {limit:e}); Riesz-type operators act on fields with vanishing zero-frequency coefficient")]
    NotMeanZero { dc: f64, limit: f64 },

    #[error("empty truncation window: no time nodes in ({lo}, {hi})")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("inverse symbol exceeds dynamic range: amplification {amplification:e} > {limit:e}")]
    DynamicRange { amplification: f64, limit: f64 },

    #[error("empty family")]
    EmptyFamily,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
