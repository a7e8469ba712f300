use thiserror::Error;

/// Errors raised by parameter validation, the analytic model, and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("OFDM channel spacing must be positive and finite, got {0} Hz")]
    NonPositiveSpacing(f64),
    #[error("number of OFDM bins must be even and at least 2, got {0}")]
    OddBinCount(usize),
    #[error("laser linewidth must be nonnegative, got {name} = {value} Hz")]
    NegativeLinewidth { name: &'static str, value: f64 },
    #[error("{name} must be nonnegative and finite, got {value}")]
    NegativeQuantity { name: &'static str, value: f64 },
    #[error("unsupported modulation: {0}")]
    UnsupportedModulation(String),
    #[error("bin {k} is not a data bin of this system")]
    BinOutOfRange { k: i64 },
    #[error("interfering bin must differ from the victim bin (k = r = {0})")]
    SameBin(i64),
    #[error("phase variance must be nonnegative, got {0}")]
    NegativeVariance(f64),
    #[error("target BER must lie in (0, 0.5), got {0}")]
    TargetOutOfRange(f64),
    #[error("constellation index {index} out of range for {size} points")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("non-finite input sample")]
    NonFiniteInput,
    #[error("grid step must be positive, got {0} s")]
    NonPositiveStep(f64),
    #[error("time {t} s lies outside the path span [0, {span}] s")]
    OutOfSpan { t: f64, span: f64 },
    #[error("no symbol assigned to bin {0}")]
    MissingSymbol(i64),
    #[error("phase path span {have} s is shorter than the required {need} s")]
    SpanTooShort { have: f64, need: f64 },
    #[error("pilot sample {0} has zero magnitude")]
    ZeroPilotSample(usize),
    #[error("sequence length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid simulation setting: {0}")]
    InvalidSetting(String),
}

pub type Result<T> = std::result::Result<T, Error>;
