use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("configuration leaves no payload: {0}")]
    Infeasible(String),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cyclic prefix of {n_cp} samples out of range for a {len}-sample block")]
    CpOutOfRange { n_cp: usize, len: usize },
    #[error("tap delay of {delay} samples is not below the {limit}-sample limit")]
    DelayOutOfRange { delay: usize, limit: usize },
    #[error("window has a zero entry and cannot be removed")]
    SingularWindow,
    #[error("signal has zero power, SNR is undefined")]
    ZeroPower,
    #[error("unsupported modulation order {0}")]
    UnsupportedOrder(u32),
    #[error("data present inside the pilot guard region at bin ({0}, {1})")]
    GuardViolation(usize, usize),
    #[error("no pilot response above the detection threshold")]
    EstimationFailed,
    #[error("noise variance must be positive")]
    NonPositiveNoise,
    #[error("length {len} is not divisible by {rows} interleaver rows")]
    NotDivisible { len: usize, rows: usize },
    #[error("zero pilot value at subcarrier {0}, symbol {1}")]
    ZeroPilot(usize, usize),
    #[error("input too short: need {need} samples, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("empty input")]
    Empty,
}

pub type Result<T> = core::result::Result<T, Error>;
