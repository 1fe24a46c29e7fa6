use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series too short: need more than {required} samples, have {available}")]
    SeriesTooShort { required: usize, available: usize },

    #[error("invalid split: train {train} + test {test} exceeds series length {len}")]
    InvalidSplit { train: usize, test: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("k = {k} too large for {available} candidate points")]
    KTooLarge { k: usize, available: usize },

    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("too few samples: {n} (need more than {min})")]
    TooFewSamples { n: usize, min: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("zero probability estimate at sample {0}")]
    ZeroProbability(usize),

    #[error("MASE undefined: training signal has zero random-walk error")]
    ZeroDenominator,

    #[error("no valid neighbors remain after temporal exclusion")]
    NoValidNeighbors,

    #[error("all grid cells failed")]
    AllCellsFailed,

    #[error("insufficient cells: {have} (need at least {need})")]
    InsufficientCells { have: usize, need: usize },

    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: usize, text: String },

    #[error("line {line}: non-finite value")]
    NonFiniteLine { line: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of the numerics rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteState { .. }
                | Error::DegenerateData(_)
                | Error::ZeroProbability(_)
                | Error::ZeroDenominator
                | Error::NoValidNeighbors
                | Error::AllCellsFailed
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
