use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("input too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("non-positive or non-finite price {price} at position {index}")]
    NonPositivePrice { index: usize, price: f64 },

    #[error("tick timestamps decrease at record {index}")]
    UnsortedTicks { index: usize },

    #[error("no ticks on {0}")]
    EmptyDay(NaiveDate),

    #[error("no tick at or before the session open on {0}")]
    NoPriceBeforeOpen(NaiveDate),

    #[error("invalid grid spec: {0}")]
    InvalidGridSpec(String),

    #[error("kernel denominator vanishes at lambda = {0}")]
    SingularLambda(f64),

    #[error("aggregation level q must be at least 1, got {0}")]
    InvalidAggregation(usize),

    #[error("degenerate day: one-period return variance is zero")]
    DegenerateDay,

    #[error("dates must be strictly increasing (violated at {0})")]
    UnorderedDates(NaiveDate),

    #[error("non-positive realized variance on {0}")]
    NonPositiveRv(NaiveDate),

    #[error("insufficient history: need {needed} prior observations, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("design matrix is rank deficient (column {column} is collinear with earlier columns)")]
    RankDeficient { column: usize },

    #[error("too few rows: {rows} rows for {cols} columns")]
    TooFewRows { rows: usize, cols: usize },

    #[error("misaligned series: {0}")]
    Alignment(String),

    #[error("series of length {len} is shorter than the rolling window {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("invalid confidence level {0}; must lie in (0, 1)")]
    InvalidLevel(f64),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
