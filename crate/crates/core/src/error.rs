use std::path::PathBuf;

use thiserror::Error;

use crate::rules::WorkerClass;

/// Every failure the library can report.
///
/// Variants fall in two families: input problems (bad tables, bad
/// configuration, unreadable files) and numerical failures (non-converging
/// integrals, no crossing found). [`Error::is_numerical`] tells them apart,
/// which is what the command-line exit code is derived from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("life table is empty")]
    EmptyTable,

    #[error("lx increases at age {age}: {prev} -> {next}")]
    NonMonotoneLx { age: u32, prev: f64, next: f64 },

    #[error("lx must be strictly positive at the start age {age}, got {value}")]
    NonPositiveRadix { age: u32, value: f64 },

    #[error("invalid lx value {value} at age {age}")]
    InvalidLx { age: u32, value: f64 },

    #[error("cannot close the table: no survivors at the open age {age}")]
    CannotClose { age: u32 },

    #[error("terminal death rate must be positive and finite, got {0}")]
    InvalidTerminalRate(f64),

    #[error("open age {open_age} is inconsistent with {len} lx values")]
    InvalidOpenAge { open_age: u32, len: usize },

    #[error("age {age} outside table range {start}..={open}")]
    AgeOutOfRange { age: f64, start: u32, open: u32 },

    #[error("invalid mortality parameters: {0}")]
    InvalidParams(String),

    #[error("invalid mortality data: {0}")]
    InvalidData(String),

    #[error("mortality data is empty")]
    EmptyData,

    #[error("fit needs at least {need} age cells, got {got}")]
    TooFewCells { got: usize, need: usize },

    #[error("all death counts are zero; nothing to fit")]
    NoDeaths,

    #[error("life expectancy integral diverges at age {age}: {reason}")]
    DivergentIntegral { age: f64, reason: String },

    #[error("quadrature failed to reach tolerance: {0}")]
    Quadrature(String),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("benefit floor {floor} exceeds ceiling {ceiling}")]
    FloorAboveCeiling { floor: f64, ceiling: f64 },

    #[error("transition months must lie in 0..=60, got {0}")]
    TransitionMonths(i64),

    #[error("no points thresholds configured for year {0}")]
    NoPointsForYear(i32),

    #[error("{class} is not eligible: effective contribution time {ect} below the minimum {min}")]
    Ineligible { class: WorkerClass, ect: f64, min: f64 },

    #[error("entry age {entry} is below the minimum labour-market entry age {min}")]
    EntryAgeTooLow { entry: f64, min: f64 },

    #[error("no retirement-age crossing below age {limit}: {detail}")]
    NoCrossing { limit: f64, detail: String },

    #[error("no mortality source for table year {table_year} (ssf year {ssf_year}); known table years: {known:?}")]
    MissingVintage { ssf_year: i32, table_year: i32, known: Vec<i32> },

    #[error("invalid rule configuration: {0}")]
    Config(String),

    #[error("{path}: missing column {column}")]
    MissingColumn { path: String, column: String },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DivergentIntegral { .. } | Error::Quadrature(_) | Error::NoCrossing { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
