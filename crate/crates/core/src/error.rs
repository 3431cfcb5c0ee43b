use std::path::PathBuf;

use thiserror::Error;

/// Failures raised by the metric computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("trajectory span is too short for the requested operation")]
    EmptySpan,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("duration must be positive")]
    ZeroDuration,
    #[error("inconsistent flags: {0}")]
    InconsistentFlags(String),
    #[error("no sample moves faster than the stationary cutoff")]
    AllStationary,
    #[error("sampling interval {max_gap_s:.4} s exceeds the 10 Hz floor inside the collision window")]
    RateTooLow { max_gap_s: f64 },
    #[error("collision time {t_c} s lies outside the trajectory span [{start}, {end}]")]
    CollisionOutsideSpan { t_c: f64, start: f64, end: f64 },
    #[error("trial {0} has no category for the requested table")]
    MissingCategory(String),
    #[error("threshold probability must lie strictly between 0 and 1, got {0}")]
    InvalidP0(f64),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("duplicate target id {0}")]
    DuplicateTarget(String),
    #[error("frame rate must be positive")]
    ZeroFps,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("count {count} out of range 0..={total}")]
    CountOutOfRange { count: usize, total: usize },
    #[error("need at least 3 matched fiducials, got {0}")]
    TooFewFiducials(usize),
    #[error("feature {feature}: token {token:?} has no ordinal rank")]
    UnmappedToken { feature: String, token: String },
    #[error("feature {feature} of {system}: encoded value {value} is not positive")]
    NonPositiveValue {
        feature: String,
        system: String,
        value: f64,
    },
    #[error("weighted product needs positive values, got {0}")]
    DomainError(f64),
    #[error("SEEV parameter {field} of {se} must be positive")]
    NonPositiveParam { se: String, field: &'static str },
    #[error("cannot fit a line through points that share one rate")]
    DegenerateFit,
    #[error("no rule fired for inputs {0}")]
    NoRuleFired(String),
    #[error("ideal score is zero")]
    ZeroDenominator,
    #[error("every test score is missing")]
    AllTestsMissing,
    #[error("test {0} has a non-positive score")]
    NonPositiveScore(String),
    #[error("condition {0} has no responses")]
    EmptyCondition(String),
    #[error("nothing to plot")]
    EmptyData,
    #[error("row {row} has {got} cells, header has {expected}")]
    SchemaMismatch {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("timestamps must be strictly increasing (sample {0})")]
    NonMonotonicTime(usize),
}

/// Failures raised while reading files from disk.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: line {line}: time does not increase")]
    NonMonotonicTime { path: PathBuf, line: usize },
    #[error("{path}: line {line}: field {field} is not a number")]
    NonNumericField {
        path: PathBuf,
        line: usize,
        field: String,
    },
    #[error("unknown category {0}")]
    UnknownCategory(String),
    #[error("dangling reference {0}")]
    DanglingReference(String),
    #[error("unsupported schema_version {0}")]
    SchemaVersionUnsupported(String),
    #[error("telemetry file {0} does not exist")]
    MissingTelemetry(PathBuf),
    #[error("{path}: line {line}: score {score} outside 1..=7")]
    ScoreOutOfRange {
        path: PathBuf,
        line: usize,
        score: i64,
    },
    #[error("unknown instrument {0}")]
    UnknownInstrument(String),
    #[error("feature {0} has no direction")]
    MissingDirection(String),
    #[error("term {variable}.{term}: tuple {tuple:?} is not ordered a <= b <= c inside the range")]
    MalformedTuple {
        variable: String,
        term: String,
        tuple: Vec<f64>,
    },
    #[error("rule {rule} in {fis}: unknown term or variable {what}")]
    UnknownTerm {
        fis: String,
        rule: usize,
        what: String,
    },
    #[error("cascade has a cycle through {0}")]
    CyclicCascade(String),
    #[error("{path}: line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Invalid(#[from] Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
