use thiserror::Error;

/// Errors surfaced by the library.
///
/// Every variant maps to a stable `module:Kind` code (see [`Error::code`])
/// that the CLI prints verbatim so callers can match on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate entity id {0:?}")]
    DuplicateId(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row}: cannot parse field {field:?}")]
    Field { row: usize, field: String },
    #[error("unknown entity id {0:?}")]
    DanglingReference(String),
    #[error("pair ({0}, {1}) labeled both positive and negative")]
    ConflictingLabel(String, String),
    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("feature {0:?} has no present values")]
    DegenerateFeature(&'static str),
    #[error("training labels are all identical")]
    DegenerateLabels,
    #[error("training failed: {0}")]
    TrainingFailure(String),

    #[error("invalid scored graph: {0}")]
    InvalidGraph(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Module-qualified, machine-parseable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateId(_) => "model:DuplicateId",
            Error::Schema(_) => "model:SchemaError",
            Error::Field { .. } => "model:FieldError",
            Error::DanglingReference(_) => "model:DanglingReference",
            Error::ConflictingLabel(..) => "model:ConflictingLabel",
            Error::FileNotFound(_) => "model:FileNotFound",
            Error::DegenerateFeature(_) => "combiner:DegenerateFeature",
            Error::DegenerateLabels => "combiner:DegenerateLabels",
            Error::TrainingFailure(_) => "combiner:TrainingFailure",
            Error::InvalidGraph(_) => "matchers:InvalidGraph",
            Error::InstanceTooLarge(_) => "matchers:InstanceTooLarge",
            Error::Config(_) => "synth:ConfigError",
            Error::Io(_) => "io:IoError",
            Error::Csv(_) => "io:CsvError",
            Error::Json(_) => "io:JsonError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
