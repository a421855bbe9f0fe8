use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("corpus contains no well-formed records")]
    EmptyCorpus,

    #[error("no records for year {0}")]
    NoRecordsForYear(i32),

    #[error("journal not present in matrix: {0}")]
    UnknownJournal(String),

    #[error("seed journal received no citations: {0}")]
    SeedUncited(String),

    #[error("citation environment needs at least 3 members, got {0}")]
    EnvironmentTooSmall(usize),

    #[error("citing pattern of {0} has zero variance")]
    DegenerateVariable(String),

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("factor index {0} out of range (model has {1} factors)")]
    FactorOutOfRange(usize, usize),

    #[error("degenerate embedding: {0}")]
    DegenerateEmbedding(String),

    #[error("all articles excluded: no resolvable country in any address")]
    EmptyAffiliation,

    #[error("label contains a double quote and cannot be written: {0}")]
    UnescapableLabel(String),

    #[error("parse error at line {line}: {msg}")]
    NetParse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("stage input schema mismatch: expected {expected}, got {got}")]
    SchemaMismatch { expected: String, got: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 config, 3 data, 4 numeric degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::SchemaMismatch { .. } => 2,
            Error::DegenerateVariable(_)
            | Error::InvalidCorrelation(_)
            | Error::DegenerateEmbedding(_) => 4,
            _ => 3,
        }
    }
}
