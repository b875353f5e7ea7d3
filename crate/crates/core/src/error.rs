use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("header line {line}: {msg}")]
    Header { line: usize, msg: String },

    #[error("unsupported storage format {0} (only format 212 is supported)")]
    UnsupportedFormat(u16),

    #[error("format 212: {0}")]
    Format212(String),

    #[error("annotation stream: {0}")]
    Annotation(String),

    #[error("checksum mismatch on channel {channel}: header {expected}, computed {actual}")]
    Checksum {
        channel: usize,
        expected: i16,
        actual: i16,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("config: {0}")]
    Config(String),

    #[error("training: {0}")]
    Training(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short stable name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Header { .. } => "header",
            Error::UnsupportedFormat(_) => "unsupported-format",
            Error::Format212(_) => "format212",
            Error::Annotation(_) => "annotation",
            Error::Checksum { .. } => "checksum",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::InvalidInput(_) => "invalid-input",
            Error::Shape(_) => "shape",
            Error::Config(_) => "config",
            Error::Training(_) => "training",
            Error::Stage { source, .. } => source.kind(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
