use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The ranked list contains no gallery item sharing the query identity.
    #[error("query is unscorable: no matched entry in the ranked list")]
    Unscorable,

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: schema violation in field `{field}`: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        field: &'static str,
        message: String,
    },

    #[error("duplicate id `{id}`{}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    DuplicateId { id: String, line: Option<usize> },

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("embedding file: {0}")]
    Format(#[from] FormatError),

    #[error("dimension mismatch: query dim {query}, gallery dim {gallery}")]
    DimensionMismatch { query: usize, gallery: usize },

    #[error("zero-norm vector in {table} table at row {row}")]
    ZeroNorm { table: &'static str, row: usize },

    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("text has no tokens")]
    NoTokens,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

/// Structural problems with a binary embedding file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"UFEB\"")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u16),
    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),
    #[error("reserved header byte is {0}, expected 0")]
    Reserved(u8),
    #[error("table declares zero rows")]
    EmptyTable,
    #[error("table declares zero dimension")]
    ZeroDimension,
    #[error("truncated: need {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(u64),
    #[error("id block is not a JSON array of strings: {0}")]
    BadIds(String),
    #[error("id count {ids} does not match row count {rows}")]
    IdCountMismatch { ids: usize, rows: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("header sizes overflow addressable memory")]
    Overflow,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from bad user input rather than a bug or
    /// environment failure. Drives the CLI exit code (1 vs 2).
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}
