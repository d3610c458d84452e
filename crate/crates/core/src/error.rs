//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    Data,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("{source_name}:{line}: duplicate course number `{course}`")]
    DuplicateCourse {
        source_name: String,
        line: u64,
        course: String,
    },

    #[error("{source_name}:{line}: invalid grade `{value}` (expected one of EX, A, B, C, D, P, F or blank)")]
    InvalidGrade {
        source_name: String,
        line: u64,
        value: String,
    },

    #[error("{source_name}:{line}: preceding CGPA {value} outside [0, 10]")]
    CgpaRange {
        source_name: String,
        line: u64,
        value: f64,
    },

    #[error("value {value} outside the valid range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("LSA rank {requested} exceeds the maximum {max} for this corpus")]
    Rank { requested: usize, max: usize },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("catalog is empty")]
    EmptyCatalog,

    #[error("unknown course `{0}`")]
    UnknownCourse(String),

    #[error("{source_name}:{line}: {message}")]
    Lexicon {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("matrix file: bad magic bytes")]
    BadMagic,

    #[error("matrix file: unsupported format version {0}")]
    Version(u8),

    #[error("matrix file: truncated ({0})")]
    Truncated(&'static str),

    #[error("matrix file: checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    Checksum { stored: u32, computed: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible synthetic configuration: {0}")]
    Synth(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Config(_) | Error::Synth(_) => ErrorKind::Usage,
            Error::Precondition(_) => ErrorKind::Internal,
            _ => ErrorKind::Data,
        }
    }
}
