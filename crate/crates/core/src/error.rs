use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({i}, {j}, {k}) out of bounds for grid {nx}x{ny}x{nz}")]
    Bounds {
        i: usize,
        j: usize,
        k: usize,
        nx: usize,
        ny: usize,
        nz: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A field violates a physical or structural invariant.
    #[error("validation failed for `{field}` at index {index}: {reason}")]
    Validation {
        field: String,
        index: usize,
        reason: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated input: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unknown species `{0}`")]
    UnknownSpecies(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("equivalence ratio {phi} outside flamelet table hull [{lo}, {hi}]")]
    Extrapolation { phi: f64, lo: f64, hi: f64 },

    #[error("placement error: {0}")]
    Placement(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Bounds { .. } => "bounds",
            Error::Shape(_) => "shape",
            Error::Domain(_) => "domain",
            Error::Validation { .. } => "validation",
            Error::Format(_) => "format",
            Error::Truncated { .. } => "truncated",
            Error::UnknownSpecies(_) => "unknown_species",
            Error::Degenerate(_) => "degenerate",
            Error::Extrapolation { .. } => "extrapolation",
            Error::Placement(_) => "placement",
            Error::Io { .. } => "io",
            Error::Manifest(_) => "manifest",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: &str, index: usize, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            index,
            reason: reason.into(),
        }
    }
}
