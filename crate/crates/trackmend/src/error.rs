use thiserror::Error;

/// Errors from reading or writing the text formats. Positions are 1-based
/// line numbers in the offending document.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported zone kind property `{property}`")]
    UnsupportedZoneKind { line: usize, property: String },
    #[error("line {line}: {source}")]
    Geometry { line: usize, source: trackmend_core::Error },
    #[error("line {line}: trajectory {id}: {message}")]
    Trajectory { line: usize, id: u64, message: String },
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FormatError>;

/// 1-based line containing byte `offset` of `text`.
pub(crate) fn line_at(text: &str, offset: usize) -> usize {
    let end = offset.min(text.len());
    1 + text.as_bytes()[..end].iter().filter(|b| **b == b'\n').count()
}
