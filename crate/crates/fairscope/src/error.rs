//! Error type shared by every module of the toolkit.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes the toolkit can report.
///
/// Degenerate inputs raise errors instead of producing silent defaults,
/// so an audit can never pass on a group that was never measured.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input row or document. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Two records share a key that must be unique.
    #[error("duplicate key: {key}")]
    Duplicate { key: String },

    /// A score entry is NaN or infinite.
    #[error("invalid score: {0}")]
    InvalidScore(String),

    /// A score vector's length does not match the active taxonomy.
    #[error("taxonomy mismatch: expected {expected} classes, got {got}")]
    TaxonomyMismatch { expected: usize, got: usize },

    /// A group filter selected no records.
    #[error("empty group: {0}")]
    EmptyGroup(String),

    /// TPR or FPR would divide by zero.
    #[error("undefined rate: group has zero {side} for the class")]
    UndefinedRate { side: &'static str },

    /// A metric table is missing cells required by the operation.
    #[error("incomplete table: {0}")]
    IncompleteTable(String),

    /// The manifest cannot satisfy the requested split.
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    /// Fewer points than clusters.
    #[error("infeasible clustering: {points} points for k={k}")]
    InfeasibleClustering { points: usize, k: usize },

    /// A keyframe segment has fewer candidate frames than its quota.
    #[error("infeasible selection in segment {segment}: {have} candidate frames for quota {need}")]
    InfeasibleSelection {
        segment: String,
        have: usize,
        need: usize,
    },

    /// The bundled fixture failed its checksum.
    #[error("corrupted fixture: checksum {actual} does not match expected {expected}")]
    CorruptedFixture { expected: String, actual: String },

    /// Clip directories must hold at least one decodable frame of uniform size.
    #[error("invalid clip: {0}")]
    InvalidClip(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    /// Wraps a `csv::Error` into a positioned parse error.
    pub fn from_csv(err: csv::Error) -> Error {
        let line = match err.position() {
            Some(pos) => pos.line(),
            None => 0,
        };
        Error::Parse {
            line,
            message: err.to_string(),
        }
    }

    /// Wraps a `serde_json::Error`, keeping the line it points at.
    pub fn from_json(err: serde_json::Error) -> Error {
        Error::Parse {
            line: err.line() as u64,
            message: err.to_string(),
        }
    }
}
