use crate::model::TrackId;

/// Errors raised while validating domain values or running a learning stage.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("trajectory {id}: {reason}")]
    InvalidTrajectory { id: TrackId, reason: &'static str },

    #[error("zone {ident}: {reason}")]
    InvalidZone { ident: u32, reason: &'static str },

    #[error("duplicate zone ident {0}")]
    DuplicateZoneIdent(u32),

    #[error("weights must be non-negative and sum to 1 (got sum {sum})")]
    InvalidWeights { sum: f64 },

    #[error("ground truth value {value} at entry {index} is outside [0, 1]")]
    InvalidGroundTruth { index: usize, value: f64 },

    #[error("{0} requires at least one input")]
    Empty(&'static str),

    #[error("cannot fit {k} clusters to {points} points")]
    TooManyClusters { k: usize, points: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
