//! Post-processing for multi-object tracking output.
//!
//! The crate scores how trustworthy a trajectory is from nine hand-crafted
//! features and a learned weight vector, learns where in a scene tracks are
//! habitually lost and re-found, and uses those zones to stitch a lost track
//! back onto the anonymous track that re-appears a little later.
//!
//! The pipeline, in module order:
//!
//! 1. [`features`]: raw feature extraction and z-score normalization.
//! 2. [`confidence`]: the weighted confidence value and the four trajectory classes.
//! 3. [`ga`]: a genetic algorithm that learns the nine weights from labelled trajectories.
//! 4. [`zones`]: k-means / Gaussian-mixture clustering of lost and found positions.
//! 5. [`triplets`]: (start, lost, found) zone triplets with transit-time windows.
//! 6. [`repair`]: matching re-appearing tracks against lost ones and fusing them.
//!
//! [`synth`] generates synthetic scenes with injected tracking faults and
//! known ground truth.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line live in the companion `trackmend` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod confidence;
pub mod error;
pub mod features;
pub mod ga;
pub mod model;
pub mod repair;
pub mod synth;
pub mod triplets;
pub mod zones;

pub use confidence::{classify, confidence_value, Scorer, TrajectoryClass, WeightVector};
pub use error::{Error, Result};
pub use features::{FeatureConfig, FeatureVector, NormalizationStats, RawFeatureVector};
pub use model::{
    ClassLabel, EventKind, GroundPoint, Observation, SceneModel, TrackEvent, TrackId, Trajectory,
    Zone, ZoneKind,
};
pub use triplets::ZoneTriplet;
