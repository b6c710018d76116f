//! The learned weight file: the nine named weights plus the normalization
//! statistics they were learned against, as JSON.
//!
//! ```json
//! {
//!   "weights": { "entry_zone": 0.2, "exit_zone": 0.1, ..., "direction_changes": 0.05 },
//!   "normalization": {
//!     "mean": { "lifetime": 21.5, "length": 26.0, "lost_count": 0.3, "neighbor_sum": 0.4, "direction_changes": 1.2 },
//!     "std_dev": { ... },
//!     "trained_on": 300
//!   },
//!   "fitness": 17.8,
//!   "converged": false,
//!   "generations": 100
//! }
//! ```

use serde::{Deserialize, Serialize};
use trackmend_core::{NormalizationStats, WeightVector};

use crate::error::{FormatError, Result};

/// Weight names, feature 1 first.
pub const FEATURE_NAMES: [&str; 9] = [
    "entry_zone",
    "exit_zone",
    "lifetime",
    "length",
    "person_rate",
    "lost_count",
    "neighbor_sum",
    "size_change_rate",
    "direction_changes",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedWeights {
    entry_zone: f64,
    exit_zone: f64,
    lifetime: f64,
    length: f64,
    person_rate: f64,
    lost_count: f64,
    neighbor_sum: f64,
    size_change_rate: f64,
    direction_changes: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StandardizedValues {
    lifetime: f64,
    length: f64,
    lost_count: f64,
    neighbor_sum: f64,
    direction_changes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Normalization {
    mean: StandardizedValues,
    std_dev: StandardizedValues,
    trained_on: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    weights: NamedWeights,
    normalization: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generations: Option<usize>,
}

/// Contents of a weight file.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsFile {
    pub weights: WeightVector,
    pub stats: NormalizationStats,
    /// Training fitness of `weights`, if known.
    pub fitness: Option<f64>,
    pub converged: Option<bool>,
    pub generations: Option<usize>,
}

impl From<[f64; 5]> for StandardizedValues {
    fn from(v: [f64; 5]) -> Self {
        Self { lifetime: v[0], length: v[1], lost_count: v[2], neighbor_sum: v[3], direction_changes: v[4] }
    }
}

impl From<StandardizedValues> for [f64; 5] {
    fn from(v: StandardizedValues) -> Self {
        [v.lifetime, v.length, v.lost_count, v.neighbor_sum, v.direction_changes]
    }
}

impl WeightsFile {
    pub fn to_json(&self) -> String {
        let w = self.weights.as_array();
        let doc = Document {
            weights: NamedWeights {
                entry_zone: w[0],
                exit_zone: w[1],
                lifetime: w[2],
                length: w[3],
                person_rate: w[4],
                lost_count: w[5],
                neighbor_sum: w[6],
                size_change_rate: w[7],
                direction_changes: w[8],
            },
            normalization: Normalization {
                mean: self.stats.mean.into(),
                std_dev: self.stats.std_dev.into(),
                trained_on: self.stats.trained_on,
            },
            fitness: self.fitness,
            converged: self.converged,
            generations: self.generations,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
        text.push('\n');
        text
    }

    /// Parses and validates: weights must be finite, non-negative and sum
    /// to 1; standard deviations must be non-negative.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        let n = doc.weights;
        let raw = [
            n.entry_zone,
            n.exit_zone,
            n.lifetime,
            n.length,
            n.person_rate,
            n.lost_count,
            n.neighbor_sum,
            n.size_change_rate,
            n.direction_changes,
        ];
        let weights = WeightVector::new(raw).map_err(|e| FormatError::Weights(e.to_string()))?;
        let mean: [f64; 5] = doc.normalization.mean.into();
        let std_dev: [f64; 5] = doc.normalization.std_dev.into();
        if !mean.iter().chain(&std_dev).all(|v| v.is_finite()) || std_dev.iter().any(|s| *s < 0.0) {
            return Err(FormatError::Weights("normalization needs finite means and non-negative standard deviations".into()));
        }
        Ok(Self {
            weights,
            stats: NormalizationStats { mean, std_dev, trained_on: doc.normalization.trained_on },
            fitness: doc.fitness,
            converged: doc.converged,
            generations: doc.generations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WeightsFile {
        WeightsFile {
            weights: WeightVector::normalized([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]).unwrap(),
            stats: NormalizationStats { mean: [1.5, 2.0, 0.25, 3.0, 1.0], std_dev: [0.5, 1.0, 0.0, 2.0, 0.1], trained_on: 300 },
            fitness: Some(12.5),
            converged: Some(true),
            generations: Some(17),
        }
    }

    #[test]
    fn round_trip() {
        let f = sample();
        let text = f.to_json();
        assert_eq!(WeightsFile::from_json(&text).unwrap(), f);
        for name in FEATURE_NAMES {
            assert!(text.contains(&format!("\"{name}\"")));
        }
    }

    #[test]
    fn rejects_weights_not_summing_to_one() {
        let text = sample().to_json();
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        for name in FEATURE_NAMES {
            doc["weights"][name] = serde_json::json!(0.5 / 9.0);
        }
        let err = WeightsFile::from_json(&doc.to_string()).unwrap_err();
        assert!(matches!(err, FormatError::Weights(_)), "{err}");
        assert!(err.to_string().contains("0.5"), "{err}");
    }

    #[test]
    fn rejects_missing_and_unknown_keys() {
        let text = sample().to_json();
        assert!(WeightsFile::from_json(&text.replace("\"entry_zone\"", "\"entry\"")).is_err());
        assert!(WeightsFile::from_json("{}").is_err());
    }
}
