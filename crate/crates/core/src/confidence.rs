//! Trajectory confidence value and the four trajectory classes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::{extract_raw, normalize, FeatureConfig, FeatureVector, NormalizationStats};
use crate::model::{SceneModel, Trajectory};

pub const DEFAULT_NOISE_THRESHOLD: f64 = 0.2;
pub const DEFAULT_COMPLETE_THRESHOLD: f64 = 0.8;

const SUM_TOLERANCE: f64 = 1e-9;

/// Nine non-negative feature weights summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector([f64; 9]);

impl WeightVector {
    pub fn new(w: [f64; 9]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidWeights { sum });
        }
        Ok(Self(w))
    }

    /// Divides every entry by the sum. Fails if the sum is not positive.
    pub fn normalized(w: [f64; 9]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || sum <= 0.0 {
            return Err(Error::InvalidWeights { sum });
        }
        Ok(Self(w.map(|v| v / sum)))
    }

    pub fn uniform() -> Self {
        Self([1.0 / 9.0; 9])
    }

    /// Weight of feature `i` (1-based).
    pub fn get(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn as_array(&self) -> &[f64; 9] {
        &self.0
    }
}

/// Weighted sum of the direct features 1..=5 plus the complements of the
/// inverse features 6..=9.
pub fn confidence_value(f: &FeatureVector, w: &WeightVector) -> f64 {
    let direct: f64 = (0..5).map(|i| w.0[i] * f.0[i]).sum();
    let inverse: f64 = (5..9).map(|i| w.0[i] * (1.0 - f.0[i])).sum();
    direct + inverse
}

/// Ordered so that `Complete > Incomplete > Unreliable > Noise`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrajectoryClass {
    Noise,
    Unreliable,
    Incomplete,
    Complete,
}

impl TrajectoryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryClass::Complete => "complete",
            TrajectoryClass::Incomplete => "incomplete",
            TrajectoryClass::Unreliable => "unreliable",
            TrajectoryClass::Noise => "noise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "complete" => Some(TrajectoryClass::Complete),
            "incomplete" => Some(TrajectoryClass::Incomplete),
            "unreliable" => Some(TrajectoryClass::Unreliable),
            "noise" => Some(TrajectoryClass::Noise),
            _ => None,
        }
    }

    /// Midpoint of the class band, used as a numeric ground truth.
    pub fn ground_truth(self) -> f64 {
        match self {
            TrajectoryClass::Complete => 0.9,
            TrajectoryClass::Incomplete => 0.65,
            TrajectoryClass::Unreliable => 0.35,
            TrajectoryClass::Noise => 0.1,
        }
    }
}

/// Band boundaries belong to the higher class.
pub fn classify(cv: f64) -> TrajectoryClass {
    if cv >= 0.8 {
        TrajectoryClass::Complete
    } else if cv >= 0.5 {
        TrajectoryClass::Incomplete
    } else if cv >= 0.2 {
        TrajectoryClass::Unreliable
    } else {
        TrajectoryClass::Noise
    }
}

/// Everything needed to turn a trajectory into a confidence value.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    pub scene: &'a SceneModel,
    pub features: &'a FeatureConfig,
    pub stats: &'a NormalizationStats,
    pub weights: &'a WeightVector,
}

impl Scorer<'_> {
    pub fn feature_vector(&self, traj: &Trajectory) -> FeatureVector {
        normalize(&extract_raw(traj, self.scene, self.features), self.stats)
    }

    pub fn confidence(&self, traj: &Trajectory) -> f64 {
        confidence_value(&self.feature_vector(traj), self.weights)
    }
}

/// Splits trajectories into `(kept, noise)` by `cv < threshold`, preserving order.
pub fn filter_noise(trajs: Vec<Trajectory>, scorer: &Scorer<'_>, threshold: f64) -> (Vec<Trajectory>, Vec<Trajectory>) {
    trajs.into_iter().partition(|t| scorer.confidence(t) >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new([0.5 / 9.0; 9]).is_err());
        let mut w = [0.0; 9];
        w[0] = 1.5;
        w[1] = -0.5;
        assert!(WeightVector::new(w).is_err());
        assert!(WeightVector::normalized([0.0; 9]).is_err());
        let n = WeightVector::normalized([2.0; 9]).unwrap();
        assert!((n.get(1) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn cv_examples() {
        let w = WeightVector::new([0.2, 0.2, 0.2, 0.2, 0.2, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let f = FeatureVector([1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((confidence_value(&f, &w) - 1.0).abs() < 1e-15);

        let mut e6 = [0.0; 9];
        e6[5] = 1.0;
        assert_eq!(confidence_value(&FeatureVector([0.0; 9]), &WeightVector::new(e6).unwrap()), 1.0);

        // Direct part: (1+1+0+0+0)/9; inverse part: 4 * (1-1)/9.
        let f = FeatureVector([1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let hand = 2.0 / 9.0;
        assert!((confidence_value(&f, &WeightVector::uniform()) - hand).abs() < 1e-15);
    }

    #[test]
    fn class_boundaries() {
        assert_eq!(classify(0.8), TrajectoryClass::Complete);
        assert_eq!(classify(0.8 - 1e-12), TrajectoryClass::Incomplete);
        assert_eq!(classify(0.5), TrajectoryClass::Incomplete);
        assert_eq!(classify(0.2), TrajectoryClass::Unreliable);
        assert_eq!(classify(0.1999), TrajectoryClass::Noise);
        assert_eq!(classify(3.0), TrajectoryClass::Complete);
        assert_eq!(classify(-3.0), TrajectoryClass::Noise);
        assert!(TrajectoryClass::Complete > TrajectoryClass::Incomplete);
        assert!(TrajectoryClass::Unreliable > TrajectoryClass::Noise);
    }
}
