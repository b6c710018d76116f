//! The nine trajectory features and their normalization.
//!
//! Features, by 1-based index:
//!
//! | # | feature | kind |
//! |---|---------|------|
//! | 1 | starts in an entry or in/out zone | boolean |
//! | 2 | ends in an exit or in/out zone | boolean |
//! | 3 | lifetime in seconds | z-score |
//! | 4 | ground-plane path length | z-score |
//! | 5 | observations classified as a person | per second of lifetime |
//! | 6 | number of losses | z-score |
//! | 7 | neighbors at first detection, losses, re-finds and end | z-score |
//! | 8 | abrupt size changes | per second of lifetime |
//! | 9 | heading changes | z-score |
//!
//! Features 1 to 5 raise confidence; 6 to 9 lower it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{ClassLabel, EventKind, Observation, SceneModel, Trajectory};

/// Thresholds used while extracting raw features.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FeatureConfig {
    /// Relative change in width, height or depth that counts as a size change.
    pub size_change_ratio: f64,
    /// Heading change, in degrees, that counts as a direction change.
    pub direction_angle_deg: f64,
    /// Displacements shorter than this are merged with the next one.
    pub min_step: f64,
    /// Distance for the neighbor-count fallback.
    pub neighbor_radius: f64,
    /// Time tolerance, in seconds, for the neighbor-count fallback.
    pub neighbor_window: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            size_change_ratio: 0.3,
            direction_angle_deg: 45.0,
            min_step: 0.05,
            neighbor_radius: 2.0,
            neighbor_window: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawFeatureVector {
    pub entry_activated: bool,
    pub exit_activated: bool,
    pub lifetime: f64,
    pub length: f64,
    pub person_count: u32,
    pub lost_count: u32,
    pub neighbor_sum: u32,
    pub size_change_count: u32,
    pub direction_change_count: u32,
}

impl RawFeatureVector {
    /// Raw value of feature `i` (1-based).
    pub fn value(&self, i: usize) -> f64 {
        match i {
            1 => f64::from(u8::from(self.entry_activated)),
            2 => f64::from(u8::from(self.exit_activated)),
            3 => self.lifetime,
            4 => self.length,
            5 => f64::from(self.person_count),
            6 => f64::from(self.lost_count),
            7 => f64::from(self.neighbor_sum),
            8 => f64::from(self.size_change_count),
            9 => f64::from(self.direction_change_count),
            _ => panic!("feature index {i} out of range 1..=9"),
        }
    }
}

/// Features that are z-scored against learning-stage statistics.
pub const STANDARDIZED: [usize; 5] = [3, 4, 6, 7, 9];

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    /// Means of the [`STANDARDIZED`] features, in that order.
    pub mean: [f64; 5],
    /// Population standard deviations of the [`STANDARDIZED`] features.
    pub std_dev: [f64; 5],
    pub trained_on: usize,
}

impl NormalizationStats {
    fn slot(feature: usize) -> Option<usize> {
        STANDARDIZED.iter().position(|&f| f == feature)
    }

    pub fn mean_of(&self, feature: usize) -> Option<f64> {
        Self::slot(feature).map(|s| self.mean[s])
    }

    pub fn std_dev_of(&self, feature: usize) -> Option<f64> {
        Self::slot(feature).map(|s| self.std_dev[s])
    }
}

/// The nine normalized features, `f[0]` holding feature 1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector(pub [f64; 9]);

impl FeatureVector {
    /// Feature `i` (1-based).
    pub fn get(&self, i: usize) -> f64 {
        self.0[i - 1]
    }
}

pub fn extract_raw(traj: &Trajectory, scene: &SceneModel, cfg: &FeatureConfig) -> RawFeatureVector {
    let obs = traj.observations();
    let count = |n: usize| u32::try_from(n).unwrap_or(u32::MAX);

    let neighbor_sum = traj
        .events()
        .iter()
        .filter(|e| {
            matches!(e.kind, EventKind::FirstDetected | EventKind::Lost | EventKind::Found | EventKind::Ended)
        })
        .map(|e| e.neighbor_count)
        .fold(0u32, u32::saturating_add);

    RawFeatureVector {
        entry_activated: scene.any_containing(&traj.first().position, |k| k.is_entry_like()),
        exit_activated: scene.any_containing(&traj.last().position, |k| k.is_exit_like()),
        lifetime: traj.duration(),
        length: obs.windows(2).map(|w| w[0].position.distance(&w[1].position)).sum(),
        person_count: count(obs.iter().filter(|o| o.class == ClassLabel::Person).count()),
        lost_count: count(traj.events().iter().filter(|e| e.kind == EventKind::Lost).count()),
        neighbor_sum,
        size_change_count: count(obs.windows(2).filter(|w| size_changed(&w[0], &w[1], cfg.size_change_ratio)).count()),
        direction_change_count: count(direction_changes(obs, cfg)),
    }
}

fn size_changed(a: &Observation, b: &Observation, ratio: f64) -> bool {
    let changed = |before: f64, after: f64| {
        if before > 0.0 {
            (after - before).abs() / before > ratio
        } else {
            after > 0.0
        }
    };
    changed(a.width, b.width) || changed(a.height, b.height) || changed(a.depth, b.depth)
}

/// Counts heading changes above the threshold. Steps shorter than
/// `min_step` are accumulated until the object has moved far enough.
fn direction_changes(obs: &[Observation], cfg: &FeatureConfig) -> usize {
    let threshold = cfg.direction_angle_deg.to_radians();
    let Some(first) = obs.first() else { return 0 };
    let mut anchor = first.position;
    let mut heading: Option<(f64, f64)> = None;
    let mut changes = 0;
    for o in &obs[1..] {
        let (dx, dy) = (o.position.x - anchor.x, o.position.y - anchor.y);
        if libm::hypot(dx, dy) < cfg.min_step {
            continue;
        }
        if let Some((px, py)) = heading {
            let angle = libm::atan2(px * dy - py * dx, px * dx + py * dy).abs();
            if angle > threshold {
                changes += 1;
            }
        }
        heading = Some((dx, dy));
        anchor = o.position;
    }
    changes
}

/// Means and population standard deviations of features 3, 4, 6, 7 and 9.
pub fn compute_stats(raws: &[RawFeatureVector]) -> Result<NormalizationStats> {
    if raws.is_empty() {
        return Err(Error::Empty("normalization statistics"));
    }
    let n = raws.len() as f64;
    let mut mean = [0.0; 5];
    let mut std_dev = [0.0; 5];
    for (slot, &feature) in STANDARDIZED.iter().enumerate() {
        let m = raws.iter().map(|r| r.value(feature)).sum::<f64>() / n;
        let var = raws.iter().map(|r| {
            let d = r.value(feature) - m;
            d * d
        }).sum::<f64>() / n;
        mean[slot] = m;
        std_dev[slot] = libm::sqrt(var);
    }
    Ok(NormalizationStats { mean, std_dev, trained_on: raws.len() })
}

pub fn normalize(raw: &RawFeatureVector, stats: &NormalizationStats) -> FeatureVector {
    let mut f = [0.0; 9];
    f[0] = raw.value(1);
    f[1] = raw.value(2);
    let per_second = |v: f64| if raw.lifetime > 0.0 { v / raw.lifetime } else { 0.0 };
    f[4] = per_second(raw.value(5));
    f[7] = per_second(raw.value(8));
    for (slot, &feature) in STANDARDIZED.iter().enumerate() {
        let sd = stats.std_dev[slot];
        f[feature - 1] = if sd > 0.0 { (raw.value(feature) - stats.mean[slot]) / sd } else { 0.0 };
    }
    FeatureVector(f)
}

/// Fills every event's neighbor count with the number of other trajectories
/// that have an observation within `neighbor_radius` and `neighbor_window`
/// seconds of the event. Used when the tracker does not report neighbors.
pub fn estimate_neighbor_counts(trajs: &mut [Trajectory], cfg: &FeatureConfig) {
    let mut counts: Vec<Vec<u32>> = Vec::with_capacity(trajs.len());
    for (i, traj) in trajs.iter().enumerate() {
        let per_event = traj
            .events()
            .iter()
            .map(|event| {
                let near = trajs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .filter(|(_, other)| {
                        let obs = other.observations();
                        let start = obs.partition_point(|o| o.t < event.t - cfg.neighbor_window);
                        obs[start..]
                            .iter()
                            .take_while(|o| o.t <= event.t + cfg.neighbor_window)
                            .any(|o| o.position.distance(&event.position) <= cfg.neighbor_radius)
                    })
                    .count();
                u32::try_from(near).unwrap_or(u32::MAX)
            })
            .collect();
        counts.push(per_event);
    }
    for (traj, per_event) in trajs.iter_mut().zip(counts) {
        for (idx, n) in per_event.into_iter().enumerate() {
            traj.set_neighbor_count(idx, n);
        }
    }
}
