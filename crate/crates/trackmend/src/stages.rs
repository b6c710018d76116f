//! The pipeline stages on in-memory values. [`crate::commands`] wraps each
//! one with file input and output.

use std::collections::BTreeMap;

use anyhow::{bail, Context};
use trackmend_core::confidence::Scorer;
use trackmend_core::features::{compute_stats, extract_raw, normalize};
use trackmend_core::ga::{evolve, GaConfig, TrainingSet};
use trackmend_core::repair::{repair_batch, RepairConfig, RepairOutcome};
use trackmend_core::triplets::{learn_triplets, WindowMode};
use trackmend_core::zones::{learn_zones, ZoneLearningConfig};
use trackmend_core::{FeatureConfig, SceneModel, TrackId, Trajectory, ZoneTriplet};

use crate::weights_file::WeightsFile;

/// Learns weights from the first `training_size` trajectories that have a
/// ground-truth value. The normalization statistics come from the same
/// trajectories.
pub fn learn_weights(
    trajectories: &[Trajectory],
    ground_truth: &BTreeMap<TrackId, f64>,
    scene: &SceneModel,
    features: &FeatureConfig,
    training_size: usize,
    ga: &GaConfig,
) -> anyhow::Result<WeightsFile> {
    let labelled: Vec<(&Trajectory, f64)> =
        trajectories.iter().filter_map(|t| ground_truth.get(&t.id()).map(|g| (t, *g))).take(training_size).collect();
    if labelled.is_empty() {
        bail!("no trajectory has a ground-truth entry");
    }
    let raws: Vec<_> = labelled.iter().map(|(t, _)| extract_raw(t, scene, features)).collect();
    let stats = compute_stats(&raws)?;
    let set = TrainingSet::new(raws.iter().zip(&labelled).map(|(r, (_, g))| (normalize(r, &stats), *g)).collect())?;
    let evolution = evolve(&set, ga).context("weight learning")?;
    Ok(WeightsFile {
        weights: evolution.best,
        stats,
        fitness: Some(evolution.best_fitness),
        converged: Some(evolution.converged),
        generations: Some(evolution.history.len()),
    })
}

pub fn scorer<'a>(scene: &'a SceneModel, features: &'a FeatureConfig, weights: &'a WeightsFile) -> Scorer<'a> {
    Scorer { scene, features, stats: &weights.stats, weights: &weights.weights }
}

pub fn confidences(trajectories: &[Trajectory], scorer: &Scorer<'_>) -> Vec<f64> {
    trajectories.iter().map(|t| scorer.confidence(t)).collect()
}

/// The manual scene extended with the learned lost, found and lost-found zones.
pub fn learn_scene(trajectories: &[Trajectory], manual: &SceneModel, cfg: &ZoneLearningConfig, seed: u64) -> anyhow::Result<SceneModel> {
    let learned = learn_zones(trajectories, manual, cfg, seed)?;
    let mut scene = manual.clone();
    scene.extend(learned)?;
    Ok(scene)
}

pub fn build_triplets(trajectories: &[Trajectory], scorer: &Scorer<'_>, complete_threshold: f64, window: WindowMode) -> Vec<ZoneTriplet> {
    learn_triplets(trajectories, scorer, complete_threshold, window)
}

pub fn repair(trajectories: &[Trajectory], triplets: &[ZoneTriplet], scorer: &Scorer<'_>, cfg: &RepairConfig) -> RepairOutcome {
    repair_batch(trajectories, scorer.scene, triplets, scorer, cfg)
}
