//! The run configuration: one TOML file with a section per stage.
//!
//! ```toml
//! seed = 1
//! verbosity = 0
//!
//! [paths]
//! out_dir = "out"
//! # trajectories = "tracks.csv"   # omit to simulate
//! # scene = "zones.xml"
//! # ground_truth = "labels.csv"
//!
//! [synth]        # simulator, used when no trajectory file is given
//! [features]     # size_change_ratio, direction_angle_deg, min_step, neighbor_radius, neighbor_window
//! [confidence]   # noise_threshold, complete_threshold
//! [training]     # size: number of leading labelled trajectories used for learning
//! [ga]           # population_size, mutation_prob, crossover_prob, fitness_threshold, max_generations, elite_count
//! [zones]        # k_max, margin_fraction, min_margin, overlap_fraction
//! [triplets]     # window = "mean" | "min_max"
//! [repair]       # interpolate
//! ```
//!
//! Relative paths are resolved against the directory holding the config
//! file. Every section is optional. The `seed` keys inside `[synth]` and
//! `[ga]` are ignored: stage seeds are derived from the top-level `seed`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use trackmend_core::confidence::{DEFAULT_COMPLETE_THRESHOLD, DEFAULT_NOISE_THRESHOLD};
use trackmend_core::ga::GaConfig;
use trackmend_core::repair::RepairConfig;
use trackmend_core::synth::SynthConfig;
use trackmend_core::triplets::WindowMode;
use trackmend_core::zones::ZoneLearningConfig;
use trackmend_core::FeatureConfig;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRAINING_SIZE: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out_dir: PathBuf,
    pub trajectories: Option<PathBuf>,
    pub scene: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("out"), trajectories: None, scene: None, ground_truth: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfidenceConfig {
    pub noise_threshold: f64,
    pub complete_threshold: f64,
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        Self { noise_threshold: DEFAULT_NOISE_THRESHOLD, complete_threshold: DEFAULT_COMPLETE_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub size: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { size: DEFAULT_TRAINING_SIZE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TripletConfig {
    pub window: WindowMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub verbosity: u8,
    pub paths: Paths,
    pub synth: SynthConfig,
    pub features: FeatureConfig,
    pub confidence: ConfidenceConfig,
    pub training: TrainingConfig,
    pub ga: GaConfig,
    pub zones: ZoneLearningConfig,
    pub triplets: TripletConfig,
    pub repair: RepairConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            verbosity: 0,
            paths: Paths::default(),
            synth: SynthConfig::default(),
            features: FeatureConfig::default(),
            confidence: ConfidenceConfig::default(),
            training: TrainingConfig::default(),
            ga: GaConfig::default(),
            zones: ZoneLearningConfig::default(),
            triplets: TripletConfig::default(),
            repair: RepairConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read config", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.resolve(base);
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let c = &self.confidence;
        if !(c.noise_threshold.is_finite() && c.complete_threshold.is_finite()) {
            bail!("confidence thresholds must be finite");
        }
        if self.training.size == 0 {
            bail!("training.size must be positive");
        }
        self.ga.validate()?;
        let z = &self.zones;
        if z.k_max == 0 || !(z.margin_fraction >= 0.0 && z.min_margin > 0.0 && (0.0..=1.0).contains(&z.overlap_fraction)) {
            bail!("zones: need k_max >= 1, margin_fraction >= 0, min_margin > 0 and overlap_fraction in [0, 1]");
        }
        let f = &self.features;
        if !(f.size_change_ratio >= 0.0 && f.direction_angle_deg >= 0.0 && f.min_step >= 0.0 && f.neighbor_radius >= 0.0 && f.neighbor_window >= 0.0) {
            bail!("features: thresholds must be non-negative");
        }
        Ok(())
    }

    /// Input files named in `[paths]` that do not exist.
    pub fn missing_inputs(&self) -> Vec<&Path> {
        let p = &self.paths;
        [&p.trajectories, &p.scene, &p.ground_truth].into_iter().flatten().map(PathBuf::as_path).filter(|p| !p.exists()).collect()
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.out_dir);
        for p in [&mut self.trajectories, &mut self.scene, &mut self.ground_truth].into_iter().flatten() {
            join(p);
        }
    }
}
