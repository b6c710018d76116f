//! One function per command-line stage: read the input files, run the
//! stage, write the outputs. `pipeline` chains them through an output
//! directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use trackmend_core::repair::{RepairConfig, RepairReport};
use trackmend_core::synth::{generate, SynthConfig};
use trackmend_core::triplets::WindowMode;
use trackmend_core::zones::ZoneLearningConfig;
use trackmend_core::{classify, FeatureConfig, SceneModel, Trajectory, ZoneTriplet};

use crate::config::RunConfig;
use crate::report::{evaluate as evaluate_report, read_fusions, write_fusions, Bands, EvaluationReport, FusionRecord};
use crate::seeds::derive_seed;
use crate::stages;
use crate::trajectory_csv::{read_ground_truth, read_trajectories, write_trajectories, write_truth};
use crate::triplet_table::{read_triplets, write_triplets};
use crate::weights_file::WeightsFile;
use crate::zone_xml::{parse_zone_file, serialize_zones};

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("{}: cannot write", path.display()))
}

fn located<T, E: Into<anyhow::Error>>(path: &Path, r: Result<T, E>) -> anyhow::Result<T> {
    r.map_err(|e| e.into().context(path.display().to_string()))
}

pub fn load_scene(path: &Path) -> anyhow::Result<SceneModel> {
    let zones = located(path, parse_zone_file(&read(path)?))?;
    located(path, SceneModel::new(zones))
}

pub fn load_trajectories(path: &Path, features: &FeatureConfig) -> anyhow::Result<Vec<Trajectory>> {
    Ok(located(path, read_trajectories(&read(path)?))?.into_trajectories(features))
}

pub fn load_weights(path: &Path) -> anyhow::Result<WeightsFile> {
    located(path, WeightsFile::from_json(&read(path)?))
}

pub fn load_triplets(path: &Path) -> anyhow::Result<Vec<ZoneTriplet>> {
    located(path, read_triplets(&read(path)?))
}

pub fn load_fusions(path: &Path) -> anyhow::Result<Vec<FusionRecord>> {
    located(path, read_fusions(&read(path)?))
}

/// Writes the simulated trajectories, and optionally the truth table and the
/// scene's manual zones.
pub fn simulate(cfg: &SynthConfig, out: &Path, truth: Option<&Path>, scene: Option<&Path>) -> anyhow::Result<usize> {
    let sim = generate(cfg).context("simulation")?;
    write(out, &write_trajectories(&sim.trajectories))?;
    if let Some(path) = truth {
        write(path, &write_truth(&sim.truth))?;
    }
    if let Some(path) = scene {
        write(path, &serialize_zones(sim.scene.zones()))?;
    }
    Ok(sim.trajectories.len())
}

pub struct LearnWeights<'a> {
    pub train: &'a Path,
    pub ground_truth: &'a Path,
    pub scene: &'a Path,
    pub out: &'a Path,
}

pub fn learn_weights(paths: &LearnWeights<'_>, cfg: &RunConfig) -> anyhow::Result<WeightsFile> {
    let scene = load_scene(paths.scene)?;
    let trajectories = load_trajectories(paths.train, &cfg.features)?;
    let gt = located(paths.ground_truth, read_ground_truth(&read(paths.ground_truth)?))?;
    let ga = trackmend_core::ga::GaConfig { seed: derive_seed(cfg.seed, "ga"), ..cfg.ga.clone() };
    let weights = stages::learn_weights(&trajectories, &gt, &scene, &cfg.features, cfg.training.size, &ga)?;
    write(paths.out, &weights.to_json())?;
    Ok(weights)
}

/// Writes `trajectory_id,confidence,class,noise` per trajectory.
pub fn score(trajectories: &Path, scene: &Path, weights: &Path, out: &Path, cfg: &RunConfig) -> anyhow::Result<usize> {
    let scene = load_scene(scene)?;
    let weights = load_weights(weights)?;
    let trajs = load_trajectories(trajectories, &cfg.features)?;
    let scorer = stages::scorer(&scene, &cfg.features, &weights);
    let mut text = String::from("trajectory_id,confidence,class,noise\n");
    let mut noise = 0;
    for (t, cv) in trajs.iter().zip(stages::confidences(&trajs, &scorer)) {
        let is_noise = cv < cfg.confidence.noise_threshold;
        noise += usize::from(is_noise);
        let _ = writeln!(text, "{},{},{},{}", t.id(), cv, classify(cv).as_str(), is_noise);
    }
    write(out, &text)?;
    Ok(noise)
}

/// Writes the manual zones together with the learned ones.
pub fn learn_zones(trajectories: &Path, scene: &Path, out: &Path, zones: &ZoneLearningConfig, seed: u64, cfg: &RunConfig) -> anyhow::Result<SceneModel> {
    let manual = load_scene(scene)?;
    let trajs = load_trajectories(trajectories, &cfg.features)?;
    let learned = stages::learn_scene(&trajs, &manual, zones, derive_seed(seed, "zones"))?;
    write(out, &serialize_zones(learned.zones()))?;
    Ok(learned)
}

pub fn build_triplets(
    trajectories: &Path,
    scene: &Path,
    weights: &Path,
    out: &Path,
    window: WindowMode,
    cfg: &RunConfig,
) -> anyhow::Result<Vec<ZoneTriplet>> {
    let scene = load_scene(scene)?;
    let weights = load_weights(weights)?;
    let trajs = load_trajectories(trajectories, &cfg.features)?;
    let scorer = stages::scorer(&scene, &cfg.features, &weights);
    let triplets = stages::build_triplets(&trajs, &scorer, cfg.confidence.complete_threshold, window);
    write(out, &write_triplets(&triplets))?;
    Ok(triplets)
}

pub struct Repair<'a> {
    pub trajectories: &'a Path,
    pub scene: &'a Path,
    pub triplets: &'a Path,
    pub weights: &'a Path,
    pub out: &'a Path,
    pub report: Option<&'a Path>,
    pub fusions: Option<&'a Path>,
}

pub fn render_repair_summary(r: &RepairReport) -> String {
    format!(
        "input trajectories: {}\nanomalous appearances: {}\nfusions: {}\nfusions with increased confidence: {}\noutput trajectories: {}\n",
        r.input_trajectories,
        r.anomalous_appearances,
        r.fusions,
        r.cv_increased,
        r.input_trajectories - r.fusions
    )
}

pub fn repair(paths: &Repair<'_>, repair: &RepairConfig, cfg: &RunConfig) -> anyhow::Result<RepairReport> {
    let scene = load_scene(paths.scene)?;
    let weights = load_weights(paths.weights)?;
    let triplets = load_triplets(paths.triplets)?;
    let trajs = load_trajectories(paths.trajectories, &cfg.features)?;
    let scorer = stages::scorer(&scene, &cfg.features, &weights);
    let outcome = stages::repair(&trajs, &triplets, &scorer, repair);
    write(paths.out, &write_trajectories(&outcome.trajectories))?;
    if let Some(path) = paths.report {
        write(path, &render_repair_summary(&outcome.report))?;
    }
    if let Some(path) = paths.fusions {
        let records: Vec<FusionRecord> = outcome.results.iter().map(FusionRecord::from).collect();
        write(path, &write_fusions(&records))?;
    }
    Ok(outcome.report)
}

pub struct Evaluate<'a> {
    pub before: &'a Path,
    pub after: &'a Path,
    pub fusions: &'a Path,
    pub scene: &'a Path,
    pub weights: &'a Path,
    pub out: &'a Path,
    pub csv: Option<&'a Path>,
}

pub fn evaluate(paths: &Evaluate<'_>, cfg: &RunConfig) -> anyhow::Result<EvaluationReport> {
    let scene = load_scene(paths.scene)?;
    let weights = load_weights(paths.weights)?;
    let scorer = stages::scorer(&scene, &cfg.features, &weights);
    let before = stages::confidences(&load_trajectories(paths.before, &cfg.features)?, &scorer);
    let after = stages::confidences(&load_trajectories(paths.after, &cfg.features)?, &scorer);
    let fusions = load_fusions(paths.fusions)?;
    let bands = Bands { complete: cfg.confidence.complete_threshold, noise: cfg.confidence.noise_threshold };
    let report = evaluate_report(&before, &after, &fusions, bands);
    write(paths.out, &report.render_text())?;
    if let Some(path) = paths.csv {
        write(path, &report.render_csv())?;
    }
    Ok(report)
}

/// Files written by [`pipeline`], relative to the output directory.
pub mod artifacts {
    pub const TRAJECTORIES: &str = "trajectories.csv";
    pub const TRUTH: &str = "truth.csv";
    pub const SCENE: &str = "scene.xml";
    pub const WEIGHTS: &str = "weights.json";
    pub const SCORES: &str = "scores.csv";
    pub const LEARNED_ZONES: &str = "learned_zones.xml";
    pub const TRIPLETS: &str = "triplets.txt";
    pub const REPAIRED: &str = "repaired.csv";
    pub const FUSIONS: &str = "fusions.csv";
    pub const REPAIR_SUMMARY: &str = "repair.txt";
    pub const REPORT: &str = "report.txt";
    pub const REPORT_CSV: &str = "report.csv";
}

fn say(cfg: &RunConfig, message: &str) {
    if cfg.verbosity > 0 {
        eprintln!("{message}");
    }
}

/// Runs every stage. Without input paths in the config the trajectories,
/// truth table and scene are simulated into the output directory first.
pub fn pipeline(cfg: &RunConfig) -> anyhow::Result<EvaluationReport> {
    use artifacts::*;
    let dir = &cfg.paths.out_dir;
    let at = |name: &str| -> PathBuf { dir.join(name) };
    let missing = cfg.missing_inputs();
    if let Some(path) = missing.first() {
        bail!("{}: input file does not exist", path.display());
    }

    let (trajectories, truth, scene) = match (&cfg.paths.trajectories, &cfg.paths.scene, &cfg.paths.ground_truth) {
        (Some(t), Some(s), Some(g)) => (t.clone(), g.clone(), s.clone()),
        (None, None, None) => {
            say(cfg, "simulating");
            let synth = SynthConfig { seed: derive_seed(cfg.seed, "synth"), ..cfg.synth.clone() };
            simulate(&synth, &at(TRAJECTORIES), Some(&at(TRUTH)), Some(&at(SCENE)))?;
            (at(TRAJECTORIES), at(TRUTH), at(SCENE))
        }
        _ => bail!("paths: give trajectories, scene and ground_truth together, or none of them to simulate"),
    };

    say(cfg, "learning weights");
    learn_weights(&LearnWeights { train: &trajectories, ground_truth: &truth, scene: &scene, out: &at(WEIGHTS) }, cfg)?;
    say(cfg, "scoring");
    score(&trajectories, &scene, &at(WEIGHTS), &at(SCORES), cfg)?;
    say(cfg, "learning zones");
    learn_zones(&trajectories, &scene, &at(LEARNED_ZONES), &cfg.zones, cfg.seed, cfg)?;
    say(cfg, "building triplets");
    build_triplets(&trajectories, &at(LEARNED_ZONES), &at(WEIGHTS), &at(TRIPLETS), cfg.triplets.window, cfg)?;
    say(cfg, "repairing");
    repair(
        &Repair {
            trajectories: &trajectories,
            scene: &at(LEARNED_ZONES),
            triplets: &at(TRIPLETS),
            weights: &at(WEIGHTS),
            out: &at(REPAIRED),
            report: Some(&at(REPAIR_SUMMARY)),
            fusions: Some(&at(FUSIONS)),
        },
        &cfg.repair,
        cfg,
    )?;
    say(cfg, "evaluating");
    evaluate(
        &Evaluate {
            before: &trajectories,
            after: &at(REPAIRED),
            fusions: &at(FUSIONS),
            scene: &at(LEARNED_ZONES),
            weights: &at(WEIGHTS),
            out: &at(REPORT),
            csv: Some(&at(REPORT_CSV)),
        },
        cfg,
    )
}
