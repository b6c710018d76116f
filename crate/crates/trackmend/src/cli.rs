//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when an input fails validation (the message
//! names the file and, where it applies, the line), 2 on a usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trackmend_core::triplets::WindowMode;

use crate::commands::{self, Evaluate, LearnWeights, Repair};
use crate::config::RunConfig;
use crate::seeds::derive_seed;

#[derive(Debug, Parser)]
#[command(name = "trackmend", version, about = "Score, learn scene zones for, and repair multi-object tracking trajectories")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML); flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed; each stage derives its own seed from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print progress to standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Window {
    Mean,
    Minmax,
}

impl From<Window> for WindowMode {
    fn from(w: Window) -> Self {
        match w {
            Window::Mean => WindowMode::Mean,
            Window::Minmax => WindowMode::MinMax,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene with injected tracking losses.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth fragment table.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Zone file with the scene's manual zones.
        #[arg(long)]
        scene_out: Option<PathBuf>,
        #[arg(long)]
        agents: Option<usize>,
        #[arg(long)]
        p_loss: Option<f64>,
        #[arg(long)]
        noise_rate: Option<f64>,
    },
    /// Learn the nine feature weights by genetic algorithm.
    LearnWeights {
        #[command(flatten)]
        common: Common,
        /// Trajectory file holding the training trajectories.
        #[arg(long)]
        train: PathBuf,
        /// Ground truth: `trajectory_id` plus `ground_truth` or `class`.
        #[arg(long)]
        gt: PathBuf,
        /// Zone file with the entry, exit and in/out zones.
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pop: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        /// Number of leading labelled trajectories to learn from.
        #[arg(long)]
        training_size: Option<usize>,
    },
    /// Compute the confidence value and class of every trajectory.
    Score {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        noise_threshold: Option<f64>,
    },
    /// Cluster lost and found positions into zones.
    LearnZones {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Build prioritized zone triplets from complete trajectories.
    BuildTriplets {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trajectories: PathBuf,
        /// Zone file including the learned zones.
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        window: Option<Window>,
        #[arg(long)]
        complete_threshold: Option<f64>,
    },
    /// Fuse lost trajectories with re-appearing ones.
    Repair {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        triplets: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Summary counts.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Fusion log, input to `evaluate`.
        #[arg(long)]
        fusions: Option<PathBuf>,
        /// Fill each repaired gap with interpolated observations.
        #[arg(long)]
        interpolate: bool,
    },
    /// Tabulate trajectory classes before and after repair.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
        #[arg(long)]
        fusions: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Machine-readable copy of the report.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run every stage on one configuration.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.verbosity = cfg.verbosity.max(common.verbose);
    Ok(cfg)
}

fn done(cfg: &RunConfig, what: &str, path: &Path) {
    if cfg.verbosity > 0 {
        eprintln!("{what}: {}", path.display());
    }
}

pub fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Simulate { common, out, truth, scene_out, agents, p_loss, noise_rate } => {
            let cfg = load(&common)?;
            let mut synth = cfg.synth.clone();
            synth.seed = derive_seed(cfg.seed, "synth");
            synth.agent_count = agents.unwrap_or(synth.agent_count);
            synth.p_loss = p_loss.unwrap_or(synth.p_loss);
            synth.noise_track_rate = noise_rate.unwrap_or(synth.noise_track_rate);
            let n = commands::simulate(&synth, &out, truth.as_deref(), scene_out.as_deref())?;
            done(&cfg, &format!("{n} trajectories"), &out);
        }
        Command::LearnWeights { common, train, gt, scene, out, pop, generations, training_size } => {
            let mut cfg = load(&common)?;
            cfg.ga.population_size = pop.unwrap_or(cfg.ga.population_size);
            cfg.ga.max_generations = generations.unwrap_or(cfg.ga.max_generations);
            cfg.training.size = training_size.unwrap_or(cfg.training.size);
            cfg.validate()?;
            let w = commands::learn_weights(&LearnWeights { train: &train, ground_truth: &gt, scene: &scene, out: &out }, &cfg)?;
            done(&cfg, &format!("fitness {}", w.fitness.unwrap_or(f64::NAN)), &out);
        }
        Command::Score { common, trajectories, scene, weights, out, noise_threshold } => {
            let mut cfg = load(&common)?;
            cfg.confidence.noise_threshold = noise_threshold.unwrap_or(cfg.confidence.noise_threshold);
            cfg.validate()?;
            let noise = commands::score(&trajectories, &scene, &weights, &out, &cfg)?;
            done(&cfg, &format!("{noise} noise trajectories"), &out);
        }
        Command::LearnZones { common, trajectories, scene, out, kmax } => {
            let mut cfg = load(&common)?;
            cfg.zones.k_max = kmax.unwrap_or(cfg.zones.k_max);
            cfg.validate()?;
            let learned = commands::learn_zones(&trajectories, &scene, &out, &cfg.zones, cfg.seed, &cfg)?;
            done(&cfg, &format!("{} zones", learned.zones().len()), &out);
        }
        Command::BuildTriplets { common, trajectories, scene, weights, out, window, complete_threshold } => {
            let mut cfg = load(&common)?;
            cfg.confidence.complete_threshold = complete_threshold.unwrap_or(cfg.confidence.complete_threshold);
            let window = window.map_or(cfg.triplets.window, WindowMode::from);
            cfg.validate()?;
            let triplets = commands::build_triplets(&trajectories, &scene, &weights, &out, window, &cfg)?;
            done(&cfg, &format!("{} triplets", triplets.len()), &out);
        }
        Command::Repair { common, trajectories, scene, triplets, weights, out, report, fusions, interpolate } => {
            let cfg = load(&common)?;
            let mut repair_cfg = cfg.repair.clone();
            repair_cfg.interpolate |= interpolate;
            let paths = Repair {
                trajectories: &trajectories,
                scene: &scene,
                triplets: &triplets,
                weights: &weights,
                out: &out,
                report: report.as_deref(),
                fusions: fusions.as_deref(),
            };
            let summary = commands::repair(&paths, &repair_cfg, &cfg)?;
            done(&cfg, &format!("{} fusions", summary.fusions), &out);
        }
        Command::Evaluate { common, before, after, fusions, scene, weights, out, csv } => {
            let cfg = load(&common)?;
            let paths = Evaluate { before: &before, after: &after, fusions: &fusions, scene: &scene, weights: &weights, out: &out, csv: csv.as_deref() };
            commands::evaluate(&paths, &cfg)?;
            done(&cfg, "report", &out);
        }
        Command::Pipeline { common, out_dir } => {
            let mut cfg = load(&common)?;
            if let Some(dir) = out_dir {
                cfg.paths.out_dir = dir;
            }
            let report = commands::pipeline(&cfg)?;
            print!("{}", report.render_text());
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors() {
        assert_eq!(Cli::try_parse_from(["trackmend"]).unwrap_err().exit_code(), 2);
        assert_eq!(Cli::try_parse_from(["trackmend", "frobnicate"]).unwrap_err().exit_code(), 2);
        assert!(Cli::try_parse_from(["trackmend", "pipeline", "--config", "demo.toml"]).is_ok());
    }
}
