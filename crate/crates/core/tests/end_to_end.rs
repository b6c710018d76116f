use std::collections::BTreeSet;

use trackmend_core::confidence::Scorer;
use trackmend_core::features::{compute_stats, extract_raw, normalize, FeatureConfig};
use trackmend_core::ga::{evolve, GaConfig, TrainingSet};
use trackmend_core::repair::{repair_batch, RepairConfig};
use trackmend_core::synth::{generate, SynthConfig};
use trackmend_core::triplets::{learn_triplets, WindowMode};
use trackmend_core::zones::{learn_zones, ZoneLearningConfig};

#[test]
fn corridor_losses_are_repaired() {
    let out = generate(&SynthConfig { agent_count: 120, ..SynthConfig::default() }).unwrap();
    let mut scene = out.scene.clone();
    let fcfg = FeatureConfig::default();

    let train: Vec<_> = out.trajectories.iter().zip(&out.truth).take(150).collect();
    let raws: Vec<_> = train.iter().map(|(t, _)| extract_raw(t, &scene, &fcfg)).collect();
    let stats = compute_stats(&raws).unwrap();
    let set = TrainingSet::new(raws.iter().zip(&train).map(|(r, (_, g))| (normalize(r, &stats), g.class.ground_truth())).collect()).unwrap();
    let evo = evolve(&set, &GaConfig { population_size: 200, max_generations: 40, ..GaConfig::default() }).unwrap();

    let zcfg = ZoneLearningConfig { min_margin: 0.5, ..ZoneLearningConfig::default() };
    scene.extend(learn_zones(&out.trajectories, &scene, &zcfg, 7).unwrap()).unwrap();
    let scorer = Scorer { scene: &scene, features: &fcfg, stats: &stats, weights: &evo.best };
    let triplets = learn_triplets(&out.trajectories, &scorer, 0.8, WindowMode::Mean);
    assert!(!triplets.is_empty());

    let outcome = repair_batch(&out.trajectories, &scene, &triplets, &scorer, &RepairConfig::default());
    let agent = |id| out.truth.iter().find(|f| f.trajectory_id == id).unwrap().agent_id;
    let injected = out.trajectories.iter().filter(|t| t.final_loss().is_some()).count();
    let correct = outcome.results.iter().filter(|r| agent(r.donor_id) == agent(r.recipient_id)).count();
    assert!(correct * 10 >= injected * 9, "{correct} of {injected}");

    let before: usize = out.trajectories.iter().map(|t| t.observations().len()).sum();
    let after: usize = outcome.trajectories.iter().map(|t| t.observations().len()).sum();
    assert_eq!(before, after);
    assert_eq!(outcome.trajectories.len(), out.trajectories.len() - outcome.report.fusions);
    let ids: BTreeSet<_> = outcome.trajectories.iter().map(|t| t.id()).collect();
    assert_eq!(ids.len(), outcome.trajectories.len());
    let donors: BTreeSet<_> = outcome.results.iter().map(|r| r.donor_id).collect();
    assert_eq!(donors.len(), outcome.results.len());
}
