//! Genetic algorithm for learning the nine feature weights.
//!
//! An individual is a weight vector. Fitness is the summed absolute error
//! between the labelled ground truth and the confidence value the weights
//! produce; lower is better. Mutation re-draws a random suffix of the
//! weights, crossover swaps suffixes between two parents, and both
//! renormalize the result to sum to one.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::confidence::{confidence_value, WeightVector};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub weights: WeightVector,
    /// `None` until evaluated, and again after any operator touches the weights.
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(weights: WeightVector) -> Self {
        Self { weights, fitness: None }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(random_weights(rng, [0.0; 9], 0))
    }
}

/// Labelled feature vectors with ground-truth confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    entries: Vec<(FeatureVector, f64)>,
}

impl TrainingSet {
    pub fn new(entries: Vec<(FeatureVector, f64)>) -> Result<Self> {
        if let Some((index, &(_, value))) = entries.iter().enumerate().find(|(_, (_, gt))| !(0.0..=1.0).contains(gt)) {
            return Err(Error::InvalidGroundTruth { index, value });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(FeatureVector, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GaConfig {
    pub population_size: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    /// Stop once the best fitness drops below this. Defaults to `0.05 * |train|`.
    pub fitness_threshold: Option<f64>,
    pub max_generations: usize,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 5000,
            mutation_prob: 0.30,
            crossover_prob: 0.80,
            fitness_threshold: None,
            max_generations: 200,
            elite_count: 50,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mutation_prob) || !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(Error::InvalidConfig("GA probabilities must lie in [0, 1]"));
        }
        if self.population_size < 2 {
            return Err(Error::InvalidConfig("GA population must hold at least 2 individuals"));
        }
        if self.elite_count < 1 {
            return Err(Error::InvalidConfig("GA needs at least one elite individual"));
        }
        Ok(())
    }
}

/// Sum of absolute errors over the training set (not averaged).
pub fn fitness(w: &WeightVector, train: &TrainingSet) -> f64 {
    train.entries.iter().map(|(f, gt)| (gt - confidence_value(f, w)).abs()).sum()
}

/// Keeps `kept[..from]` and fills the rest with uniform draws, then renormalizes.
/// An all-zero draw is redrawn.
fn random_weights<R: Rng + ?Sized>(rng: &mut R, kept: [f64; 9], from: usize) -> WeightVector {
    loop {
        let mut w = kept;
        for v in &mut w[from..] {
            *v = rng.random::<f64>();
        }
        if let Ok(weights) = WeightVector::normalized(w) {
            return weights;
        }
    }
}

/// Replaces the weights from 0-based position `k` onwards with `draws` and renormalizes.
pub fn mutate_at(ind: &Individual, k: usize, draws: &[f64]) -> Result<Individual> {
    let mut w = *ind.weights.as_array();
    w[k..].copy_from_slice(draws);
    Ok(Individual::new(WeightVector::normalized(w)?))
}

pub fn mutate<R: Rng + ?Sized>(ind: &Individual, rng: &mut R) -> Individual {
    let k = rng.random_range(0..9);
    Individual::new(random_weights(rng, *ind.weights.as_array(), k))
}

/// Swaps the weights from 0-based position `k` onwards between two parents.
pub fn crossover_at(a: &Individual, b: &Individual, k: usize) -> (Individual, Individual) {
    let mut wa = *a.weights.as_array();
    let mut wb = *b.weights.as_array();
    wa[k..].swap_with_slice(&mut wb[k..]);
    // Both halves of each child come from valid parents, so the sum is positive
    // unless a whole side is zero; fall back to the parent in that case.
    let child = |w: [f64; 9], parent: &Individual| WeightVector::normalized(w).unwrap_or(parent.weights);
    (Individual::new(child(wa, a)), Individual::new(child(wb, b)))
}

pub fn crossover<R: Rng + ?Sized>(a: &Individual, b: &Individual, rng: &mut R) -> (Individual, Individual) {
    crossover_at(a, b, rng.random_range(0..9))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub best: WeightVector,
    pub best_fitness: f64,
    /// Best fitness of each evaluated generation, starting with the initial one.
    pub history: Vec<f64>,
    /// Whether the threshold was met before `max_generations`.
    pub converged: bool,
}

fn evaluate(population: &mut [Individual], train: &TrainingSet) {
    for ind in population.iter_mut().filter(|i| i.fitness.is_none()) {
        ind.fitness = Some(fitness(&ind.weights, train));
    }
}

fn fitness_of(ind: &Individual) -> f64 {
    ind.fitness.unwrap_or(f64::INFINITY)
}

/// Elites are copied unchanged. The remaining slots are filled with pairs
/// drawn without replacement from the better half: each pair is crossed with
/// `crossover_prob`, then each child is mutated with `mutation_prob`.
fn next_generation<R: Rng + ?Sized>(ranked: &[Individual], cfg: &GaConfig, rng: &mut R) -> Vec<Individual> {
    let n = ranked.len();
    let mut next: Vec<Individual> = ranked[..cfg.elite_count.min(n)].to_vec();
    let parents = (n / 2).clamp(2, n);
    let mut order: Vec<usize> = Vec::new();
    while next.len() < n {
        if order.len() < 2 {
            order = (0..parents).collect();
            order.shuffle(rng);
        }
        let (a, b) = (order.pop().unwrap(), order.pop().unwrap());
        let (c1, c2) = if rng.random_bool(cfg.crossover_prob) {
            crossover(&ranked[a], &ranked[b], rng)
        } else {
            (ranked[a].clone(), ranked[b].clone())
        };
        for child in [c1, c2] {
            if next.len() == n {
                break;
            }
            let child = if rng.random_bool(cfg.mutation_prob) { mutate(&child, rng) } else { child };
            next.push(child);
        }
    }
    next
}

pub fn evolve(train: &TrainingSet, cfg: &GaConfig) -> Result<Evolution> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("weight learning"));
    }
    let threshold = cfg.fitness_threshold.unwrap_or(0.05 * train.len() as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population: Vec<Individual> = (0..cfg.population_size).map(|_| Individual::random(&mut rng)).collect();
    let mut history = Vec::new();
    let mut best: Option<Individual> = None;
    let mut generation = 0;
    loop {
        evaluate(&mut population, train);
        // Stable sort: ties keep population order.
        population.sort_by(|a, b| fitness_of(a).total_cmp(&fitness_of(b)));
        let leader = &population[0];
        if best.as_ref().is_none_or(|b| fitness_of(leader) < fitness_of(b)) {
            best = Some(leader.clone());
        }
        history.push(fitness_of(leader));
        let converged = fitness_of(leader) < threshold;
        if converged || generation >= cfg.max_generations {
            let best = best.expect("population is never empty");
            return Ok(Evolution { best: best.weights, best_fitness: fitness_of(&best), history, converged });
        }
        population = next_generation(&population, cfg, &mut rng);
        generation += 1;
    }
}
