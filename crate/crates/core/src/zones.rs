//! Learning lost, found and lost-found zones from event positions.
//!
//! Positions where tracks are lost (or re-found) are collected, the number
//! of clusters is chosen by fitting spherical Gaussian mixtures with EM and
//! keeping the lowest BIC, the points are clustered with k-means, and each
//! cluster becomes a rectangular zone. Overlapping lost and found zones are
//! merged into lost-found zones.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{bounding_box, EventKind, GroundPoint, SceneModel, Trajectory, Zone, ZoneKind};

const KMEANS_MAX_ITERATIONS: usize = 100;
const EM_MAX_ITERATIONS: usize = 50;
// Weak inverse-gamma prior on mixture variances; keeps a component from
// collapsing onto one or two points.
const VARIANCE_PRIOR_FRACTION: f64 = 0.01;
const VARIANCE_PRIOR_DOF: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventPointKind {
    Lost,
    Found,
}

impl EventPointKind {
    fn zone_kind(self) -> ZoneKind {
        match self {
            EventPointKind::Lost => ZoneKind::Lost,
            EventPointKind::Found => ZoneKind::Found,
        }
    }
}

/// Positions of all lost (or found) events. A first detection counts as a
/// found event: a re-acquired object usually comes back under a new id.
/// Lost positions inside exit or in/out zones, and found positions inside
/// entry or in/out zones, are dropped: those are ordinary departures and
/// arrivals.
pub fn collect_event_points(trajs: &[Trajectory], scene: &SceneModel, kind: EventPointKind) -> Vec<GroundPoint> {
    let wanted = |k: EventKind| match kind {
        EventPointKind::Lost => k == EventKind::Lost,
        EventPointKind::Found => matches!(k, EventKind::Found | EventKind::FirstDetected),
    };
    let excluded = match kind {
        EventPointKind::Lost => ZoneKind::is_exit_like,
        EventPointKind::Found => ZoneKind::is_entry_like,
    };
    trajs
        .iter()
        .flat_map(|t| t.events())
        .filter(|e| wanted(e.kind))
        .map(|e| e.position)
        .filter(|p| !scene.any_containing(p, excluded))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<GroundPoint>,
    /// Cluster index of each input point.
    pub assignments: Vec<usize>,
    /// Sum of squared distances from each point to its assigned centroid.
    pub within_ss: f64,
    /// `within_ss` after each assignment step.
    pub history: Vec<f64>,
}

fn nearest(p: &GroundPoint, centroids: &[GroundPoint]) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(i, c)| (i, p.distance_squared(c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn potential(points: &[GroundPoint], d2: &[f64], candidate: &GroundPoint) -> f64 {
    points.iter().zip(d2).map(|(p, &d)| d.min(p.distance_squared(candidate))).sum()
}

/// Greedy k-means++ seeding: each new centre is the best of a few
/// D²-weighted candidates.
fn seed_centroids<R: Rng + ?Sized>(points: &[GroundPoint], k: usize, rng: &mut R) -> Vec<GroundPoint> {
    let trials = 2 + libm::log(k as f64) as usize;
    let mut centroids = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| p.distance_squared(&centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let mut best: Option<(f64, GroundPoint)> = None;
        for _ in 0..trials {
            let candidate = if total > 0.0 {
                let mut target = rng.random::<f64>() * total;
                let mut pick = points.len() - 1;
                for (i, &d) in d2.iter().enumerate() {
                    if target < d {
                        pick = i;
                        break;
                    }
                    target -= d;
                }
                points[pick]
            } else {
                points[rng.random_range(0..points.len())]
            };
            let score = potential(points, &d2, &candidate);
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, candidate));
            }
        }
        let (_, chosen) = best.expect("at least two trials");
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.distance_squared(&chosen));
        }
        centroids.push(chosen);
    }
    centroids
}

/// Lloyd's algorithm from greedy k-means++ seeds, run until the assignment
/// stops changing or 100 iterations. Deterministic for a given seed.
pub fn kmeans(points: &[GroundPoint], k: usize, seed: u64) -> Result<ClusterModel> {
    if points.is_empty() {
        return Err(Error::Empty("k-means"));
    }
    if k == 0 || k > points.len() {
        return Err(Error::TooManyClusters { k, points: points.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut assignments: Vec<usize> = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    for _ in 0..KMEANS_MAX_ITERATIONS {
        let mut changed = false;
        let mut wss = 0.0;
        for (p, slot) in points.iter().zip(assignments.iter_mut()) {
            let (c, d) = nearest(p, &centroids);
            wss += d;
            if *slot != c {
                *slot = c;
                changed = true;
            }
        }
        history.push(wss);
        if !changed {
            break;
        }
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &c) in points.iter().zip(&assignments) {
            sums[c].0 += p.x;
            sums[c].1 += p.y;
            sums[c].2 += 1;
        }
        // Empty clusters keep their previous centroid.
        for (centroid, &(sx, sy, n)) in centroids.iter_mut().zip(&sums) {
            if n > 0 {
                *centroid = GroundPoint::new(sx / n as f64, sy / n as f64);
            }
        }
    }
    let within_ss = *history.last().expect("at least one iteration");
    Ok(ClusterModel { k, centroids, assignments, within_ss, history })
}

/// A fitted mixture of isotropic 2D Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub weights: Vec<f64>,
    pub means: Vec<GroundPoint>,
    /// Per-component variance, shared by both axes.
    pub variances: Vec<f64>,
    pub log_likelihood: f64,
}

impl GaussianMixture {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Free parameters: 2 per mean, 1 variance per component, k - 1 mixing weights.
    pub fn parameter_count(&self) -> usize {
        4 * self.k() - 1
    }

    pub fn bic(&self, n: usize) -> f64 {
        -2.0 * self.log_likelihood + self.parameter_count() as f64 * libm::log(n as f64)
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(values.iter().map(|v| libm::exp(v - max)).sum::<f64>())
}

/// Scale of the inverse-gamma prior on component variances: a small
/// fraction of the per-axis variance of the whole point set.
fn variance_prior_scale(points: &[GroundPoint]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x / n, y + p.y / n));
    let centre = GroundPoint::new(mx, my);
    let spread = points.iter().map(|p| p.distance_squared(&centre)).sum::<f64>() / (2.0 * n);
    VARIANCE_PRIOR_FRACTION * spread + 1e-12
}

/// Posterior mode of a component variance given `ss` (weighted sum of
/// squared distances over both axes) and effective count `nc`.
fn map_variance(ss: f64, nc: f64, prior_scale: f64) -> f64 {
    (prior_scale + ss) / (VARIANCE_PRIOR_DOF + 2.0 * nc + 2.0)
}

/// Fits a `k`-component spherical mixture by EM, initialized from k-means.
/// Variances are MAP estimates under a weak inverse-gamma prior; the
/// reported log-likelihood is the plain likelihood at the fitted parameters.
pub fn fit_gmm(points: &[GroundPoint], k: usize, seed: u64) -> Result<GaussianMixture> {
    let init = kmeans(points, k, seed)?;
    let prior = variance_prior_scale(points);
    let n = points.len();
    let mut weights = vec![0.0; k];
    let mut variances = vec![0.0; k];
    for (p, &c) in points.iter().zip(&init.assignments) {
        weights[c] += 1.0;
        variances[c] += p.distance_squared(&init.centroids[c]);
    }
    for c in 0..k {
        variances[c] = map_variance(variances[c], weights[c], prior);
        weights[c] = (weights[c] / n as f64).max(f64::MIN_POSITIVE);
    }
    let mut means = init.centroids;
    let mut resp = vec![0.0; n * k];
    let mut log_terms = vec![0.0; k];
    let mut log_likelihood = f64::NEG_INFINITY;
    for iteration in 0..=EM_MAX_ITERATIONS {
        // E-step.
        let mut ll = 0.0;
        for (i, p) in points.iter().enumerate() {
            for c in 0..k {
                let v = variances[c];
                log_terms[c] = libm::log(weights[c]) - libm::log(2.0 * core::f64::consts::PI * v) - p.distance_squared(&means[c]) / (2.0 * v);
            }
            let norm = log_sum_exp(&log_terms);
            ll += norm;
            for c in 0..k {
                resp[i * k + c] = libm::exp(log_terms[c] - norm);
            }
        }
        let converged = (ll - log_likelihood).abs() <= 1e-10 * ll.abs().max(1.0);
        log_likelihood = ll;
        if converged || iteration == EM_MAX_ITERATIONS {
            break;
        }
        // M-step.
        for c in 0..k {
            let nc: f64 = (0..n).map(|i| resp[i * k + c]).sum();
            if nc <= 1e-12 {
                continue;
            }
            let (sx, sy) = points.iter().enumerate().fold((0.0, 0.0), |(x, y), (i, p)| (x + resp[i * k + c] * p.x, y + resp[i * k + c] * p.y));
            let mean = GroundPoint::new(sx / nc, sy / nc);
            let ss: f64 = points.iter().enumerate().map(|(i, p)| resp[i * k + c] * p.distance_squared(&mean)).sum();
            means[c] = mean;
            variances[c] = map_variance(ss, nc, prior);
            weights[c] = nc / n as f64;
        }
    }
    Ok(GaussianMixture { weights, means, variances, log_likelihood })
}

fn distinct_count(points: &[GroundPoint]) -> usize {
    let mut keys: Vec<(u64, u64)> = points.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// BIC of the best mixture for each `k` in `1..=min(k_max, distinct points)`.
pub fn bic_curve(points: &[GroundPoint], k_max: usize, seed: u64) -> Result<Vec<(usize, f64)>> {
    if points.is_empty() {
        return Err(Error::Empty("cluster-count selection"));
    }
    let upper = k_max.max(1).min(distinct_count(points));
    (1..=upper)
        .map(|k| fit_gmm(points, k, seed.wrapping_add(k as u64)).map(|g| (k, g.bic(points.len()))))
        .collect()
}

/// Number of clusters minimizing BIC; ties go to the smaller `k`.
pub fn select_k(points: &[GroundPoint], k_max: usize, seed: u64) -> Result<usize> {
    let curve = bic_curve(points, k_max, seed)?;
    Ok(curve
        .iter()
        .fold((0, f64::INFINITY), |best, &(k, bic)| if bic < best.1 { (k, bic) } else { best })
        .0)
}

/// Outline geometry for learned zones.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ZoneLearningConfig {
    /// Largest cluster count considered.
    pub k_max: usize,
    /// Rectangle padding as a fraction of the rectangle diagonal.
    pub margin_fraction: f64,
    /// Padding applied to an axis where the cluster has no extent.
    pub min_margin: f64,
    /// Intersection, as a fraction of the smaller rectangle, above which a
    /// lost and a found zone merge.
    pub overlap_fraction: f64,
}

impl Default for ZoneLearningConfig {
    fn default() -> Self {
        Self { k_max: 12, margin_fraction: 0.05, min_margin: 10.0, overlap_fraction: 0.5 }
    }
}

/// Hands out idents and `ZoneLearning<n>` names for learned zones.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneNamer {
    pub next_ident: u32,
    pub next_index: usize,
}

impl ZoneNamer {
    pub fn new(next_ident: u32) -> Self {
        Self { next_ident, next_index: 0 }
    }

    fn take(&mut self) -> (u32, alloc::string::String) {
        let out = (self.next_ident, format!("ZoneLearning{}", self.next_index));
        self.next_ident += 1;
        self.next_index += 1;
        out
    }
}

/// One axis-aligned rectangle per non-empty cluster, padded by
/// `margin_fraction` of its diagonal, with `min_margin` on any flat axis.
pub fn build_zones(
    model: &ClusterModel,
    points: &[GroundPoint],
    kind: EventPointKind,
    namer: &mut ZoneNamer,
    cfg: &ZoneLearningConfig,
) -> Result<Vec<Zone>> {
    let mut zones = Vec::new();
    for cluster in 0..model.k {
        let members: Vec<GroundPoint> = points
            .iter()
            .zip(&model.assignments)
            .filter(|(_, &c)| c == cluster)
            .map(|(p, _)| *p)
            .collect();
        let Some((min, max)) = bounding_box(&members) else { continue };
        let (min, max) = pad_rectangle(min, max, cfg);
        let (ident, name) = namer.take();
        zones.push(Zone::rectangle(ident, name, kind.zone_kind(), min, max)?);
    }
    Ok(zones)
}

fn pad_rectangle(mut min: GroundPoint, mut max: GroundPoint, cfg: &ZoneLearningConfig) -> (GroundPoint, GroundPoint) {
    let margin = cfg.margin_fraction * min.distance(&max);
    let pad_x = if max.x - min.x + 2.0 * margin > 0.0 { margin } else { cfg.min_margin };
    let pad_y = if max.y - min.y + 2.0 * margin > 0.0 { margin } else { cfg.min_margin };
    min.x -= pad_x;
    max.x += pad_x;
    min.y -= pad_y;
    max.y += pad_y;
    (min, max)
}

fn rect_intersection_area(a: &(GroundPoint, GroundPoint), b: &(GroundPoint, GroundPoint)) -> f64 {
    let w = a.1.x.min(b.1.x) - a.0.x.max(b.0.x);
    let h = a.1.y.min(b.1.y) - a.0.y.max(b.0.y);
    if w > 0.0 && h > 0.0 {
        w * h
    } else {
        0.0
    }
}

fn rect_area(r: &(GroundPoint, GroundPoint)) -> f64 {
    (r.1.x - r.0.x) * (r.1.y - r.0.y)
}

/// Replaces each lost/found pair whose rectangles overlap by more than
/// `overlap_fraction` of the smaller one with a single lost-found zone
/// spanning both. The merged zone takes the lost zone's ident and name.
/// Pairs are formed greedily in lost-ident order, each found zone at most once.
pub fn merge_lost_found(lost: Vec<Zone>, found: Vec<Zone>, overlap_fraction: f64) -> Result<Vec<Zone>> {
    let mut found_used = vec![false; found.len()];
    let mut out = Vec::with_capacity(lost.len() + found.len());
    let mut lost = lost;
    lost.sort_by_key(Zone::ident);
    for l in lost {
        let lb = l.bounds();
        let partner = found
            .iter()
            .enumerate()
            .filter(|(i, _)| !found_used[*i])
            .map(|(i, f)| {
                let fb = f.bounds();
                (i, rect_intersection_area(&lb, &fb) / rect_area(&lb).min(rect_area(&fb)))
            })
            .filter(|&(_, frac)| frac > overlap_fraction)
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        match partner {
            Some((i, _)) => {
                found_used[i] = true;
                let fb = found[i].bounds();
                let min = GroundPoint::new(lb.0.x.min(fb.0.x), lb.0.y.min(fb.0.y));
                let max = GroundPoint::new(lb.1.x.max(fb.1.x), lb.1.y.max(fb.1.y));
                out.push(Zone::rectangle(l.ident(), l.name(), ZoneKind::LostFound, min, max)?);
            }
            None => out.push(l),
        }
    }
    out.extend(found.into_iter().zip(found_used).filter(|(_, used)| !used).map(|(f, _)| f));
    out.sort_by_key(Zone::ident);
    Ok(out)
}

/// Full zone-learning stage: collect, choose `k`, cluster, outline, merge.
/// Returned zones use idents from `scene.next_ident()` upwards.
/// Rescales each axis to zero mean and unit variance; an axis with no
/// spread is only centred.
pub fn standardize(points: &[GroundPoint]) -> Vec<GroundPoint> {
    if points.is_empty() {
        return Vec::new();
    }
    let n = points.len() as f64;
    let axis = |get: fn(&GroundPoint) -> f64| {
        let mean = points.iter().map(get).sum::<f64>() / n;
        let var = points.iter().map(|p| (get(p) - mean) * (get(p) - mean)).sum::<f64>() / n;
        let sd = libm::sqrt(var);
        (mean, if sd > 0.0 { sd } else { 1.0 })
    };
    let (mx, sx) = axis(|p| p.x);
    let (my, sy) = axis(|p| p.y);
    points.iter().map(|p| GroundPoint::new((p.x - mx) / sx, (p.y - my) / sy)).collect()
}

/// Clusters lost and found positions and outlines the clusters as zones.
/// Cluster count selection and k-means run on per-axis standardized
/// coordinates, so that an elongated patch of events (say, along the edge of
/// an occluder) is one zone rather than a row of slivers; outlines use the
/// original coordinates.
pub fn learn_zones(trajs: &[Trajectory], scene: &SceneModel, cfg: &ZoneLearningConfig, seed: u64) -> Result<Vec<Zone>> {
    let mut namer = ZoneNamer::new(scene.next_ident());
    let mut learned = [Vec::new(), Vec::new()];
    for (slot, kind) in [EventPointKind::Lost, EventPointKind::Found].into_iter().enumerate() {
        let points = collect_event_points(trajs, scene, kind);
        if points.is_empty() {
            continue;
        }
        let kind_seed = seed ^ (slot as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let scaled = standardize(&points);
        let k = select_k(&scaled, cfg.k_max, kind_seed)?;
        let model = kmeans(&scaled, k, kind_seed)?;
        learned[slot] = build_zones(&model, &points, kind, &mut namer, cfg)?;
    }
    let [lost, found] = learned;
    merge_lost_found(lost, found, cfg.overlap_fraction)
}
