//! Synthetic scenes with injected tracking failures.
//!
//! Agents walk in straight lines from an entry zone to an exit zone. When a
//! path enters an occluder the track is cut with probability `p_loss`: the
//! first fragment ends with a `Lost` event at the last observation before the
//! occluder, and a new fragment with a fresh id starts after a uniformly
//! drawn gap. Short erratic noise tracks can be mixed in. Every fragment
//! carries its true agent and a ground-truth class.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::confidence::TrajectoryClass;
use crate::error::{Error, Result};
use crate::features::{estimate_neighbor_counts, FeatureConfig};
use crate::model::{
    bounding_box, ClassLabel, EventKind, GroundPoint, Observation, SceneModel, TrackEvent, TrackId, Trajectory, Zone,
    ZoneKind,
};

/// Axis-aligned rectangle given by its `[x, y]` corners.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn contains(&self, p: &GroundPoint) -> bool {
        p.x >= self.min[0] && p.x <= self.max[0] && p.y >= self.min[1] && p.y <= self.max[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZoneSpec {
    pub ident: u32,
    pub name: String,
    pub kind: ZoneKind,
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl ZoneSpec {
    pub fn to_zone(&self) -> Result<Zone> {
        Zone::rectangle(
            self.ident,
            self.name.clone(),
            self.kind,
            GroundPoint::new(self.min[0], self.min[1]),
            GroundPoint::new(self.max[0], self.max[1]),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SynthConfig {
    pub zones: Vec<ZoneSpec>,
    pub occluders: Vec<Rect>,
    pub p_loss: f64,
    /// Seconds.
    pub gap_min: f64,
    pub gap_max: f64,
    pub agent_count: usize,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Seconds between observations.
    pub frame_interval: f64,
    /// Mean seconds between agent arrivals.
    pub mean_interarrival: f64,
    /// Noise tracks generated per agent.
    pub noise_track_rate: f64,
    /// Standard deviation of positional jitter.
    pub position_jitter: f64,
    pub neighbor_radius: f64,
    pub neighbor_window: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// A 30 x 4 corridor: entry on the left, exit on the right, one occluder
    /// in the middle.
    fn default() -> Self {
        Self {
            zones: vec![
                ZoneSpec { ident: 1, name: String::from("ZoneEntryLeft"), kind: ZoneKind::Entry, min: [0.0, 0.0], max: [2.0, 4.0] },
                ZoneSpec { ident: 2, name: String::from("ZoneExitRight"), kind: ZoneKind::Exit, min: [28.0, 0.0], max: [30.0, 4.0] },
            ],
            occluders: vec![Rect { min: [12.0, -1.0], max: [16.0, 5.0] }],
            p_loss: 0.5,
            gap_min: 1.0,
            gap_max: 2.0,
            agent_count: 200,
            speed_min: 1.2,
            speed_max: 1.5,
            frame_interval: 0.1,
            mean_interarrival: 5.0,
            noise_track_rate: 0.0,
            position_jitter: 0.01,
            neighbor_radius: 2.0,
            neighbor_window: 0.5,
            seed: 1,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_loss) {
            return Err(Error::InvalidConfig("p_loss must lie in [0, 1]"));
        }
        if self.noise_track_rate.is_nan() || self.noise_track_rate < 0.0 {
            return Err(Error::InvalidConfig("noise_track_rate must be non-negative"));
        }
        if !(0.0 <= self.gap_min && self.gap_min <= self.gap_max) {
            return Err(Error::InvalidConfig("need 0 <= gap_min <= gap_max"));
        }
        if !(0.0 < self.speed_min && self.speed_min <= self.speed_max) {
            return Err(Error::InvalidConfig("need 0 < speed_min <= speed_max"));
        }
        if !(self.frame_interval > 0.0 && self.mean_interarrival >= 0.0 && self.position_jitter >= 0.0) {
            return Err(Error::InvalidConfig("frame_interval must be positive, interarrival and jitter non-negative"));
        }
        Ok(())
    }
}

/// Ground truth for one emitted fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentTruth {
    pub trajectory_id: TrackId,
    /// Walkers are numbered from 0; noise tracks follow.
    pub agent_id: u64,
    /// Position of this fragment within its agent's track.
    pub segment: usize,
    pub class: TrajectoryClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub scene: SceneModel,
    /// Sorted by first observation time; ids are assigned in that order from 1.
    pub trajectories: Vec<Trajectory>,
    /// One entry per trajectory, same order.
    pub truth: Vec<FragmentTruth>,
}

struct Draft {
    observations: Vec<Observation>,
    lost_at_end: bool,
    agent_id: u64,
    segment: usize,
    class: TrajectoryClass,
}

fn uniform_in_zone<R: Rng + ?Sized>(zone: &Zone, rng: &mut R) -> GroundPoint {
    let (min, max) = zone.bounds();
    for _ in 0..100 {
        let p = GroundPoint::new(rng.random_range(min.x..=max.x), rng.random_range(min.y..=max.y));
        if zone.contains(&p) {
            return p;
        }
    }
    zone.outline()[0]
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let zones = cfg.zones.iter().map(ZoneSpec::to_zone).collect::<Result<Vec<_>>>()?;
    let scene = SceneModel::new(zones)?;
    let starts: Vec<&Zone> = scene.zones().iter().filter(|z| z.kind().is_entry_like()).collect();
    let ends: Vec<&Zone> = scene.zones().iter().filter(|z| z.kind().is_exit_like()).collect();
    if starts.is_empty() || ends.is_empty() {
        return Err(Error::InvalidConfig("synthetic scene needs entry-like and exit-like zones"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let jitter = Normal::new(0.0, cfg.position_jitter).map_err(|_| Error::InvalidConfig("position_jitter"))?;
    let size_jitter = Normal::new(0.0, 0.02).expect("constant");
    let dt = cfg.frame_interval;
    let mut drafts: Vec<Draft> = Vec::new();
    let mut arrival = 0.0;

    for agent in 0..cfg.agent_count {
        arrival += cfg.mean_interarrival * rng.random_range(0.5..=1.5);
        let start_zone = starts[rng.random_range(0..starts.len())];
        let candidates: Vec<&&Zone> = ends.iter().filter(|z| z.ident() != start_zone.ident()).collect();
        let end_zone = if candidates.is_empty() { ends[rng.random_range(0..ends.len())] } else { candidates[rng.random_range(0..candidates.len())] };
        let from = uniform_in_zone(start_zone, &mut rng);
        let to = uniform_in_zone(end_zone, &mut rng);
        let speed = rng.random_range(cfg.speed_min..=cfg.speed_max);
        let duration = from.distance(&to) / speed;
        let samples = (duration / dt) as usize + 1;
        let path: Vec<Observation> = (0..samples)
            .map(|i| {
                let elapsed = i as f64 * dt;
                let s = if duration > 0.0 { elapsed / duration } else { 0.0 };
                let t = arrival + elapsed;
                Observation {
                    t,
                    frame: libm::round(t / dt) as u64,
                    position: GroundPoint::new(
                        from.x + (to.x - from.x) * s + jitter.sample(&mut rng),
                        from.y + (to.y - from.y) * s + jitter.sample(&mut rng),
                    ),
                    width: 0.5 * (1.0 + size_jitter.sample(&mut rng)),
                    height: 1.7 * (1.0 + size_jitter.sample(&mut rng)),
                    depth: 0.3 * (1.0 + size_jitter.sample(&mut rng)),
                    class: if rng.random_bool(0.95) { ClassLabel::Person } else { ClassLabel::Unknown },
                }
            })
            .collect();

        // (first index, last index, lost at end)
        let mut segments: Vec<(usize, usize, bool)> = Vec::new();
        let mut handled = vec![false; cfg.occluders.len()];
        let mut seg_start = 0;
        let mut i = 0;
        'walk: while i < samples {
            for (k, occluder) in cfg.occluders.iter().enumerate() {
                if handled[k] || !occluder.contains(&path[i].position) {
                    continue;
                }
                handled[k] = true;
                if i > seg_start && rng.random_bool(cfg.p_loss) {
                    segments.push((seg_start, i - 1, true));
                    let resume = path[i - 1].t + rng.random_range(cfg.gap_min..=cfg.gap_max);
                    seg_start = path.partition_point(|o| o.t < resume);
                    i = seg_start;
                    continue 'walk;
                }
            }
            i += 1;
        }
        if seg_start < samples {
            segments.push((seg_start, samples - 1, false));
        }
        for (segment, &(a, b, lost)) in segments.iter().enumerate() {
            let has_start = segment == 0;
            let has_end = !lost;
            let class = match (has_start, has_end) {
                (true, true) => TrajectoryClass::Complete,
                (true, false) | (false, true) => TrajectoryClass::Incomplete,
                (false, false) => TrajectoryClass::Unreliable,
            };
            drafts.push(Draft { observations: path[a..=b].to_vec(), lost_at_end: lost, agent_id: agent as u64, segment, class });
        }
    }

    let noise_tracks = libm::round(cfg.noise_track_rate * cfg.agent_count as f64) as usize;
    let mut extent: Vec<GroundPoint> = scene.zones().iter().flat_map(|z| z.outline().iter().copied()).collect();
    for o in &cfg.occluders {
        extent.push(GroundPoint::new(o.min[0], o.min[1]));
        extent.push(GroundPoint::new(o.max[0], o.max[1]));
    }
    let (lo, hi) = bounding_box(&extent).expect("scene has zones");
    let horizon = arrival.max(1.0);
    for n in 0..noise_tracks {
        let t0 = rng.random_range(0.0..horizon);
        let steps = (rng.random_range(1.0..4.0) / dt) as usize + 1;
        let mut p = GroundPoint::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y));
        let mut heading = rng.random_range(0.0..core::f64::consts::TAU);
        let observations = (0..steps)
            .map(|i| {
                if i > 0 {
                    heading += rng.random_range(-2.5..2.5);
                    let step = rng.random_range(0.1..0.4);
                    p.x += step * libm::cos(heading);
                    p.y += step * libm::sin(heading);
                }
                let t = t0 + i as f64 * dt;
                Observation {
                    t,
                    frame: libm::round(t / dt) as u64,
                    position: p,
                    width: 0.5 * rng.random_range(0.4..1.6),
                    height: 1.7 * rng.random_range(0.4..1.6),
                    depth: 0.3 * rng.random_range(0.4..1.6),
                    class: if rng.random_bool(0.7) { ClassLabel::Other } else { ClassLabel::Unknown },
                }
            })
            .collect();
        drafts.push(Draft {
            observations,
            lost_at_end: false,
            agent_id: (cfg.agent_count + n) as u64,
            segment: 0,
            class: TrajectoryClass::Noise,
        });
    }

    drafts.sort_by(|a, b| {
        a.observations[0].t.total_cmp(&b.observations[0].t).then(a.agent_id.cmp(&b.agent_id)).then(a.segment.cmp(&b.segment))
    });

    let mut trajectories = Vec::with_capacity(drafts.len());
    let mut truth = Vec::with_capacity(drafts.len());
    for (idx, draft) in drafts.into_iter().enumerate() {
        let id = TrackId(idx as u64 + 1);
        let first = &draft.observations[0];
        let last = &draft.observations[draft.observations.len() - 1];
        let end_kind = if draft.lost_at_end { EventKind::Lost } else { EventKind::Ended };
        let events = vec![
            TrackEvent { kind: EventKind::FirstDetected, t: first.t, position: first.position, neighbor_count: 0 },
            TrackEvent { kind: end_kind, t: last.t, position: last.position, neighbor_count: 0 },
        ];
        trajectories.push(Trajectory::new(id, draft.observations, events)?);
        truth.push(FragmentTruth { trajectory_id: id, agent_id: draft.agent_id, segment: draft.segment, class: draft.class });
    }

    let neighbors = FeatureConfig { neighbor_radius: cfg.neighbor_radius, neighbor_window: cfg.neighbor_window, ..FeatureConfig::default() };
    estimate_neighbor_counts(&mut trajectories, &neighbors);
    Ok(SynthOutput { scene, trajectories, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(p_loss: f64, noise: f64) -> SynthConfig {
        SynthConfig { agent_count: 30, p_loss, noise_track_rate: noise, ..SynthConfig::default() }
    }

    #[test]
    fn no_losses_no_noise() {
        let out = generate(&small(0.0, 0.0)).unwrap();
        assert_eq!(out.trajectories.len(), 30);
        assert!(out.truth.iter().all(|t| t.class == TrajectoryClass::Complete));
    }

    #[test]
    fn certain_loss_splits_every_agent() {
        let out = generate(&small(1.0, 0.0)).unwrap();
        assert_eq!(out.trajectories.len(), 60);
        for agent in 0..30 {
            let frags: Vec<&FragmentTruth> = out.truth.iter().filter(|t| t.agent_id == agent).collect();
            assert_eq!(frags.len(), 2);
        }
        let lost = out.trajectories.iter().filter(|t| t.final_loss().is_some()).count();
        assert_eq!(lost, 30);
    }

    #[test]
    fn fragments_are_disjoint_and_ordered() {
        let out = generate(&SynthConfig { noise_track_rate: 0.2, ..small(0.5, 0.0) }).unwrap();
        for agent in 0..30u64 {
            let frags: Vec<&Trajectory> = out
                .truth
                .iter()
                .zip(&out.trajectories)
                .filter(|(t, _)| t.agent_id == agent)
                .map(|(_, tr)| tr)
                .collect();
            for w in frags.windows(2) {
                let gap = w[1].first().t - w[0].last().t;
                assert!((1.0 - 1e-9..=2.0 + 0.1 + 1e-9).contains(&gap), "gap {gap}");
            }
        }
        assert_eq!(out.truth.iter().filter(|t| t.class == TrajectoryClass::Noise).count(), 6);
        assert!(out.trajectories.windows(2).all(|w| w[0].first().t <= w[1].first().t));
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig { noise_track_rate: 0.1, ..small(0.5, 0.0) };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate(&SynthConfig { p_loss: 2.0, ..SynthConfig::default() }).is_err());
        assert!(generate(&SynthConfig { gap_min: 3.0, gap_max: 1.0, ..SynthConfig::default() }).is_err());
    }
}
