//! Fusing lost trajectories with tracks that re-appear in found zones.
//!
//! A new track that does not start in an entry or in/out zone but does start
//! in a found (or lost-found) zone is treated as a lost object re-appearing.
//! Triplets ending in that zone are scanned by priority; the first one that
//! has a pooled lost track with the same start and lost zones, lost between
//! `min_time` and `max_time` seconds ago (both bounds exclusive), wins, and
//! the two tracks are fused under the lost track's id.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::confidence::Scorer;
use crate::model::{ClassLabel, EventKind, Observation, SceneModel, TrackEvent, TrackId, Trajectory, ZoneKind};
use crate::triplets::ZoneTriplet;

/// A trajectory waiting to be re-found.
#[derive(Debug, Clone, PartialEq)]
pub struct LostTrackState {
    pub trajectory: Trajectory,
    pub start_zone: u32,
    pub lost_zone: u32,
    pub t_lost: f64,
}

impl LostTrackState {
    /// `None` unless the trajectory ends lost, started in an entry or in/out
    /// zone, and was lost inside a lost or lost-found zone.
    pub fn from_trajectory(trajectory: Trajectory, scene: &SceneModel) -> Option<Self> {
        let loss = trajectory.final_loss()?;
        let lost_zone = scene.first_containing(&loss.position, ZoneKind::is_lost_like)?.ident();
        let start_zone = scene.first_containing(&trajectory.first().position, ZoneKind::is_entry_like)?.ident();
        let t_lost = loss.t;
        Some(Self { trajectory, start_zone, lost_zone, t_lost })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairResult {
    pub fused: Trajectory,
    /// The re-appearing track, absorbed into the recipient.
    pub donor_id: TrackId,
    /// The lost track, whose id the fused trajectory keeps.
    pub recipient_id: TrackId,
    pub triplet: ZoneTriplet,
    /// Confidence of the lost fragment alone.
    pub cv_before: f64,
    pub cv_after: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RepairConfig {
    /// Fill the gap with linearly interpolated observations at the lost
    /// track's median frame interval.
    pub interpolate: bool,
}

/// The found zone a new track appears in, if the appearance is anomalous:
/// not inside any entry or in/out zone, but inside a found or lost-found zone.
pub fn detect_anomalous_appearance(new_traj: &Trajectory, scene: &SceneModel) -> Option<u32> {
    let p = &new_traj.first().position;
    if scene.any_containing(p, ZoneKind::is_entry_like) {
        return None;
    }
    scene.first_containing(p, ZoneKind::is_found_like).map(|z| z.ident())
}

fn median_interval(obs: &[Observation]) -> Option<f64> {
    let mut dts: Vec<f64> = obs.windows(2).map(|w| w[1].t - w[0].t).collect();
    if dts.is_empty() {
        return None;
    }
    dts.sort_by(f64::total_cmp);
    Some(dts[dts.len() / 2])
}

fn gap_fill(from: &Observation, to: &Observation, dt: f64) -> Vec<Observation> {
    let span = to.t - from.t;
    let lerp = |a: f64, b: f64, s: f64| a + (b - a) * s;
    let mut out = Vec::new();
    let mut t = from.t + dt;
    while t < to.t - dt / 2.0 {
        let s = (t - from.t) / span;
        let mut position = from.position;
        position.x = lerp(from.position.x, to.position.x, s);
        position.y = lerp(from.position.y, to.position.y, s);
        out.push(Observation {
            t,
            frame: libm::round(lerp(from.frame as f64, to.frame as f64, s)) as u64,
            position,
            width: lerp(from.width, to.width, s),
            height: lerp(from.height, to.height, s),
            depth: lerp(from.depth, to.depth, s),
            class: ClassLabel::Unknown,
        });
        t += dt;
    }
    out
}

/// Joins `lost` and `new` under the lost track's id. The lost track's end
/// event is dropped, a `Found` event marks the join at `t_now`, and the new
/// track's remaining events follow.
pub fn fuse(lost: &Trajectory, new: &Trajectory, t_now: f64, cfg: &RepairConfig) -> Option<Trajectory> {
    if new.first().t <= lost.last().t {
        return None;
    }
    let mut observations = lost.observations().to_vec();
    if cfg.interpolate {
        if let Some(dt) = median_interval(lost.observations()).filter(|dt| *dt > 0.0) {
            observations.extend(gap_fill(lost.last(), new.first(), dt));
        }
    }
    observations.extend_from_slice(new.observations());

    let mut events: Vec<TrackEvent> = lost.events().iter().filter(|e| e.kind != EventKind::Ended).cloned().collect();
    let appeared = new.events().iter().find(|e| e.kind == EventKind::FirstDetected);
    events.push(TrackEvent {
        kind: EventKind::Found,
        t: t_now,
        position: new.first().position,
        neighbor_count: appeared.map_or(0, |e| e.neighbor_count),
    });
    events.extend(new.events().iter().filter(|e| e.kind != EventKind::FirstDetected).cloned());
    Trajectory::new(lost.id(), observations, events).ok()
}

/// Scans `triplets` (highest priority first) for one ending in
/// `found_zone` with an eligible pooled lost track; the earliest-lost
/// eligible track is fused with `new_traj` and removed from the pool.
pub fn match_and_repair(
    new_traj: &Trajectory,
    found_zone: u32,
    pool: &mut Vec<LostTrackState>,
    triplets: &[ZoneTriplet],
    t_now: f64,
    scorer: &Scorer<'_>,
    cfg: &RepairConfig,
) -> Option<RepairResult> {
    for triplet in triplets.iter().filter(|t| t.found_zone == found_zone) {
        let candidate = pool
            .iter()
            .enumerate()
            .filter(|(_, s)| s.start_zone == triplet.start_zone && s.lost_zone == triplet.lost_zone)
            .filter(|(_, s)| {
                let elapsed = t_now - s.t_lost;
                elapsed > triplet.min_time && elapsed < triplet.max_time
            })
            .filter(|(_, s)| s.trajectory.last().t < new_traj.first().t)
            .min_by(|a, b| a.1.t_lost.total_cmp(&b.1.t_lost));
        let Some((index, _)) = candidate else { continue };
        let state = pool.remove(index);
        let fused = fuse(&state.trajectory, new_traj, t_now, cfg)?;
        return Some(RepairResult {
            cv_before: scorer.confidence(&state.trajectory),
            cv_after: scorer.confidence(&fused),
            fused,
            donor_id: new_traj.id(),
            recipient_id: state.trajectory.id(),
            triplet: triplet.clone(),
        });
    }
    None
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepairReport {
    pub input_trajectories: usize,
    pub anomalous_appearances: usize,
    pub fusions: usize,
    pub cv_increased: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome {
    /// Input order, with donors removed and recipients replaced by their fused form.
    pub trajectories: Vec<Trajectory>,
    pub results: Vec<RepairResult>,
    pub report: RepairReport,
}

/// Replays the trajectories in time order. A trajectory joins the lost pool
/// at its final unanswered `Lost` event; every appearance is checked for
/// anomaly and matched against the pool. A fused trajectory that is lost
/// again re-enters the pool.
pub fn repair_batch(
    trajs: &[Trajectory],
    scene: &SceneModel,
    triplets: &[ZoneTriplet],
    scorer: &Scorer<'_>,
    cfg: &RepairConfig,
) -> RepairOutcome {
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Step {
        Lose,
        Appear,
    }

    let mut slots: Vec<Option<Trajectory>> = trajs.iter().cloned().map(Some).collect();
    // Slot currently holding input trajectory i's observations.
    let mut owner: Vec<usize> = (0..trajs.len()).collect();
    let mut slot_of: BTreeMap<TrackId, usize> = BTreeMap::new();
    for (i, t) in trajs.iter().enumerate() {
        slot_of.entry(t.id()).or_insert(i);
    }

    let mut steps: Vec<(f64, Step, usize)> = Vec::new();
    for (i, t) in trajs.iter().enumerate() {
        steps.push((t.first().t, Step::Appear, i));
        if let Some(loss) = t.final_loss() {
            steps.push((loss.t, Step::Lose, i));
        }
    }
    steps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut pool: Vec<LostTrackState> = Vec::new();
    let mut results = Vec::new();
    let mut report = RepairReport { input_trajectories: trajs.len(), ..RepairReport::default() };

    for (_, step, i) in steps {
        match step {
            Step::Lose => {
                let slot = owner[i];
                if let Some(state) = slots[slot].clone().and_then(|t| LostTrackState::from_trajectory(t, scene)) {
                    pool.push(state);
                }
            }
            Step::Appear => {
                let Some(new_traj) = slots[i].as_ref() else { continue };
                let Some(found_zone) = detect_anomalous_appearance(new_traj, scene) else { continue };
                report.anomalous_appearances += 1;
                let t_now = new_traj.first().t;
                let Some(result) = match_and_repair(new_traj, found_zone, &mut pool, triplets, t_now, scorer, cfg) else {
                    continue;
                };
                let target = slot_of[&result.recipient_id];
                slots[i] = None;
                for o in owner.iter_mut().filter(|o| **o == i) {
                    *o = target;
                }
                slots[target] = Some(result.fused.clone());
                report.fusions += 1;
                if result.cv_after > result.cv_before {
                    report.cv_increased += 1;
                }
                results.push(result);
            }
        }
    }

    RepairOutcome { trajectories: slots.into_iter().flatten().collect(), results, report }
}
