//! Zone triplets: (start, lost, found) zone sequences observed on complete
//! trajectories, together with the transit-time window between the lost and
//! found zones.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::confidence::Scorer;
use crate::model::{SceneModel, Trajectory, ZoneKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneTriplet {
    pub start_zone: u32,
    pub lost_zone: u32,
    pub found_zone: u32,
    /// Seconds from leaving the lost zone to entering the found zone.
    pub min_time: f64,
    /// Seconds from entering the lost zone to leaving the found zone.
    pub max_time: f64,
    /// Number of complete trajectories behind this triplet; higher is higher priority.
    pub support: usize,
}

/// The zones and crossing times one trajectory produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracedPath {
    pub start_zone: u32,
    pub lost_zone: u32,
    pub found_zone: u32,
    pub t_enter_lost: f64,
    pub t_exit_lost: f64,
    pub t_enter_found: f64,
    pub t_leave_found: f64,
}

/// How per-trajectory times are combined into a triplet window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WindowMode {
    /// Average of the per-trajectory minima and maxima.
    #[default]
    Mean,
    /// Smallest minimum and largest maximum.
    MinMax,
}

/// Confidence above the threshold and a start inside an entry or in/out zone.
pub fn is_complete(traj: &Trajectory, cv: f64, scene: &SceneModel, complete_threshold: f64) -> bool {
    cv > complete_threshold && scene.any_containing(&traj.first().position, ZoneKind::is_entry_like)
}

/// Walks the observations: start zone of the first observation, first
/// lost-like zone entered, then the first found-like zone entered strictly
/// after the observation at which the track left the lost zone. A zone is
/// entered at the first observation inside it and left at the first
/// observation outside it; a track that ends inside its found zone leaves
/// it at its last observation.
pub fn trace_triplet(traj: &Trajectory, scene: &SceneModel) -> Option<TracedPath> {
    let obs = traj.observations();
    let start = scene.first_containing(&traj.first().position, ZoneKind::is_entry_like)?;

    let (enter_lost, lost) = obs
        .iter()
        .enumerate()
        .find_map(|(i, o)| scene.first_containing(&o.position, ZoneKind::is_lost_like).map(|z| (i, z)))?;
    let exit_lost = enter_lost + obs[enter_lost..].iter().position(|o| !lost.contains(&o.position))?;

    let (enter_found, found) = obs
        .iter()
        .enumerate()
        .skip(exit_lost + 1)
        .find_map(|(i, o)| scene.first_containing(&o.position, ZoneKind::is_found_like).map(|z| (i, z)))?;
    let leave_found = obs[enter_found..]
        .iter()
        .position(|o| !found.contains(&o.position))
        .map_or(obs.len() - 1, |off| enter_found + off);

    Some(TracedPath {
        start_zone: start.ident(),
        lost_zone: lost.ident(),
        found_zone: found.ident(),
        t_enter_lost: obs[enter_lost].t,
        t_exit_lost: obs[exit_lost].t,
        t_enter_found: obs[enter_found].t,
        t_leave_found: obs[leave_found].t,
    })
}

/// Groups traced paths by zone sequence and orders the triplets by support
/// (descending), then by zone idents.
pub fn build_triplets(paths: &[TracedPath], mode: WindowMode) -> Vec<ZoneTriplet> {
    let mut groups: BTreeMap<(u32, u32, u32), Vec<(f64, f64)>> = BTreeMap::new();
    for p in paths {
        groups
            .entry((p.start_zone, p.lost_zone, p.found_zone))
            .or_default()
            .push((p.t_enter_found - p.t_exit_lost, p.t_leave_found - p.t_enter_lost));
    }
    let mut triplets: Vec<ZoneTriplet> = groups
        .into_iter()
        .map(|((start_zone, lost_zone, found_zone), windows)| {
            let n = windows.len() as f64;
            let (min_time, max_time) = match mode {
                WindowMode::Mean => (
                    windows.iter().map(|w| w.0).sum::<f64>() / n,
                    windows.iter().map(|w| w.1).sum::<f64>() / n,
                ),
                WindowMode::MinMax => (
                    windows.iter().map(|w| w.0).fold(f64::INFINITY, f64::min),
                    windows.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max),
                ),
            };
            ZoneTriplet { start_zone, lost_zone, found_zone, min_time, max_time, support: windows.len() }
        })
        .collect();
    // Stable: equal support keeps the ascending key order from the map.
    triplets.sort_by_key(|t| core::cmp::Reverse(t.support));
    triplets
}

/// Traces every complete trajectory and builds the prioritized triplet list.
pub fn learn_triplets(trajs: &[Trajectory], scorer: &Scorer<'_>, complete_threshold: f64, mode: WindowMode) -> Vec<ZoneTriplet> {
    let paths: Vec<TracedPath> = trajs
        .iter()
        .filter(|t| is_complete(t, scorer.confidence(t), scorer.scene, complete_threshold))
        .filter_map(|t| trace_triplet(t, scorer.scene))
        .collect();
    build_triplets(&paths, mode)
}
