//! Domain types shared by every stage: ground-plane points, observations,
//! trajectories, zones and the learned scene model.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::features::NormalizationStats;
use crate::triplets::ZoneTriplet;

/// A point on the ground plane. `z` is carried through IO but all geometry is 2D.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GroundPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn distance(&self, other: &GroundPoint) -> f64 {
        libm::hypot(other.x - self.x, other.y - self.y)
    }

    pub fn distance_squared(&self, other: &GroundPoint) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Person,
    Other,
    Unknown,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Person => "person",
            ClassLabel::Other => "other",
            ClassLabel::Unknown => "unknown",
        }
    }
}

/// One tracker output for one object at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Seconds.
    pub t: f64,
    /// Source frame index, kept for reporting only.
    pub frame: u64,
    pub position: GroundPoint,
    pub width: f64,
    pub height: f64,
    pub depth: f64,
    pub class: ClassLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    FirstDetected,
    Lost,
    Found,
    Ended,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::FirstDetected => "first",
            EventKind::Lost => "lost",
            EventKind::Found => "found",
            EventKind::Ended => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackEvent {
    pub kind: EventKind,
    pub t: f64,
    pub position: GroundPoint,
    /// Mobile objects near the tracked one at this instant.
    pub neighbor_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A validated, time-ordered track.
///
/// Invariants checked by [`Trajectory::new`]: at least one observation,
/// strictly increasing observation times, non-decreasing event times, exactly
/// one `FirstDetected`, at most one `Ended`, and `Lost`/`Found` events that
/// alternate starting with `Lost`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: TrackId,
    observations: Vec<Observation>,
    events: Vec<TrackEvent>,
}

impl Trajectory {
    pub fn new(id: TrackId, observations: Vec<Observation>, events: Vec<TrackEvent>) -> Result<Self> {
        let invalid = |reason| Err(Error::InvalidTrajectory { id, reason });
        if observations.is_empty() {
            return invalid("no observations");
        }
        for obs in &observations {
            if !(obs.t.is_finite() && obs.t >= 0.0) {
                return invalid("timestamps must be finite and non-negative");
            }
            if !obs.position.is_finite() {
                return invalid("non-finite position");
            }
            if !(obs.width >= 0.0 && obs.height >= 0.0 && obs.depth >= 0.0) {
                return invalid("negative object dimension");
            }
        }
        if observations.windows(2).any(|w| w[1].t <= w[0].t) {
            return invalid("observations are not strictly time-ordered");
        }
        if events.windows(2).any(|w| w[1].t < w[0].t) {
            return invalid("events are not time-ordered");
        }
        let count = |kind| events.iter().filter(|e| e.kind == kind).count();
        if count(EventKind::FirstDetected) != 1 {
            return invalid("expected exactly one first-detected event");
        }
        if count(EventKind::Ended) > 1 {
            return invalid("more than one end event");
        }
        let mut lost_open = false;
        for event in &events {
            match event.kind {
                EventKind::Lost if lost_open => return invalid("two lost events without a found event"),
                EventKind::Lost => lost_open = true,
                EventKind::Found if !lost_open => return invalid("found event without a preceding lost event"),
                EventKind::Found => lost_open = false,
                _ => {}
            }
        }
        Ok(Self { id, observations, events })
    }

    pub fn id(&self) -> TrackId {
        self.id
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn events(&self) -> &[TrackEvent] {
        &self.events
    }

    pub fn first(&self) -> &Observation {
        &self.observations[0]
    }

    pub fn last(&self) -> &Observation {
        &self.observations[self.observations.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.last().t - self.first().t
    }

    /// The trailing `Lost` event, if the track was lost and never found again.
    pub fn final_loss(&self) -> Option<&TrackEvent> {
        self.events
            .iter()
            .rev()
            .find(|e| matches!(e.kind, EventKind::Lost | EventKind::Found))
            .filter(|e| e.kind == EventKind::Lost)
    }

    pub fn set_neighbor_count(&mut self, event_index: usize, count: u32) {
        self.events[event_index].neighbor_count = count;
    }

    pub fn into_parts(self) -> (TrackId, Vec<Observation>, Vec<TrackEvent>) {
        (self.id, self.observations, self.events)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ZoneKind {
    Entry,
    Exit,
    InOut,
    Lost,
    Found,
    LostFound,
}

impl ZoneKind {
    /// Zones where an object can enter the scene.
    pub fn is_entry_like(self) -> bool {
        matches!(self, ZoneKind::Entry | ZoneKind::InOut)
    }

    pub fn is_exit_like(self) -> bool {
        matches!(self, ZoneKind::Exit | ZoneKind::InOut)
    }

    pub fn is_lost_like(self) -> bool {
        matches!(self, ZoneKind::Lost | ZoneKind::LostFound)
    }

    pub fn is_found_like(self) -> bool {
        matches!(self, ZoneKind::Found | ZoneKind::LostFound)
    }
}

/// A named polygon on the ground plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    ident: u32,
    name: String,
    plane_name: String,
    kind: ZoneKind,
    outline: Vec<GroundPoint>,
}

impl Zone {
    pub fn new(
        ident: u32,
        name: impl Into<String>,
        plane_name: impl Into<String>,
        kind: ZoneKind,
        outline: Vec<GroundPoint>,
    ) -> Result<Self> {
        let invalid = |reason| Err(Error::InvalidZone { ident, reason });
        if outline.len() < 3 {
            return invalid("outline needs at least 3 points");
        }
        if !outline.iter().all(GroundPoint::is_finite) {
            return invalid("non-finite outline point");
        }
        if signed_area(&outline).abs() <= 0.0 {
            return invalid("outline has zero area");
        }
        if !is_simple(&outline) {
            return invalid("outline is self-intersecting");
        }
        Ok(Self {
            ident,
            name: name.into(),
            plane_name: plane_name.into(),
            kind,
            outline,
        })
    }

    /// Axis-aligned rectangle on plane `ground`, wound like the zone files do.
    pub fn rectangle(
        ident: u32,
        name: impl Into<String>,
        kind: ZoneKind,
        min: GroundPoint,
        max: GroundPoint,
    ) -> Result<Self> {
        let outline = alloc::vec![
            GroundPoint::new(min.x, min.y),
            GroundPoint::new(max.x, min.y),
            GroundPoint::new(max.x, max.y),
            GroundPoint::new(min.x, max.y),
        ];
        Self::new(ident, name, "ground", kind, outline)
    }

    pub fn ident(&self) -> u32 {
        self.ident
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn plane_name(&self) -> &str {
        &self.plane_name
    }

    pub fn kind(&self) -> ZoneKind {
        self.kind
    }

    pub fn outline(&self) -> &[GroundPoint] {
        &self.outline
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.outline).abs()
    }

    /// `(min, max)` corners of the outline's bounding box.
    pub fn bounds(&self) -> (GroundPoint, GroundPoint) {
        bounding_box(&self.outline).expect("zone outline is never empty")
    }

    /// Even-odd point-in-polygon test; points on the boundary count as inside.
    pub fn contains(&self, p: &GroundPoint) -> bool {
        let n = self.outline.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.outline[i];
            let b = self.outline[(i + 1) % n];
            if on_segment(&a, &b, p) {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

const BOUNDARY_EPS: f64 = 1e-9;

fn on_segment(a: &GroundPoint, b: &GroundPoint, p: &GroundPoint) -> bool {
    let scale = 1.0 + a.x.abs().max(a.y.abs()).max(b.x.abs()).max(b.y.abs());
    let tol = BOUNDARY_EPS * scale;
    if p.x < a.x.min(b.x) - tol || p.x > a.x.max(b.x) + tol || p.y < a.y.min(b.y) - tol || p.y > a.y.max(b.y) + tol {
        return false;
    }
    let len = a.distance(b);
    if len == 0.0 {
        return a.distance(p) <= tol;
    }
    let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    (cross / len).abs() <= tol
}

pub(crate) fn signed_area(outline: &[GroundPoint]) -> f64 {
    let n = outline.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = outline[i];
            let b = outline[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice / 2.0
}

pub(crate) fn bounding_box(points: &[GroundPoint]) -> Option<(GroundPoint, GroundPoint)> {
    let first = points.first()?;
    let mut min = GroundPoint::new(first.x, first.y);
    let mut max = min;
    for p in &points[1..] {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    Some((min, max))
}

fn orientation(a: &GroundPoint, b: &GroundPoint, c: &GroundPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(p1: &GroundPoint, p2: &GroundPoint, q1: &GroundPoint, q2: &GroundPoint) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn is_simple(outline: &[GroundPoint]) -> bool {
    let n = outline.len();
    for i in 0..n {
        let (a1, a2) = (&outline[i], &outline[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (&outline[j], &outline[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// The learned scene context: manual and learned zones, normalization
/// statistics and the triplet store.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneModel {
    zones: Vec<Zone>,
    pub norm_stats: Option<NormalizationStats>,
    pub triplets: Vec<ZoneTriplet>,
}

impl SceneModel {
    /// Zones are kept sorted by ident; duplicate idents are rejected.
    pub fn new(mut zones: Vec<Zone>) -> Result<Self> {
        zones.sort_by_key(Zone::ident);
        if let Some(w) = zones.windows(2).find(|w| w[0].ident == w[1].ident) {
            return Err(Error::DuplicateZoneIdent(w[0].ident));
        }
        Ok(Self { zones, norm_stats: None, triplets: Vec::new() })
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn zone(&self, ident: u32) -> Option<&Zone> {
        self.zones
            .binary_search_by_key(&ident, Zone::ident)
            .ok()
            .map(|i| &self.zones[i])
    }

    /// Adds zones, keeping ident order and uniqueness.
    pub fn extend(&mut self, zones: impl IntoIterator<Item = Zone>) -> Result<()> {
        let mut all = core::mem::take(&mut self.zones);
        all.extend(zones);
        let rebuilt = SceneModel::new(all)?;
        self.zones = rebuilt.zones;
        Ok(())
    }

    /// One past the largest ident in use.
    pub fn next_ident(&self) -> u32 {
        self.zones.last().map_or(0, |z| z.ident + 1)
    }

    /// All zones containing `p`, optionally restricted to `kinds`, by ascending ident.
    pub fn zones_containing(&self, p: &GroundPoint, kinds: Option<&[ZoneKind]>) -> Vec<&Zone> {
        self.zones
            .iter()
            .filter(|z| kinds.is_none_or(|k| k.contains(&z.kind)))
            .filter(|z| z.contains(p))
            .collect()
    }

    /// Lowest-ident zone containing `p` whose kind satisfies `pred`.
    pub fn first_containing(&self, p: &GroundPoint, pred: impl Fn(ZoneKind) -> bool) -> Option<&Zone> {
        self.zones.iter().find(|z| pred(z.kind) && z.contains(p))
    }

    pub fn any_containing(&self, p: &GroundPoint, pred: impl Fn(ZoneKind) -> bool) -> bool {
        self.first_containing(p, pred).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_square() -> Zone {
        Zone::rectangle(1, "unit", ZoneKind::Entry, GroundPoint::new(0.0, 0.0), GroundPoint::new(1.0, 1.0)).unwrap()
    }

    // Crossing-number test with an explicit boundary check, written independently.
    fn ray_cast_oracle(outline: &[GroundPoint], p: &GroundPoint) -> bool {
        let n = outline.len();
        for i in 0..n {
            let (a, b) = (outline[i], outline[(i + 1) % n]);
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            let dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
            if cross == 0.0 && dot >= 0.0 && dot <= a.distance_squared(&b) {
                return true;
            }
        }
        let mut crossings = 0;
        for i in 0..n {
            let (a, b) = (outline[i], outline[(i + 1) % n]);
            let straddles = (a.y <= p.y && b.y > p.y) || (b.y <= p.y && a.y > p.y);
            if straddles {
                let t = (p.y - a.y) / (b.y - a.y);
                if p.x < a.x + t * (b.x - a.x) {
                    crossings += 1;
                }
            }
        }
        crossings % 2 == 1
    }

    #[test]
    fn square_membership() {
        let z = unit_square();
        assert!(z.contains(&GroundPoint::new(0.5, 0.5)));
        assert!(!z.contains(&GroundPoint::new(2.0, 2.0)));
        let edge = GroundPoint::new(1.0, 0.5);
        assert!(ray_cast_oracle(z.outline(), &edge));
        assert!(z.contains(&edge));
        assert!(z.contains(&GroundPoint::new(0.0, 0.0)));
    }

    #[test]
    fn zone_validation() {
        let p = GroundPoint::new;
        assert!(Zone::new(1, "a", "ground", ZoneKind::Lost, vec![p(0.0, 0.0), p(1.0, 0.0)]).is_err());
        assert!(Zone::new(1, "a", "ground", ZoneKind::Lost, vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]).is_err());
        let bowtie = vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(Zone::new(1, "a", "ground", ZoneKind::Lost, bowtie).is_err());
        let concave = vec![p(0.0, 0.0), p(4.0, 0.0), p(4.0, 4.0), p(2.0, 1.0), p(0.0, 4.0)];
        let z = Zone::new(1, "a", "ground", ZoneKind::Lost, concave).unwrap();
        assert!(!z.contains(&p(2.0, 3.0)));
        assert!(z.contains(&p(1.0, 2.0)));
    }

    #[test]
    fn zones_containing_orders_by_ident() {
        let r = |id, kind, x0, x1| Zone::rectangle(id, "z", kind, GroundPoint::new(x0, 0.0), GroundPoint::new(x1, 2.0)).unwrap();
        let scene = SceneModel::new(vec![
            r(7, ZoneKind::LostFound, 1.0, 3.0),
            r(3, ZoneKind::Lost, 0.0, 2.0),
            r(5, ZoneKind::Entry, 10.0, 12.0),
        ])
        .unwrap();
        let p = GroundPoint::new(1.5, 1.0);
        let hits: Vec<u32> = scene.zones_containing(&p, None).iter().map(|z| z.ident()).collect();
        let oracle: Vec<u32> = scene.zones().iter().filter(|z| ray_cast_oracle(z.outline(), &p)).map(|z| z.ident()).collect();
        assert_eq!(hits, vec![3, 7]);
        assert_eq!(hits, oracle);
        let entry = GroundPoint::new(11.0, 1.0);
        assert_eq!(scene.zones_containing(&entry, Some(&[ZoneKind::Entry])).len(), 1);
        assert!(scene.zones_containing(&GroundPoint::new(50.0, 50.0), None).is_empty());
        assert!(SceneModel::new(vec![r(1, ZoneKind::Lost, 0.0, 1.0), r(1, ZoneKind::Found, 0.0, 1.0)]).is_err());
    }

    fn obs(t: f64) -> Observation {
        Observation { t, frame: 0, position: GroundPoint::new(t, 0.0), width: 1.0, height: 1.0, depth: 1.0, class: ClassLabel::Person }
    }

    fn ev(kind: EventKind, t: f64) -> TrackEvent {
        TrackEvent { kind, t, position: GroundPoint::new(t, 0.0), neighbor_count: 0 }
    }

    #[test]
    fn trajectory_invariants() {
        let id = TrackId(4);
        let first = ev(EventKind::FirstDetected, 0.0);
        assert!(Trajectory::new(id, vec![], vec![first.clone()]).is_err());
        assert!(Trajectory::new(id, vec![obs(1.0), obs(1.0)], vec![first.clone()]).is_err());
        assert!(Trajectory::new(id, vec![obs(0.0)], vec![]).is_err());
        let found_first = vec![first.clone(), ev(EventKind::Found, 0.5)];
        assert!(Trajectory::new(id, vec![obs(0.0), obs(1.0)], found_first).is_err());
        let ok = vec![first.clone(), ev(EventKind::Lost, 0.5), ev(EventKind::Found, 0.7), ev(EventKind::Lost, 1.0)];
        let t = Trajectory::new(id, vec![obs(0.0), obs(1.0)], ok).unwrap();
        assert_eq!(t.final_loss().map(|e| e.t), Some(1.0));
        let recovered = vec![first, ev(EventKind::Lost, 0.5), ev(EventKind::Found, 0.7)];
        let t = Trajectory::new(id, vec![obs(0.0), obs(1.0)], recovered).unwrap();
        assert!(t.final_loss().is_none());
    }
}
