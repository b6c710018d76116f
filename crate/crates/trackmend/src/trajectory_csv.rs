//! Trajectory record files: UTF-8 CSV, one observation per line, with a
//! header naming the columns.
//!
//! ```text
//! trajectory_id,frame,t,x,y,z,width,height,depth,class_label,event_flag,neighbor_count
//! 7,120,12.0,1.5,2.0,0,0.5,1.7,0.3,person,first,0
//! ```
//!
//! `class_label` is `person`, `other` or `unknown`. `event_flag` is `none`,
//! `first`, `lost`, `found` or `end`; several events on one observation are
//! joined with `|` (`first|end` for a single-observation track).
//! `neighbor_count` applies to the events of its line and may be left out
//! entirely, in which case [`TrajectoryFile::into_trajectories`] estimates
//! it. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use trackmend_core::features::{estimate_neighbor_counts, FeatureConfig};
use trackmend_core::synth::FragmentTruth;
use trackmend_core::{ClassLabel, EventKind, GroundPoint, Observation, TrackEvent, TrackId, Trajectory, TrajectoryClass};

use crate::error::{FormatError, Result};

pub const HEADER: [&str; 12] =
    ["trajectory_id", "frame", "t", "x", "y", "z", "width", "height", "depth", "class_label", "event_flag", "neighbor_count"];

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    /// In order of each id's first record.
    pub trajectories: Vec<Trajectory>,
    pub has_neighbor_counts: bool,
}

impl TrajectoryFile {
    /// The trajectories, with neighbor counts estimated from co-occurring
    /// tracks when the file did not carry them.
    pub fn into_trajectories(self, cfg: &FeatureConfig) -> Vec<Trajectory> {
        let mut trajectories = self.trajectories;
        if !self.has_neighbor_counts {
            estimate_neighbor_counts(&mut trajectories, cfg);
        }
        trajectories
    }

    pub fn observation_count(&self) -> usize {
        self.trajectories.iter().map(|t| t.observations().len()).sum()
    }
}

fn class_label(s: &str) -> Option<ClassLabel> {
    [ClassLabel::Person, ClassLabel::Other, ClassLabel::Unknown].into_iter().find(|c| c.as_str() == s)
}

fn event_kind(s: &str) -> Option<EventKind> {
    [EventKind::FirstDetected, EventKind::Lost, EventKind::Found, EventKind::Ended].into_iter().find(|k| k.as_str() == s)
}

struct Columns {
    index: [Option<usize>; 12],
}

impl Columns {
    fn new(header: &csv::StringRecord, line: usize) -> Result<Self> {
        let mut index = [None; 12];
        for (slot, name) in index.iter_mut().zip(HEADER) {
            *slot = header.iter().position(|h| h.trim() == name);
        }
        if let Some(missing) = HEADER[..11].iter().zip(&index).find(|(_, i)| i.is_none()).map(|(n, _)| n) {
            return Err(FormatError::Syntax { line, message: format!("header lacks column `{missing}`") });
        }
        Ok(Self { index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: usize) -> Option<&'r str> {
        self.index[column].and_then(|i| record.get(i)).map(str::trim)
    }
}

struct Builder {
    line: usize,
    observations: Vec<Observation>,
    events: Vec<TrackEvent>,
}

/// Parses a trajectory file. Records of one id must be strictly time
/// ordered and carry exactly one `first` flag.
pub fn read_trajectories(text: &str) -> Result<TrajectoryFile> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(false).from_reader(text.as_bytes());
    let header_line = reader.headers()?.position().map_or(1, |p| p.line() as usize);
    let columns = Columns::new(&reader.headers()?.clone(), header_line)?;
    let has_neighbor_counts = columns.index[11].is_some();

    let mut order: Vec<u64> = Vec::new();
    let mut builders: BTreeMap<u64, Builder> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |column: usize| columns.get(&record, column).unwrap_or("");
        let syntax = |message: String| FormatError::Syntax { line, message };
        let float = |column: usize| -> Result<f64> {
            field(column)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| syntax(format!("column `{}` is not a finite number: `{}`", HEADER[column], field(column))))
        };

        let id: u64 = field(0).parse().map_err(|_| syntax(format!("trajectory_id is not an integer: `{}`", field(0))))?;
        let invalid = |message: &str| FormatError::Trajectory { line, id, message: message.to_owned() };
        let frame: u64 = field(1).parse().map_err(|_| syntax(format!("frame is not an integer: `{}`", field(1))))?;
        let t = float(2)?;
        let position = GroundPoint { x: float(3)?, y: float(4)?, z: float(5)? };
        let (width, height, depth) = (float(6)?, float(7)?, float(8)?);
        if t < 0.0 {
            return Err(invalid("negative timestamp"));
        }
        if width < 0.0 || height < 0.0 || depth < 0.0 {
            return Err(invalid("negative object dimension"));
        }
        let class = class_label(field(9)).ok_or_else(|| syntax(format!("unknown class_label `{}`", field(9))))?;
        let neighbor_count: u32 = match columns.get(&record, 11) {
            None | Some("") => 0,
            Some(v) => v.parse().map_err(|_| syntax(format!("neighbor_count is not a non-negative integer: `{v}`")))?,
        };

        let builder = builders.entry(id).or_insert_with(|| {
            order.push(id);
            Builder { line, observations: Vec::new(), events: Vec::new() }
        });
        if builder.observations.last().is_some_and(|prev| prev.t >= t) {
            return Err(invalid("timestamps are not strictly increasing"));
        }
        let flags = field(10);
        if flags != "none" {
            for flag in flags.split('|').map(str::trim) {
                let kind = event_kind(flag).ok_or_else(|| syntax(format!("unknown event_flag `{flag}`")))?;
                builder.events.push(TrackEvent { kind, t, position, neighbor_count });
            }
        }
        builder.observations.push(Observation { t, frame, position, width, height, depth, class });
    }

    let mut trajectories = Vec::with_capacity(order.len());
    for id in order {
        let b = builders.remove(&id).expect("every id has a builder");
        let invalid = |message: String| FormatError::Trajectory { line: b.line, id, message };
        let firsts = b.events.iter().filter(|e| e.kind == EventKind::FirstDetected).count();
        if firsts != 1 {
            return Err(invalid(format!("expected exactly one `first` flag, found {firsts}")));
        }
        let trajectory = Trajectory::new(TrackId(id), b.observations, b.events).map_err(|e| invalid(e.to_string()))?;
        trajectories.push(trajectory);
    }
    Ok(TrajectoryFile { trajectories, has_neighbor_counts })
}

/// Writes trajectories one observation per line, in trajectory order.
pub fn write_trajectories(trajectories: &[Trajectory]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for traj in trajectories {
        let mut events = traj.events().iter().peekable();
        for o in traj.observations() {
            let mut flags: Vec<&str> = Vec::new();
            let mut neighbors = 0;
            while let Some(e) = events.next_if(|e| e.t <= o.t) {
                if flags.is_empty() {
                    neighbors = e.neighbor_count;
                }
                flags.push(e.kind.as_str());
            }
            let flag = if flags.is_empty() { "none".to_owned() } else { flags.join("|") };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                traj.id(),
                o.frame,
                o.t,
                o.position.x,
                o.position.y,
                o.position.z,
                o.width,
                o.height,
                o.depth,
                o.class.as_str(),
                flag,
                neighbors
            );
        }
    }
    out
}

pub const TRUTH_HEADER: &str = "trajectory_id,agent_id,segment,class";

/// Ground truth written by the simulator.
pub fn write_truth(truth: &[FragmentTruth]) -> String {
    let mut out = String::from(TRUTH_HEADER);
    out.push('\n');
    for t in truth {
        let _ = writeln!(out, "{},{},{},{}", t.trajectory_id, t.agent_id, t.segment, t.class.as_str());
    }
    out
}

/// Reads ground-truth confidences keyed by trajectory id. The file needs a
/// `trajectory_id` column and either a numeric `ground_truth` column or a
/// `class` column (complete / incomplete / unreliable / noise, mapped to the
/// middle of each class band).
pub fn read_ground_truth(text: &str) -> Result<BTreeMap<TrackId, f64>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let syntax = |line: usize, message: String| FormatError::Syntax { line, message };
    let id_col = column("trajectory_id").ok_or_else(|| syntax(1, "header lacks column `trajectory_id`".into()))?;
    let (value_col, numeric) = match (column("ground_truth"), column("class")) {
        (Some(c), _) => (c, true),
        (None, Some(c)) => (c, false),
        (None, None) => return Err(syntax(1, "header needs a `ground_truth` or a `class` column".into())),
    };

    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let id_text = record.get(id_col).unwrap_or("");
        let id: u64 = id_text.parse().map_err(|_| syntax(line, format!("trajectory_id is not an integer: `{id_text}`")))?;
        let raw = record.get(value_col).unwrap_or("");
        let value = if numeric {
            raw.parse::<f64>().ok().filter(|v| (0.0..=1.0).contains(v)).ok_or_else(|| syntax(line, format!("ground_truth must lie in [0, 1]: `{raw}`")))?
        } else {
            TrajectoryClass::parse(raw).ok_or_else(|| syntax(line, format!("unknown class `{raw}`")))?.ground_truth()
        };
        if out.insert(TrackId(id), value).is_some() {
            return Err(syntax(line, format!("duplicate trajectory_id {id}")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "trajectory_id,frame,t,x,y,z,width,height,depth,class_label,event_flag,neighbor_count\n";

    #[test]
    fn single_trajectory() {
        let text = format!("{HEAD}1,0,0.0,0,0,0,0.5,1.7,0.3,person,first,2\n1,1,0.5,1,0,0,0.5,1.7,0.3,person,none,0\n1,2,1.0,2,0,0,0.5,1.7,0.3,other,end,1\n");
        let file = read_trajectories(&text).unwrap();
        assert!(file.has_neighbor_counts);
        assert_eq!(file.trajectories.len(), 1);
        let t = &file.trajectories[0];
        assert_eq!(t.observations().len(), 3);
        let kinds: Vec<EventKind> = t.events().iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::FirstDetected, EventKind::Ended]);
        assert_eq!(t.events()[0].neighbor_count, 2);
        assert_eq!(t.events()[1].neighbor_count, 1);
    }

    #[test]
    fn empty_body() {
        assert!(read_trajectories(HEAD).unwrap().trajectories.is_empty());
    }

    #[test]
    fn interleaved_ids_with_a_loss() {
        let text = format!(
            "{HEAD}# two walkers\n\
             1,0,0,0,0,0,1,1,1,person,first,0\n\
             2,0,0,5,5,0,1,1,1,person,first,0\n\
             1,1,1,1,0,0,1,1,1,person,lost,1\n\
             2,1,1,6,5,0,1,1,1,person,none,0\n\
             1,2,3,2,0,0,1,1,1,person,found,0\n\
             2,2,2,7,5,0,1,1,1,person,end,0\n\
             1,3,4,3,0,0,1,1,1,person,end,0\n"
        );
        let file = read_trajectories(&text).unwrap();
        let ids: Vec<u64> = file.trajectories.iter().map(|t| t.id().0).collect();
        assert_eq!(ids, vec![1, 2]);
        let kinds: Vec<EventKind> = file.trajectories[0].events().iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::FirstDetected, EventKind::Lost, EventKind::Found, EventKind::Ended]);
        assert_eq!(file.observation_count(), 7);
    }

    #[test]
    fn validation_names_the_trajectory() {
        let backwards = format!("{HEAD}4,0,2.0,0,0,0,1,1,1,person,first,0\n4,1,1.0,0,0,0,1,1,1,person,none,0\n");
        match read_trajectories(&backwards) {
            Err(FormatError::Trajectory { id, line, .. }) => assert_eq!((id, line), (4, 3)),
            other => panic!("{other:?}"),
        }
        let no_first = format!("{HEAD}5,0,0,0,0,0,1,1,1,person,none,0\n");
        let err = read_trajectories(&no_first).unwrap_err();
        assert!(matches!(err, FormatError::Trajectory { id: 5, .. }));
        assert!(err.to_string().contains("first"));
        let bad_class = format!("{HEAD}5,0,0,0,0,0,1,1,1,dog,first,0\n");
        assert!(matches!(read_trajectories(&bad_class), Err(FormatError::Syntax { line: 2, .. })));
        assert!(read_trajectories("trajectory_id,frame,t\n").is_err());
    }

    #[test]
    fn neighbor_column_is_optional() {
        let head = HEAD.trim_end().trim_end_matches(",neighbor_count");
        let text = format!("{head}\n1,0,0,0,0,0,1,1,1,person,first|end\n2,0,0,0.5,0,0,1,1,1,person,first|end\n");
        let file = read_trajectories(&text).unwrap();
        assert!(!file.has_neighbor_counts);
        let trajs = file.into_trajectories(&FeatureConfig::default());
        assert!(trajs.iter().all(|t| t.events().iter().all(|e| e.neighbor_count == 1)));
    }

    #[test]
    fn write_then_read() {
        let text = format!("{HEAD}1,0,0.1,0.25,-3,0,0.5,1.7,0.3,person,first,2\n1,1,0.30000000000000004,1e-7,0,0,0.5,1.7,0.3,unknown,lost|found,1\n1,2,1,2,0,0,0.5,1.7,0.3,other,end,0\n9,3,0.2,1,1,0,1,1,1,person,first|end,0\n");
        let file = read_trajectories(&text).unwrap();
        let written = write_trajectories(&file.trajectories);
        assert_eq!(read_trajectories(&written).unwrap(), file);
        assert_eq!(write_trajectories(&read_trajectories(&written).unwrap().trajectories), written);
    }

    #[test]
    fn ground_truth_columns() {
        let by_class = read_ground_truth("trajectory_id,agent_id,segment,class\n1,0,0,complete\n2,0,1,noise\n").unwrap();
        assert_eq!(by_class[&TrackId(1)], 0.9);
        assert_eq!(by_class[&TrackId(2)], 0.1);
        let numeric = read_ground_truth("trajectory_id,ground_truth\n3,0.42\n").unwrap();
        assert_eq!(numeric[&TrackId(3)], 0.42);
        assert!(read_ground_truth("trajectory_id,ground_truth\n3,1.5\n").is_err());
        assert!(read_ground_truth("trajectory_id,class\n3,great\n").is_err());
    }
}
