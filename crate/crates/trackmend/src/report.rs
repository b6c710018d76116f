//! Before/after evaluation in the layout of the published results table,
//! plus the fusion log that feeds it.

use std::fmt::Write as _;

use trackmend_core::repair::RepairResult;
use trackmend_core::{TrackId, ZoneTriplet};

use crate::error::{FormatError, Result};

/// Confidence bands used for the report rows. Unreliable trajectories are
/// counted with the incomplete ones, since the table has no row for them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bands {
    /// At or above: complete.
    pub complete: f64,
    /// Below: noise.
    pub noise: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Self { complete: trackmend_core::confidence::DEFAULT_COMPLETE_THRESHOLD, noise: trackmend_core::confidence::DEFAULT_NOISE_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub complete: usize,
    pub incomplete: usize,
    pub noise: usize,
}

impl ClassCounts {
    pub fn from_confidences(cvs: &[f64], bands: Bands) -> Self {
        let mut c = Self::default();
        for &cv in cvs {
            if cv >= bands.complete {
                c.complete += 1;
            } else if cv < bands.noise {
                c.noise += 1;
            } else {
                c.incomplete += 1;
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.complete + self.incomplete + self.noise
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluationReport {
    pub without: ClassCounts,
    pub with: ClassCounts,
    pub fusions: usize,
    /// Fusions whose confidence went up.
    pub cv_increased: usize,
}

/// Fusion log entry, one per repaired trajectory pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionRecord {
    pub recipient_id: TrackId,
    pub donor_id: TrackId,
    pub triplet: ZoneTriplet,
    pub cv_before: f64,
    pub cv_after: f64,
}

impl From<&RepairResult> for FusionRecord {
    fn from(r: &RepairResult) -> Self {
        Self { recipient_id: r.recipient_id, donor_id: r.donor_id, triplet: r.triplet.clone(), cv_before: r.cv_before, cv_after: r.cv_after }
    }
}

pub fn evaluate(before: &[f64], after: &[f64], fusions: &[FusionRecord], bands: Bands) -> EvaluationReport {
    EvaluationReport {
        without: ClassCounts::from_confidences(before, bands),
        with: ClassCounts::from_confidences(after, bands),
        fusions: fusions.len(),
        cv_increased: fusions.iter().filter(|f| f.cv_after > f.cv_before).count(),
    }
}

const ROW_LABELS: [&str; 4] = ["Complete trajectories", "Incomplete trajectories", "Noise", "Total"];

fn percentage(n: usize, total: usize) -> String {
    if total == 0 {
        "0.0".to_owned()
    } else {
        format!("{:.1}", 100.0 * n as f64 / total as f64)
    }
}

impl EvaluationReport {
    /// Rows of (label, number without, percentage without, number with, percentage with).
    pub fn rows(&self) -> Vec<[String; 5]> {
        let column = |c: &ClassCounts| {
            let total = c.total();
            [
                (c.complete.to_string(), percentage(c.complete, total)),
                (c.incomplete.to_string(), percentage(c.incomplete, total)),
                (c.noise.to_string(), percentage(c.noise, total)),
                (total.to_string(), if total == 0 { "0".to_owned() } else { "100".to_owned() }),
            ]
        };
        let (without, with) = (column(&self.without), column(&self.with));
        ROW_LABELS
            .iter()
            .zip(without.into_iter().zip(with))
            .map(|(label, ((n0, p0), (n1, p1)))| [(*label).to_owned(), n0, p0, n1, p1])
            .collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<25}{:>30}{:>30}", "", "Without the algorithm", "With the algorithm");
        let _ = writeln!(out, "{:<25}{:>10}{:>20}{:>10}{:>20}", "", "Number", "Percentage (%)", "Number", "Percentage (%)");
        for [label, n0, p0, n1, p1] in self.rows() {
            let _ = writeln!(out, "{label:<25}{n0:>10}{p0:>20}{n1:>10}{p1:>20}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "Fusions: {}", self.fusions);
        let _ = writeln!(out, "Fusions with increased confidence: {}", self.cv_increased);
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("row,without_number,without_percentage,with_number,with_percentage\n");
        for row in self.rows() {
            let _ = writeln!(out, "{}", row.join(","));
        }
        let _ = writeln!(out, "Fusions,{},,,", self.fusions);
        let _ = writeln!(out, "Fusions with increased confidence,{},,,", self.cv_increased);
        out
    }
}

pub const FUSION_HEADER: &str = "recipient_id,donor_id,start_zone,lost_zone,found_zone,min_time,max_time,support,cv_before,cv_after";

pub fn write_fusions(records: &[FusionRecord]) -> String {
    let mut out = String::from(FUSION_HEADER);
    out.push('\n');
    for r in records {
        let t = &r.triplet;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.recipient_id, r.donor_id, t.start_zone, t.lost_zone, t.found_zone, t.min_time, t.max_time, t.support, r.cv_before, r.cv_after
        );
    }
    out
}

pub fn read_fusions(text: &str) -> Result<Vec<FusionRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let syntax = |i: usize| FormatError::Syntax { line, message: format!("column {} is malformed: `{}`", i + 1, field(i)) };
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| syntax(i));
        let float = |i: usize| field(i).parse::<f64>().map_err(|_| syntax(i));
        let zone = |i: usize| field(i).parse::<u32>().map_err(|_| syntax(i));
        out.push(FusionRecord {
            recipient_id: TrackId(int(0)?),
            donor_id: TrackId(int(1)?),
            triplet: ZoneTriplet {
                start_zone: zone(2)?,
                lost_zone: zone(3)?,
                found_zone: zone(4)?,
                min_time: float(5)?,
                max_time: float(6)?,
                support: int(7)? as usize,
            },
            cv_before: float(8)?,
            cv_after: float(9)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_give_identical_columns() {
        let cvs = [0.9, 0.5, 0.1, 0.85, 0.2];
        let r = evaluate(&cvs, &cvs, &[], Bands::default());
        assert_eq!(r.without, r.with);
        assert_eq!(r.without, ClassCounts { complete: 2, incomplete: 2, noise: 1 });
        for row in r.rows() {
            assert_eq!((&row[1], &row[2]), (&row[3], &row[4]));
        }
    }

    #[test]
    fn empty_report() {
        let r = evaluate(&[], &[], &[], Bands::default());
        assert!(r.render_text().contains("Total"));
        assert_eq!(r.rows()[3][1], "0");
    }

    #[test]
    fn fusion_log_round_trip() {
        let rec = FusionRecord {
            recipient_id: TrackId(4),
            donor_id: TrackId(9),
            triplet: ZoneTriplet { start_zone: 1, lost_zone: 3, found_zone: 7, min_time: 0.5, max_time: 2.25, support: 12 },
            cv_before: -0.125,
            cv_after: 0.8125,
        };
        let text = write_fusions(std::slice::from_ref(&rec));
        assert_eq!(read_fusions(&text).unwrap(), vec![rec]);
        assert!(read_fusions(&format!("{FUSION_HEADER}\n1,2,3,4,5,x,7,8,9,10\n")).is_err());
    }
}
