//! The triplet table: one triplet per line, highest priority first.
//!
//! ```text
//! # start_zone lost_zone found_zone min_time max_time support
//!            1         3          7 0.7868 2.4816 38
//! ```
//!
//! Columns are separated by whitespace; lines starting with `#` are
//! comments. Times are seconds, written in shortest round-trip form.

use std::fmt::Write as _;

use trackmend_core::ZoneTriplet;

use crate::error::{FormatError, Result};

pub const HEADER: &str = "# start_zone lost_zone found_zone min_time max_time support";

pub fn write_triplets(triplets: &[ZoneTriplet]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for t in triplets {
        let _ = writeln!(
            out,
            "{:>12} {:>9} {:>10} {} {} {}",
            t.start_zone, t.lost_zone, t.found_zone, t.min_time, t.max_time, t.support
        );
    }
    out
}

/// Parses a triplet table, keeping the file order as the priority order.
pub fn read_triplets(text: &str) -> Result<Vec<ZoneTriplet>> {
    let mut out = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let syntax = |message: String| FormatError::Syntax { line, message };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(syntax(format!("expected 6 columns, found {}", fields.len())));
        }
        let ident = |i: usize| fields[i].parse::<u32>().map_err(|_| syntax(format!("zone ident is not an integer: `{}`", fields[i])));
        let time = |i: usize| {
            fields[i].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| syntax(format!("time is not a finite number: `{}`", fields[i])))
        };
        let triplet = ZoneTriplet {
            start_zone: ident(0)?,
            lost_zone: ident(1)?,
            found_zone: ident(2)?,
            min_time: time(3)?,
            max_time: time(4)?,
            support: fields[5].parse().map_err(|_| syntax(format!("support is not an integer: `{}`", fields[5])))?,
        };
        if triplet.min_time > triplet.max_time {
            return Err(syntax("min_time exceeds max_time".into()));
        }
        out.push(triplet);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let triplets = vec![
            ZoneTriplet { start_zone: 1, lost_zone: 3, found_zone: 7, min_time: 0.786842105263149, max_time: 2.48157894736843, support: 38 },
            ZoneTriplet { start_zone: 12, lost_zone: 30, found_zone: 4, min_time: 30.0, max_time: 60.0, support: 1 },
        ];
        let text = write_triplets(&triplets);
        assert!(text.starts_with(HEADER));
        assert_eq!(read_triplets(&text).unwrap(), triplets);
        assert!(read_triplets("").unwrap().is_empty());
    }

    #[test]
    fn errors_name_the_line() {
        let err = read_triplets("# header\n1 2 3 4 5\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 2, .. }));
        assert!(read_triplets("1 2 3 9 5 1\n").is_err());
        assert!(read_triplets("1 2 x 4 5 1\n").is_err());
    }
}
