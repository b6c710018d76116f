//! The zone file dialect:
//!
//! ```text
//! <Zone ident = "9" name = "ZoneIOLeftTop" plane_name = "ground">
//!   <Properties_list>
//!     <Property name = "In_out_zone:Entry"/>
//!   </Properties_list>
//!   <Outline_list>
//!     <Point x="-830.0" y="-350.0" z = "0"/>
//!     ...
//!   </Outline_list>
//! </Zone>
//! ```
//!
//! A document holds any number of `Zone` elements, bare or wrapped in a
//! root element; [`serialize_zones`] wraps them in `<Zone_list>`.
//!
//! Zone kinds map to property strings as follows. Only the entry and
//! lost-found strings appear in published zone files; the other four follow
//! the same pattern.
//!
//! | kind       | property               |
//! |------------|------------------------|
//! | Entry      | `In_out_zone:Entry`    |
//! | Exit       | `In_out_zone:Exit`     |
//! | InOut      | `In_out_zone:InOut`    |
//! | Lost       | `Lost_found_zone:Lost` |
//! | Found      | `Lost_found_zone:Found`|
//! | LostFound  | `Lost_found_zone:Yes`  |

use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use trackmend_core::{GroundPoint, Zone, ZoneKind};

use crate::error::{line_at, FormatError, Result};

const KIND_PROPERTIES: [(ZoneKind, &str); 6] = [
    (ZoneKind::Entry, "In_out_zone:Entry"),
    (ZoneKind::Exit, "In_out_zone:Exit"),
    (ZoneKind::InOut, "In_out_zone:InOut"),
    (ZoneKind::Lost, "Lost_found_zone:Lost"),
    (ZoneKind::Found, "Lost_found_zone:Found"),
    (ZoneKind::LostFound, "Lost_found_zone:Yes"),
];

pub fn kind_property(kind: ZoneKind) -> &'static str {
    KIND_PROPERTIES.iter().find(|(k, _)| *k == kind).map(|(_, p)| *p).expect("every kind has a property")
}

pub fn parse_kind_property(property: &str) -> Option<ZoneKind> {
    KIND_PROPERTIES.iter().find(|(_, p)| *p == property).map(|(k, _)| *k)
}

struct PartialZone {
    line: usize,
    ident: u32,
    name: String,
    plane_name: String,
    kind: Option<ZoneKind>,
    outline: Vec<GroundPoint>,
}

fn attributes(e: &BytesStart<'_>, line: usize) -> Result<Vec<(String, String)>> {
    e.attributes()
        .map(|a| {
            let a = a.map_err(|err| FormatError::Syntax { line, message: err.to_string() })?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let value = a.unescape_value().map_err(|err| FormatError::Syntax { line, message: err.to_string() })?;
            Ok((key, value.into_owned()))
        })
        .collect()
}

fn attribute<'a>(attrs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn required<'a>(attrs: &'a [(String, String)], element: &str, key: &str, line: usize) -> Result<&'a str> {
    attribute(attrs, key).ok_or_else(|| FormatError::Syntax { line, message: format!("<{element}> lacks attribute `{key}`") })
}

fn number(value: &str, key: &str, line: usize) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| FormatError::Syntax { line, message: format!("attribute `{key}` is not a finite number: `{value}`") })
}

/// Parses every `Zone` element in `text`, in document order.
pub fn parse_zone_file(text: &str) -> Result<Vec<Zone>> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut zones = Vec::new();
    let mut current: Option<PartialZone> = None;
    let mut in_outline = false;

    loop {
        let event = reader.read_event().map_err(|err| FormatError::Syntax {
            line: line_at(text, reader.error_position() as usize),
            message: err.to_string(),
        })?;
        let line = line_at(text, reader.buffer_position() as usize);
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                match e.name().as_ref() {
                    b"Zone" => {
                        if current.is_some() {
                            return Err(FormatError::Syntax { line, message: "nested <Zone> element".into() });
                        }
                        let attrs = attributes(e, line)?;
                        let ident_text = required(&attrs, "Zone", "ident", line)?;
                        let ident = ident_text.trim().parse::<u32>().map_err(|_| FormatError::Syntax {
                            line,
                            message: format!("zone ident is not a non-negative integer: `{ident_text}`"),
                        })?;
                        let zone = PartialZone {
                            line,
                            ident,
                            name: required(&attrs, "Zone", "name", line)?.to_owned(),
                            plane_name: attribute(&attrs, "plane_name").unwrap_or("ground").to_owned(),
                            kind: None,
                            outline: Vec::new(),
                        };
                        if empty {
                            zones.push(finish(zone)?);
                        } else {
                            current = Some(zone);
                        }
                    }
                    b"Property" => {
                        let Some(zone) = current.as_mut() else { continue };
                        let attrs = attributes(e, line)?;
                        let property = required(&attrs, "Property", "name", line)?;
                        let kind = parse_kind_property(property)
                            .ok_or_else(|| FormatError::UnsupportedZoneKind { line, property: property.to_owned() })?;
                        if zone.kind.is_some_and(|k| k != kind) {
                            return Err(FormatError::Syntax { line, message: format!("zone {} declares two different kinds", zone.ident) });
                        }
                        zone.kind = Some(kind);
                    }
                    b"Outline_list" => in_outline = !empty && current.is_some(),
                    b"Point" if in_outline => {
                        let attrs = attributes(e, line)?;
                        let x = number(required(&attrs, "Point", "x", line)?, "x", line)?;
                        let y = number(required(&attrs, "Point", "y", line)?, "y", line)?;
                        let z = attribute(&attrs, "z").map(|v| number(v, "z", line)).transpose()?.unwrap_or(0.0);
                        if let Some(zone) = current.as_mut() {
                            zone.outline.push(GroundPoint { x, y, z });
                        }
                    }
                    _ => {}
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"Zone" => {
                    if let Some(zone) = current.take() {
                        zones.push(finish(zone)?);
                    }
                    in_outline = false;
                }
                b"Outline_list" => in_outline = false,
                _ => {}
            },
            Event::Text(ref t) => {
                let raw: &[u8] = t.as_ref();
                if !raw.iter().all(u8::is_ascii_whitespace) {
                    return Err(FormatError::Syntax { line, message: format!("unexpected text `{}`", String::from_utf8_lossy(raw).trim()) });
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if let Some(zone) = current {
        return Err(FormatError::Syntax { line: zone.line, message: format!("zone {} is never closed", zone.ident) });
    }
    Ok(zones)
}

fn finish(zone: PartialZone) -> Result<Zone> {
    let line = zone.line;
    let kind = zone
        .kind
        .ok_or_else(|| FormatError::Syntax { line, message: format!("zone {} has no zone kind property", zone.ident) })?;
    Zone::new(zone.ident, zone.name, zone.plane_name, kind, zone.outline).map_err(|source| FormatError::Geometry { line, source })
}

fn escape(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

fn coordinate(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else {
        format!("{v:?}")
    }
}

/// Writes `zones` in the zone file dialect, wrapped in `<Zone_list>`.
pub fn serialize_zones(zones: &[Zone]) -> String {
    let mut out = String::from("<Zone_list>\n");
    for zone in zones {
        let _ = writeln!(
            out,
            "<Zone ident = \"{}\" name = \"{}\" plane_name = \"{}\">",
            zone.ident(),
            escape(zone.name()),
            escape(zone.plane_name())
        );
        out.push_str("  <Properties_list>\n");
        let _ = writeln!(out, "    <Property name = \"{}\"/>", kind_property(zone.kind()));
        out.push_str("  </Properties_list>\n  <Outline_list>\n");
        for p in zone.outline() {
            let _ = writeln!(out, "    <Point x=\"{:?}\" y=\"{:?}\" z = \"{}\"/>", p.x, p.y, coordinate(p.z));
        }
        out.push_str("  </Outline_list>\n</Zone>\n");
    }
    out.push_str("</Zone_list>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENTRY: &str = r#"<Zone ident = "9" name = "ZoneIOLeftTop" plane_name = "ground">
  <Properties_list>
    <Property name = "In_out_zone:Entry"/>
  </Properties_list>
  <Outline_list>
    <Point x="-830.0" y="-350.0" z = "0"/>
    <Point x="-300.0" y="-350.0" z = "0"/>
    <Point x="-300.0" y="-100.0" z = "0"/>
    <Point x="-830.0" y="-100.0" z = "0"/>
  </Outline_list>
</Zone>"#;

    #[test]
    fn entry_zone() {
        let zones = parse_zone_file(ENTRY).unwrap();
        assert_eq!(zones.len(), 1);
        let z = &zones[0];
        assert_eq!((z.ident(), z.name(), z.plane_name(), z.kind()), (9, "ZoneIOLeftTop", "ground", ZoneKind::Entry));
        let xy: Vec<(f64, f64)> = z.outline().iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(xy, vec![(-830.0, -350.0), (-300.0, -350.0), (-300.0, -100.0), (-830.0, -100.0)]);
    }

    #[test]
    fn serialized_zone_block_matches_the_published_text() {
        let out = serialize_zones(&parse_zone_file(ENTRY).unwrap());
        assert!(out.contains(ENTRY), "{out}");
    }

    #[test]
    fn empty_documents() {
        assert!(parse_zone_file("").unwrap().is_empty());
        assert!(parse_zone_file("<Zone_list>\n</Zone_list>\n").unwrap().is_empty());
        assert_eq!(serialize_zones(&[]), "<Zone_list>\n</Zone_list>\n");
    }

    #[test]
    fn every_kind_round_trips() {
        for (i, (kind, property)) in KIND_PROPERTIES.iter().enumerate() {
            let z = Zone::rectangle(i as u32, "z", *kind, GroundPoint::new(0.1, 0.2), GroundPoint::new(3.5, 1e-3 + 4.0)).unwrap();
            let text = serialize_zones(std::slice::from_ref(&z));
            assert!(text.contains(property));
            assert_eq!(parse_zone_file(&text).unwrap(), vec![z]);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let unknown = ENTRY.replace("In_out_zone:Entry", "In_out_zone:Sideways");
        match parse_zone_file(&unknown) {
            Err(FormatError::UnsupportedZoneKind { line, property }) => {
                assert_eq!(line, 3);
                assert_eq!(property, "In_out_zone:Sideways");
            }
            other => panic!("{other:?}"),
        }

        let two_points: String = ENTRY.lines().filter(|l| !l.contains("-100.0")).collect::<Vec<_>>().join("\n");
        assert!(matches!(parse_zone_file(&two_points), Err(FormatError::Geometry { line: 1, .. })));

        let broken = ENTRY.replace("</Outline_list>", "</Outline>");
        match parse_zone_file(&broken) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 10),
            other => panic!("{other:?}"),
        }

        let bad_number = ENTRY.replace("-300.0\" y=\"-350.0", "west\" y=\"-350.0");
        assert!(matches!(parse_zone_file(&bad_number), Err(FormatError::Syntax { line: 7, .. })));
        assert!(matches!(parse_zone_file(&ENTRY[..ENTRY.len() - 7]), Err(FormatError::Syntax { .. })));
    }

    #[test]
    fn names_are_escaped() {
        let z = Zone::rectangle(4, "Door \"A\" & <B>", ZoneKind::Exit, GroundPoint::new(0.0, 0.0), GroundPoint::new(1.0, 1.0)).unwrap();
        let text = serialize_zones(std::slice::from_ref(&z));
        assert_eq!(parse_zone_file(&text).unwrap(), vec![z]);
    }
}
