//! Panel CSV schema and validation.
//!
//! Wire format (UTF-8, comma-separated, `.` decimal, header row):
//!
//! ```text
//! firm_id,group,year,ofdi,size,roa,age
//! ```
//!
//! `group` and `ofdi` are 0/1 flags; missing covariates are empty fields.
//! Floats are written in shortest round-trip form, so export → import is
//! lossless.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{PanelData, PanelRow};

pub const CSV_HEADER: [&str; 7] = ["firm_id", "group", "year", "ofdi", "size", "roa", "age"];

/// Write a panel to any writer in the canonical schema.
pub fn write_panel<W: Write>(panel: &PanelData, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in &panel.rows {
        w.write_record([
            r.firm_id.as_str(),
            &r.group.to_string(),
            &r.year.to_string(),
            &r.ofdi.to_string(),
            &r.size.map(|v| v.to_string()).unwrap_or_default(),
            &r.roa.map(|v| v.to_string()).unwrap_or_default(),
            &r.age.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write a panel to a file.
pub fn export_csv(panel: &PanelData, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_panel(panel, file)
}

/// Read and validate a panel from any reader.
pub fn read_panel<R: Read>(reader: R) -> Result<PanelData> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    {
        let headers = r.headers()?;
        let got: Vec<&str> = headers.iter().collect();
        if got != CSV_HEADER {
            return Err(Error::Schema {
                line: 1,
                message: format!(
                    "expected header {:?}, got {:?}",
                    CSV_HEADER.join(","),
                    got.join(",")
                ),
            });
        }
    }

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows.len() + 2);
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Schema {
                line,
                message: format!("expected {} fields, got {}", CSV_HEADER.len(), record.len()),
            });
        }
        let field = |i: usize| record.get(i).unwrap_or("");
        let firm_id = field(0).to_string();
        if firm_id.is_empty() {
            return Err(Error::Schema {
                line,
                message: "empty firm_id".to_string(),
            });
        }
        let group = parse_flag(field(1), "group", line)?;
        let year: i32 = field(2).parse().map_err(|_| Error::Schema {
            line,
            message: format!("bad year `{}`", field(2)),
        })?;
        let ofdi = parse_flag(field(3), "ofdi", line)?;
        let size = parse_opt_f64(field(4), "size", line)?;
        let roa = parse_opt_f64(field(5), "roa", line)?;
        let age = match field(6) {
            "" => None,
            s => Some(s.parse::<u32>().map_err(|_| Error::Schema {
                line,
                message: format!("bad age `{s}`"),
            })?),
        };
        rows.push(PanelRow {
            firm_id,
            group,
            year,
            ofdi,
            size,
            roa,
            age,
        });
        lines.push(line);
    }

    validate_rows(&rows, Some(&lines))?;
    Ok(PanelData {
        rows,
        metadata: None,
    })
}

/// Read and validate a panel from a file.
pub fn import_csv(path: impl AsRef<Path>) -> Result<PanelData> {
    let file = File::open(path)?;
    read_panel(file)
}

fn parse_flag(s: &str, name: &str, line: usize) -> Result<u8> {
    match s {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(Error::Schema {
            line,
            message: format!("{name} must be 0 or 1, got `{s}`"),
        }),
    }
}

fn parse_opt_f64(s: &str, name: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| Error::Schema {
        line,
        message: format!("bad {name} `{s}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Schema {
            line,
            message: format!("{name} must be finite, got `{s}`"),
        });
    }
    Ok(Some(v))
}

/// Logical panel invariants: unique (firm, year) keys, one group per firm,
/// contiguous year spans, absorbing OFDI, and unit age increments where age
/// is observed. `lines` maps row index to a file line for error messages;
/// without it, 1-based row positions are reported.
pub(super) fn validate_rows(rows: &[PanelRow], lines: Option<&[usize]>) -> Result<()> {
    let at = |idx: usize| lines.map_or(idx + 1, |l| l[idx]);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        rows[a]
            .firm_id
            .cmp(&rows[b].firm_id)
            .then(rows[a].year.cmp(&rows[b].year))
    });

    for pair in order.windows(2) {
        let (a, b) = (&rows[pair[0]], &rows[pair[1]]);
        if a.firm_id != b.firm_id {
            continue;
        }
        let line = at(pair[1]);
        if a.year == b.year {
            return Err(Error::Schema {
                line,
                message: format!("duplicate (firm_id, year) = ({}, {})", b.firm_id, b.year),
            });
        }
        if a.group != b.group {
            return Err(Error::Schema {
                line,
                message: format!("firm {} changes group between years", b.firm_id),
            });
        }
        if b.year != a.year + 1 {
            return Err(Error::Schema {
                line,
                message: format!(
                    "firm {} has a gap in its year span ({} then {})",
                    b.firm_id, a.year, b.year
                ),
            });
        }
        if a.ofdi == 1 && b.ofdi == 0 {
            return Err(Error::Schema {
                line,
                message: format!(
                    "firm {} has a non-absorbing ofdi sequence (1 in {}, 0 in {})",
                    b.firm_id, a.year, b.year
                ),
            });
        }
        if let (Some(age_a), Some(age_b)) = (a.age, b.age) {
            if age_b != age_a + 1 {
                return Err(Error::Schema {
                    line,
                    message: format!(
                        "firm {} age jumps from {} to {} across consecutive years",
                        b.firm_id, age_a, age_b
                    ),
                });
            }
        }
    }
    Ok(())
}
