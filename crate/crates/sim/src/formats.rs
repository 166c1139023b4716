//! Tab-separated output files. Each file starts with `#` comment lines
//! (metadata as `# key value`) followed by one column-header line.
//!
//! | file            | columns                                   |
//! |-----------------|-------------------------------------------|
//! | `events.tsv`    | `time k j theta z accepted`               |
//! | `snapshot_*.tsv`| `r1 .. rd v1 .. vd` (header: `d`, `n`, `t`)|
//! | `moments.tsv`   | `t p value`                               |
//! | `residual.tsv`  | `t psi value`                             |
//! | `audit.tsv`     | `quantity value`                          |
//! | `manifest.tsv`  | `key value`                               |
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! gives the exact values that were written.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use enskog_core::observables::{EmpiricalSnapshot, MomentSeries, PhasePoint};
use enskog_core::particles::{CollisionEvent, ConservationReport};
use enskog_core::Vector;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Writes a whole file, creating parent directories.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_events<const D: usize>(
    w: &mut dyn Write,
    events: &[CollisionEvent<D>],
) -> std::io::Result<()> {
    writeln!(
        w,
        "# collision candidates; accepted = 1 when the jump was applied"
    )?;
    writeln!(w, "time\tk\tj\ttheta\tz\taccepted")?;
    for e in events {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            e.time,
            e.k,
            e.j,
            e.theta,
            e.z,
            u8::from(e.accepted)
        )?;
    }
    Ok(())
}

pub fn write_snapshot<const D: usize>(
    w: &mut dyn Write,
    s: &EmpiricalSnapshot<D>,
) -> std::io::Result<()> {
    writeln!(w, "# d {D}")?;
    writeln!(w, "# n {}", s.len())?;
    writeln!(w, "# t {}", s.time)?;
    let names: Vec<String> = (1..=D)
        .map(|i| format!("r{i}"))
        .chain((1..=D).map(|i| format!("v{i}")))
        .collect();
    writeln!(w, "{}", names.join("\t"))?;
    for p in &s.points {
        let row: Vec<String> = p
            .position
            .as_slice()
            .iter()
            .chain(p.velocity.as_slice())
            .map(|x| x.to_string())
            .collect();
        writeln!(w, "{}", row.join("\t"))?;
    }
    Ok(())
}

pub fn write_moments(w: &mut dyn Write, series: &[MomentSeries]) -> std::io::Result<()> {
    writeln!(w, "# empirical moments mean(<v>^p)")?;
    writeln!(w, "t\tp\tvalue")?;
    for s in series {
        for (t, m) in s.times.iter().zip(&s.values) {
            writeln!(w, "{t}\t{}\t{m}", s.p)?;
        }
    }
    Ok(())
}

pub fn write_residual(
    w: &mut dyn Write,
    psi: &str,
    times: &[f64],
    values: &[f64],
) -> std::io::Result<()> {
    writeln!(w, "# weak-form balance defect e(t)")?;
    writeln!(w, "t\tpsi\tvalue")?;
    for (t, e) in times.iter().zip(values) {
        writeln!(w, "{t}\t{psi}\t{e}")?;
    }
    Ok(())
}

pub fn write_audit(w: &mut dyn Write, a: &ConservationReport) -> std::io::Result<()> {
    writeln!(w, "quantity\tvalue")?;
    writeln!(w, "momentum_drift\t{}", a.momentum_drift)?;
    writeln!(w, "energy_drift\t{}", a.energy_drift)?;
    writeln!(w, "proposed\t{}", a.proposed)?;
    writeln!(w, "accepted\t{}", a.accepted)?;
    writeln!(w, "majorant_breaches\t{}", a.majorant_breaches)
}

/// Writes `key value` rows under a header line.
pub fn write_pairs(
    w: &mut dyn Write,
    header: &str,
    rows: &[(String, String)],
) -> std::io::Result<()> {
    writeln!(w, "{header}")?;
    for (k, v) in rows {
        writeln!(w, "{k}\t{v}")?;
    }
    Ok(())
}

/// Writes a header line and rows of already formatted cells.
pub fn write_table(
    w: &mut dyn Write,
    columns: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    writeln!(w, "{}", columns.join("\t"))?;
    for r in rows {
        writeln!(w, "{}", r.join("\t"))?;
    }
    Ok(())
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A parsed delimited file: `# key value` metadata, column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub path: PathBuf,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut meta = Vec::new();
        let mut columns = None;
        let mut rows: Vec<Vec<String>> = Vec::new();
        for line in text.lines() {
            if let Some(c) = line.strip_prefix('#') {
                let mut it = c.trim().splitn(2, ' ');
                if let (Some(k), Some(v)) = (it.next(), it.next()) {
                    meta.push((k.to_string(), v.trim().to_string()));
                }
            } else if line.is_empty() {
                continue;
            } else if columns.is_none() {
                columns = Some(line.split('\t').map(str::to_string).collect::<Vec<_>>());
            } else {
                rows.push(line.split('\t').map(str::to_string).collect());
            }
        }
        let columns = columns.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "missing column header".into(),
        })?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != columns.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected {} fields, found {}", columns.len(), r.len()),
                });
            }
        }
        Ok(Table {
            path: path.to_path_buf(),
            meta,
            columns,
            rows,
        })
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| self.error(0, format!("no column {name}")))
    }

    /// Parses the cell at `(row, col)`.
    pub fn get<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T> {
        self.rows[row][col]
            .parse()
            .map_err(|_| self.error(row + 1, format!("cannot parse {:?}", self.rows[row][col])))
    }

    /// Looks up the value of a `key value` table.
    pub fn lookup<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let row = self
            .rows
            .iter()
            .position(|r| r[0] == key)
            .ok_or_else(|| self.error(0, format!("no entry {key}")))?;
        self.get(row, 1)
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message,
        }
    }
}

pub fn read_snapshot<const D: usize>(path: &Path) -> Result<EmpiricalSnapshot<D>> {
    let t = Table::read(path)?;
    let bad = |m: &str| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: m.to_string(),
    };
    let d: usize = t
        .meta("d")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("missing d"))?;
    let time: f64 = t
        .meta("t")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("missing t"))?;
    if d != D || t.columns.len() != 2 * D {
        return Err(bad("dimension mismatch"));
    }
    let mut points = Vec::with_capacity(t.rows.len());
    for row in 0..t.rows.len() {
        let mut r = Vector::<D>::zero();
        let mut v = Vector::<D>::zero();
        for i in 0..D {
            r[i] = t.get(row, i)?;
            v[i] = t.get(row, D + i)?;
        }
        points.push(PhasePoint {
            position: r,
            velocity: v,
        });
    }
    if let Some(n) = t.meta("n").and_then(|s| s.parse::<usize>().ok()) {
        if n != points.len() {
            return Err(bad("row count does not match n"));
        }
    }
    Ok(EmpiricalSnapshot::new(time, points))
}
