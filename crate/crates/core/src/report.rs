//! Trajectory records and their CSV form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DriftRow {
    pub step: u64,
    pub time: f64,
    /// `H = T + W`.
    pub energy: f64,
    /// `H_h`, or NaN when not computed.
    pub modified_energy: f64,
    pub norm_h12: f64,
    pub norm_h1: f64,
    /// `J_k` for each observed mode, in the order of [`DriftReport::modes`].
    pub actions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSummary {
    /// `max_t |J_k(t) - J_k(0)|` per observed mode.
    pub action_drift: Vec<f64>,
    pub energy_drift: f64,
    /// `max_t |H_h(t) - H_h(0)|`, NaN when `H_h` was not recorded.
    pub modified_energy_drift: f64,
    pub max_norm_h12: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub modes: Vec<i64>,
    pub rows: Vec<DriftRow>,
}

fn max_drift(values: impl Iterator<Item = f64>) -> f64 {
    let mut first = None;
    let mut worst: f64 = 0.0;
    for v in values {
        let v0 = *first.get_or_insert(v);
        let d = (v - v0).abs();
        if d.is_nan() {
            return f64::NAN;
        }
        worst = worst.max(d);
    }
    worst
}

impl DriftReport {
    pub fn new(modes: Vec<i64>) -> Self {
        Self {
            modes,
            rows: Vec::new(),
        }
    }

    pub fn summary(&self) -> DriftSummary {
        DriftSummary {
            action_drift: (0..self.modes.len())
                .map(|c| max_drift(self.rows.iter().map(|r| r.actions[c])))
                .collect(),
            energy_drift: max_drift(self.rows.iter().map(|r| r.energy)),
            modified_energy_drift: max_drift(self.rows.iter().map(|r| r.modified_energy)),
            max_norm_h12: self.rows.iter().map(|r| r.norm_h12).fold(0.0, f64::max),
        }
    }

    pub fn header(&self) -> String {
        let mut h = String::from("step,time,H,Hh,norm_h12,norm_h1");
        for k in &self.modes {
            h.push_str(&format!(",J_{k}"));
        }
        h
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header())?;
        for r in &self.rows {
            write!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.step, r.time, r.energy, r.modified_energy, r.norm_h12, r.norm_h1
            )?;
            for j in &r.actions {
                write!(w, ",{j:.16e}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Writes the report to `path`.
    pub fn emit_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Parses a file produced by [`DriftReport::write_csv`].
    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty CSV".into(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 6 || cols[..6] != ["step", "time", "H", "Hh", "norm_h12", "norm_h1"] {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected header '{header}'"),
            });
        }
        let modes = cols[6..]
            .iter()
            .map(|c| {
                c.strip_prefix("J_").and_then(|k| k.parse::<i64>().ok()).ok_or(Error::Parse {
                    line: 1,
                    msg: format!("bad action column '{c}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut report = DriftReport::new(modes);
        for (n, line) in lines.enumerate() {
            let bad = |msg: String| Error::Parse { line: n + 2, msg };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(bad(format!("expected {} fields, got {}", cols.len(), f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number '{s}'")));
            report.rows.push(DriftRow {
                step: f[0].parse().map_err(|_| bad(format!("bad step '{}'", f[0])))?,
                time: num(f[1])?,
                energy: num(f[2])?,
                modified_energy: num(f[3])?,
                norm_h12: num(f[4])?,
                norm_h1: num(f[5])?,
                actions: f[6..].iter().map(|s| num(s)).collect::<Result<_>>()?,
            });
        }
        Ok(report)
    }
}
