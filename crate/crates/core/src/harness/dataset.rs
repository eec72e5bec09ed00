//! Coincidence-count CSV files.
//!
//! Header `setting_a,setting_b,n_pp,n_pm,n_mp,n_mm` with optional trailing
//! `singles_a,singles_b,duration` columns. Lines starting with `#` are
//! comments; a `# seed = N` comment records the generator seed of synthetic
//! data.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REQUIRED: [&str; 6] = ["setting_a", "setting_b", "n_pp", "n_pm", "n_mp", "n_mm"];
const OPTIONAL: [&str; 3] = ["singles_a", "singles_b", "duration"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub setting_a: String,
    pub setting_b: String,
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
    pub singles_a: Option<u64>,
    pub singles_b: Option<u64>,
    /// Acquisition time (s).
    pub duration: Option<f64>,
    /// 1-based line in the source file.
    pub line: u64,
}

impl CountRow {
    pub fn coincidences(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDataset {
    rows: Vec<CountRow>,
    seed: Option<u64>,
}

impl CountDataset {
    /// Rejects duplicate setting pairs.
    pub fn new(rows: Vec<CountRow>, seed: Option<u64>) -> Result<Self> {
        let mut seen = HashSet::new();
        for row in &rows {
            if !seen.insert((row.setting_a.clone(), row.setting_b.clone())) {
                return Err(Error::Dataset {
                    line: row.line,
                    message: format!(
                        "duplicate setting pair ({}, {})",
                        row.setting_a, row.setting_b
                    ),
                });
            }
        }
        Ok(Self { rows, seed })
    }

    pub fn rows(&self) -> &[CountRow] {
        &self.rows
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, setting_a: &str, setting_b: &str) -> Option<&CountRow> {
        self.rows
            .iter()
            .find(|r| r.setting_a == setting_a && r.setting_b == setting_b)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let seed = text.lines().find_map(parse_seed_comment);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());

        let header_line = text
            .lines()
            .position(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
            .map_or(1, |i| i as u64 + 1);
        let headers = reader.headers()?.clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(Error::Dataset {
                line: header_line,
                message: "empty file: header row is mandatory".into(),
            });
        }
        let column = |name: &str| headers.iter().position(|h| h == name);
        let mut required = [0usize; 6];
        for (slot, name) in required.iter_mut().zip(REQUIRED) {
            *slot = column(name).ok_or_else(|| Error::Dataset {
                line: header_line,
                message: format!("missing column `{name}`"),
            })?;
        }
        let optional = OPTIONAL.map(column);
        for h in headers.iter() {
            if !REQUIRED.contains(&h) && !OPTIONAL.contains(&h) {
                return Err(Error::Dataset {
                    line: header_line,
                    message: format!("unknown column `{h}`"),
                });
            }
        }

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |idx: usize| record.get(idx).unwrap_or("");
            let count = |name: &str, idx: usize| -> Result<u64> {
                let raw = field(idx);
                raw.parse::<u64>().map_err(|_| Error::Dataset {
                    line,
                    message: if raw.parse::<i64>().is_ok_and(|v| v < 0) {
                        format!("negative count {raw} in column `{name}`")
                    } else {
                        format!("non-integer count `{raw}` in column `{name}`")
                    },
                })
            };
            let optional_count = |k: usize| -> Result<Option<u64>> {
                match optional[k] {
                    Some(idx) if !field(idx).is_empty() => count(OPTIONAL[k], idx).map(Some),
                    _ => Ok(None),
                }
            };
            let duration = match optional[2] {
                Some(idx) if !field(idx).is_empty() => {
                    let raw = field(idx);
                    let d: f64 = raw.parse().map_err(|_| Error::Dataset {
                        line,
                        message: format!("invalid duration `{raw}`"),
                    })?;
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(Error::Dataset {
                            line,
                            message: format!("duration must be positive, got {raw}"),
                        });
                    }
                    Some(d)
                }
                _ => None,
            };
            rows.push(CountRow {
                setting_a: field(required[0]).to_string(),
                setting_b: field(required[1]).to_string(),
                n_pp: count(REQUIRED[2], required[2])?,
                n_pm: count(REQUIRED[3], required[3])?,
                n_mp: count(REQUIRED[4], required[4])?,
                n_mm: count(REQUIRED[5], required[5])?,
                singles_a: optional_count(0)?,
                singles_b: optional_count(1)?,
                duration,
                line,
            });
        }
        Self::new(rows, seed)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if let Some(seed) = self.seed {
            writeln!(out, "# seed = {seed}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = REQUIRED.to_vec();
        header.extend(OPTIONAL);
        writer.write_record(&header)?;
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            writer.write_record([
                r.setting_a.clone(),
                r.setting_b.clone(),
                r.n_pp.to_string(),
                r.n_pm.to_string(),
                r.n_mp.to_string(),
                r.n_mm.to_string(),
                opt(r.singles_a),
                opt(r.singles_b),
                r.duration.map(|d| d.to_string()).unwrap_or_default(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn parse_seed_comment(line: &str) -> Option<u64> {
    let rest = line.trim().strip_prefix('#')?.trim();
    let value = rest.strip_prefix("seed")?.trim_start().strip_prefix('=')?;
    value.trim().parse().ok()
}

pub fn ingest_counts(path: &Path) -> Result<CountDataset> {
    CountDataset::parse(&std::fs::read_to_string(path)?)
}
