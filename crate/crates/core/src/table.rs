//! Keyed numeric result tables (critical values, rejection rates,
//! p-values) with CSV and JSON serialization.
//!
//! The CSV layout is one row per cell,
//! `model,variant,beta,d,n,k,value,se,reps,seed`, preceded by `#` metadata
//! comment lines. Floats are written with the shortest round-trip
//! formatting, so a table is byte-identical across runs with the same seed
//! and parses back to exactly the same numbers.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub version: u32,
    pub seed: u64,
    pub reps: u64,
    /// Quantile level for critical-value tables, significance level for
    /// rejection-rate tables.
    pub level: f64,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub model: String,
    pub variant: String,
    pub beta: Option<f64>,
    pub d: usize,
    pub n: usize,
    pub k: Option<f64>,
    pub value: f64,
    pub se: Option<f64>,
    pub reps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub meta: TableMeta,
    pub rows: Vec<Row>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultTable {
    pub fn new(kind: impl Into<String>, seed: u64, reps: u64, level: f64) -> Self {
        ResultTable {
            meta: TableMeta {
                version: FORMAT_VERSION,
                seed,
                reps,
                level,
                kind: kind.into(),
            },
            rows: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# kind={}\n", self.meta.kind));
        out.push_str(&format!("# version={}\n", self.meta.version));
        out.push_str(&format!("# seed={}\n", self.meta.seed));
        out.push_str(&format!("# reps={}\n", self.meta.reps));
        out.push_str(&format!("# level={}\n", self.meta.level));
        out.push_str("model,variant,beta,d,n,k,value,se,reps,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.model,
                r.variant,
                fmt_opt(r.beta),
                r.d,
                r.n,
                fmt_opt(r.k),
                r.value,
                fmt_opt(r.se),
                r.reps,
                r.seed
            ));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialization cannot fail")
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn from_csv_string(text: &str) -> Result<ResultTable> {
        let mut meta = TableMeta {
            version: FORMAT_VERSION,
            seed: 0,
            reps: 0,
            level: 0.95,
            kind: String::new(),
        };
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.trim().split_once('=') {
                    match key.trim() {
                        "kind" => meta.kind = value.trim().to_string(),
                        "version" => meta.version = parse_field(value, lineno)?,
                        "seed" => meta.seed = parse_field(value, lineno)?,
                        "reps" => meta.reps = parse_field(value, lineno)?,
                        "level" => meta.level = parse_field(value, lineno)?,
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                // column header line
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 10 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected 10 fields, found {}", fields.len()),
                });
            }
            rows.push(Row {
                model: fields[0].to_string(),
                variant: fields[1].to_string(),
                beta: parse_opt(fields[2], lineno)?,
                d: parse_field(fields[3], lineno)?,
                n: parse_field(fields[4], lineno)?,
                k: parse_opt(fields[5], lineno)?,
                value: parse_field(fields[6], lineno)?,
                se: parse_opt(fields[7], lineno)?,
                reps: parse_field(fields[8], lineno)?,
                seed: parse_field(fields[9], lineno)?,
            });
        }
        Ok(ResultTable { meta, rows })
    }

    pub fn read_csv(path: &std::path::Path) -> Result<ResultTable> {
        Self::from_csv_string(&std::fs::read_to_string(path)?)
    }

    /// Finds the value of the cell matching the key columns (float keys
    /// compared within 1e-9 relative).
    pub fn lookup(&self, variant: &str, beta: f64, d: usize, n: usize, k: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.variant == variant
                    && r.d == d
                    && r.n == n
                    && r.beta.is_some_and(|b| close(b, beta))
                    && r.k.is_some_and(|v| close(v, k))
            })
            .map(|r| r.value)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn parse_field<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        line: lineno + 1,
        message: format!("cannot parse field '{s}'"),
    })
}

fn parse_opt(s: &str, lineno: usize) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(s, lineno).map(Some)
    }
}
