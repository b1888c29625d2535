//! Output rendering: verification/calibration reports and simulation trace
//! tables, as CSV (12 significant digits, LF line endings) or JSON with a
//! versioned schema tag.

use std::fmt::Write;

use clap::ValueEnum;
use ctqec::dynamics::SimulationTrace;
use serde_json::{json, Map, Value};

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// 12 significant digits; round-trip-stable for golden files.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn scalar_to_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.to_string()
            } else {
                sig12(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        other => other.to_string(),
    }
}

/// A key-value report with optional pass/fail checks (verify, calibrate).
pub struct Report {
    schema: &'static str,
    scalars: Vec<(String, Value)>,
    checks: Vec<Check>,
}

struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

impl Report {
    pub fn new(schema: &'static str) -> Report {
        Report {
            schema,
            scalars: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn scalar(&mut self, key: &str, value: impl Into<Value>) {
        self.scalars.push((key.to_string(), value.into()));
    }

    pub fn check(&mut self, name: &str, value: f64, threshold: f64, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            threshold,
            pass,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn total(&self) -> usize {
        self.checks.len()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                writeln!(out, "schema,{}", self.schema).unwrap();
                for (key, value) in &self.scalars {
                    writeln!(out, "{key},{}", scalar_to_string(value)).unwrap();
                }
                if !self.checks.is_empty() {
                    out.push_str("check,value,threshold,pass\n");
                    for c in &self.checks {
                        writeln!(
                            out,
                            "{},{},{},{}",
                            c.name,
                            sig12(c.value),
                            sig12(c.threshold),
                            c.pass
                        )
                        .unwrap();
                    }
                }
                out
            }
            Format::Json => {
                let mut meta = Map::new();
                for (key, value) in &self.scalars {
                    meta.insert(key.clone(), value.clone());
                }
                let checks: Vec<Value> = self
                    .checks
                    .iter()
                    .map(|c| {
                        json!({
                            "name": c.name,
                            "value": c.value,
                            "threshold": c.threshold,
                            "pass": c.pass,
                        })
                    })
                    .collect();
                let doc = json!({
                    "schema": self.schema,
                    "meta": meta,
                    "checks": checks,
                    "pass": self.all_pass(),
                });
                let mut text = serde_json::to_string_pretty(&doc).unwrap();
                text.push('\n');
                text
            }
        }
    }
}

/// A time-series table assembled from one or more simulation traces sharing
/// the same sampling grid.
pub struct TraceTable {
    schema: &'static str,
    meta: Vec<(String, Value)>,
    times: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

impl TraceTable {
    pub fn new(schema: &'static str) -> TraceTable {
        TraceTable {
            schema,
            meta: Vec::new(),
            times: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.push((key.to_string(), value.into()));
    }

    /// Append a trace's columns, suffixing the names (empty for the primary
    /// trace). All traces must share the sampling grid of the first.
    pub fn add_trace(&mut self, trace: &SimulationTrace, suffix: &str) -> CliResult<()> {
        if self.times.is_empty() {
            self.times = trace.times.clone();
        } else if self.times.len() != trace.times.len() {
            return Err(CliError::Numeric(format!(
                "trace sampling grids differ: {} vs {} points",
                self.times.len(),
                trace.times.len()
            )));
        }
        self.columns.push((
            format!("codeword_fidelity{suffix}"),
            trace.codeword_fidelity.clone(),
        ));
        self.columns.push((
            format!("correctable_overlap{suffix}"),
            trace.correctable_overlap.clone(),
        ));
        if let Some(weights) = &trace.weights {
            for i in 0..4 {
                self.columns.push((
                    format!("w{i}{suffix}"),
                    weights.iter().map(|w| w[i]).collect(),
                ));
            }
        }
        Ok(())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                write!(out, "# schema={}", self.schema).unwrap();
                for (key, value) in &self.meta {
                    write!(out, " {key}={}", scalar_to_string(value)).unwrap();
                }
                out.push('\n');
                out.push_str("t");
                for (name, _) in &self.columns {
                    write!(out, ",{name}").unwrap();
                }
                out.push('\n');
                for (row, t) in self.times.iter().enumerate() {
                    out.push_str(&sig12(*t));
                    for (_, column) in &self.columns {
                        write!(out, ",{}", sig12(column[row])).unwrap();
                    }
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let mut meta = Map::new();
                for (key, value) in &self.meta {
                    meta.insert(key.clone(), value.clone());
                }
                let mut names = vec!["t".to_string()];
                names.extend(self.columns.iter().map(|(n, _)| n.clone()));
                let rows: Vec<Value> = self
                    .times
                    .iter()
                    .enumerate()
                    .map(|(row, t)| {
                        let mut values = vec![json!(t)];
                        values.extend(self.columns.iter().map(|(_, c)| json!(c[row])));
                        Value::Array(values)
                    })
                    .collect();
                let doc = json!({
                    "schema": self.schema,
                    "meta": meta,
                    "columns": names,
                    "rows": rows,
                });
                let mut text = serde_json::to_string_pretty(&doc).unwrap();
                text.push('\n');
                text
            }
        }
    }
}
