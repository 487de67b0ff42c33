//! Versioned run report, its JSON and CSV forms, and CSV tables.

use std::collections::BTreeMap;
use std::io::Write;

use nondegen::CheckRecord;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA: &str = "1";

/// One parameter value, or several when the key repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    One(Option<f64>),
    Many(Vec<Option<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub params: BTreeMap<String, ParamValue>,
    pub computed: Option<f64>,
    pub reference: Option<f64>,
    pub tol: Option<f64>,
    pub pass: bool,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl CheckEntry {
    pub fn from_record(rec: &CheckRecord, keep_time: bool) -> Self {
        let mut grouped: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
        for (k, v) in &rec.params {
            grouped.entry(k.clone()).or_default().push(finite(*v));
        }
        let params = grouped
            .into_iter()
            .map(|(k, mut v)| {
                let value = if v.len() == 1 {
                    ParamValue::One(v.pop().flatten())
                } else {
                    ParamValue::Many(v)
                };
                (k, value)
            })
            .collect();
        Self {
            name: rec.name.clone(),
            params,
            computed: finite(rec.computed),
            reference: finite(rec.reference),
            tol: finite(rec.tol),
            pass: rec.pass,
            seconds: if keep_time { rec.seconds } else { 0.0 },
            error: rec.error.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    /// Unix time of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub config: RunConfig,
    pub checks: Vec<CheckEntry>,
    /// `κ_audit`, when a check computed it.
    pub normalization: Option<f64>,
    pub verdict: bool,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(s)?)
    }

    /// Flat projection of the check records.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(CsvRow {
                name: &c.name,
                pass: c.pass,
                computed: c.computed,
                reference: c.reference,
                tol: c.tol,
                seconds: c.seconds,
                params: flatten_params(&c.params),
                error: c.error.as_deref().unwrap_or(""),
            })?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
    }

    /// One summary line per check.
    pub fn summary(&self) -> Vec<String> {
        let short = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        self.checks
            .iter()
            .map(|c| {
                let status = if c.pass { "PASS" } else { "FAIL" };
                match &c.error {
                    Some(e) => format!("{status} {}: {e}", c.name),
                    None => format!(
                        "{status} {} computed={} reference={} tol={} ({:.2} s)",
                        c.name,
                        short(c.computed),
                        short(c.reference),
                        short(c.tol),
                        c.seconds
                    ),
                }
            })
            .collect()
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    pass: bool,
    computed: Option<f64>,
    reference: Option<f64>,
    tol: Option<f64>,
    seconds: f64,
    params: String,
    error: &'a str,
}

fn flatten_params(params: &BTreeMap<String, ParamValue>) -> String {
    let show = |v: &Option<f64>| v.map_or_else(|| "null".to_string(), num);
    params
        .iter()
        .map(|(k, v)| match v {
            ParamValue::One(x) => format!("{k}={}", show(x)),
            ParamValue::Many(xs) => format!("{k}={}", xs.iter().map(show).collect::<Vec<_>>().join("|")),
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Tidy table printed by the table commands.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::Serialize(e.to_string()))
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Table cell; empty when absent.
pub fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}
