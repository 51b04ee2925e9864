//! Run records and their JSON / CSV serialization.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chern_simons::{CsResult, Fit};
use crate::error::{Error, Result};
use crate::presets::PresetSpec;
use crate::suite::SuiteReport;

pub const CSV_HEADER: [&str; 6] = [
    "epsilon",
    "cs_direct",
    "cs_reduced",
    "term_linear",
    "term_quadratic",
    "error_estimate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

/// One exported row per ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub epsilon: f64,
    pub cs_direct: f64,
    pub cs_reduced: f64,
    pub term_linear: f64,
    pub term_quadratic: f64,
    pub error_estimate: f64,
}

impl From<&CsResult> for ResultRow {
    fn from(r: &CsResult) -> Self {
        Self {
            epsilon: r.epsilon,
            cs_direct: r.cs_direct,
            cs_reduced: r.cs_reduced,
            term_linear: r.term_linear,
            term_quadratic: r.term_quadratic,
            error_estimate: r.quadrature_error_estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub preset: PresetSpec,
    pub fiber_volume: f64,
    pub results: Vec<ResultRow>,
    pub fit: Option<Fit>,
    pub suites: Vec<SuiteReport>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunRecord {
    pub fn new(preset: PresetSpec, fiber_volume: f64) -> Self {
        Self {
            preset,
            fiber_volume,
            results: Vec::new(),
            fit: None,
            suites: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

pub fn to_json_string(record: &RunRecord) -> Result<String> {
    let mut s = serde_json::to_string_pretty(record)?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Record(e.to_string()))
}

pub fn export_results(record: &RunRecord, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Json => to_json_string(record)?,
        ExportFormat::Csv => to_csv_string(&record.results)?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// Checks the exported JSON layout before deserializing.
pub fn validate_record_json(value: &serde_json::Value) -> Result<()> {
    let obj = value.as_object().ok_or_else(|| Error::Record("top level is not an object".into()))?;
    for key in ["preset", "fiber_volume", "results", "fit", "suites"] {
        if !obj.contains_key(key) {
            return Err(Error::Record(format!("missing key `{key}`")));
        }
    }
    if !obj["fiber_volume"].is_number() {
        return Err(Error::Record("`fiber_volume` is not a number".into()));
    }
    let results = obj["results"]
        .as_array()
        .ok_or_else(|| Error::Record("`results` is not an array".into()))?;
    for (i, row) in results.iter().enumerate() {
        for key in CSV_HEADER {
            if !row.get(key).is_some_and(|v| v.is_number()) {
                return Err(Error::Record(format!("results[{i}].{key} missing or not a number")));
            }
        }
    }
    match &obj["fit"] {
        serde_json::Value::Null => {}
        fit => {
            for key in ["a", "b", "residual"] {
                if !fit.get(key).is_some_and(|v| v.is_number()) {
                    return Err(Error::Record(format!("fit.{key} missing or not a number")));
                }
            }
        }
    }
    if !obj["suites"].is_array() {
        return Err(Error::Record("`suites` is not an array".into()));
    }
    Ok(())
}

pub fn parse_record_json(text: &str) -> Result<RunRecord> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    validate_record_json(&value)?;
    Ok(serde_json::from_value(value)?)
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Record(format!("unexpected CSV header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
