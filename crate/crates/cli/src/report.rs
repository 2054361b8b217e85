use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Number(x as f64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub config_hash: String,
    /// Parameter echo such as `R=16;sigma=2`.
    pub params: String,
    pub metric: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub analysis: String,
    pub config_hash: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.status == Status::Complete && self.rows.iter().all(|r| r.pass != Some(false))
    }
}

/// Collects rows for one experiment.
pub struct RowSink {
    experiment: String,
    config_hash: String,
    pub rows: Vec<ReportRow>,
}

impl RowSink {
    pub fn new(experiment: &str, config_hash: &str) -> Self {
        RowSink {
            experiment: experiment.to_string(),
            config_hash: config_hash.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, params: impl Into<String>, metric: &str, value: impl Into<Value>) {
        self.push_checked(params, metric, value, None);
    }

    pub fn check(&mut self, params: impl Into<String>, metric: &str, value: impl Into<Value>, pass: bool) {
        self.push_checked(params, metric, value, Some(pass));
    }

    fn push_checked(&mut self, params: impl Into<String>, metric: &str, value: impl Into<Value>, pass: Option<bool>) {
        self.rows.push(ReportRow {
            experiment: self.experiment.clone(),
            config_hash: self.config_hash.clone(),
            params: params.into(),
            metric: metric.to_string(),
            value: value.into(),
            pass,
        });
    }
}

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const METADATA_JSON: &str = "metadata.json";

/// Refuses to overwrite a report produced from a different config.
pub fn check_resume(dir: &Path, config_hash: &str) -> Result<()> {
    let path = dir.join(REPORT_JSON);
    if !path.exists() {
        return Ok(());
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let previous: ExperimentReport =
        serde_json::from_str(&text).with_context(|| format!("unreadable existing report {}", path.display()))?;
    if previous.config_hash != config_hash {
        bail!(
            "{} was produced by config {} but this config hashes to {}; refusing to mix results",
            path.display(),
            previous.config_hash,
            config_hash
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    experiment: &'a str,
    config_hash: &'a str,
    seed: u64,
    jobs: usize,
    tool_version: &'a str,
    started: String,
    finished: String,
}

pub struct RunInfo {
    pub seed: u64,
    pub jobs: usize,
    pub started: chrono::DateTime<chrono::Utc>,
}

/// Writes `report.json`, `report.csv` and `metadata.json` into `dir`.
pub fn write(dir: &Path, report: &ExperimentReport, info: &RunInfo) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = serde_json::to_string_pretty(report)?;
    fs::write(dir.join(REPORT_JSON), json + "\n")?;

    let mut csv = csv::Writer::from_path(dir.join(REPORT_CSV))?;
    csv.write_record(["experiment", "config_hash", "params", "metric", "value", "pass"])?;
    for r in &report.rows {
        let pass = match r.pass {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "",
        };
        csv.write_record([
            r.experiment.as_str(),
            r.config_hash.as_str(),
            r.params.as_str(),
            r.metric.as_str(),
            &r.value.to_string(),
            pass,
        ])?;
    }
    csv.flush()?;

    let meta = Metadata {
        experiment: &report.id,
        config_hash: &report.config_hash,
        seed: info.seed,
        jobs: info.jobs,
        tool_version: env!("CARGO_PKG_VERSION"),
        started: info.started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
    };
    fs::write(dir.join(METADATA_JSON), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}
