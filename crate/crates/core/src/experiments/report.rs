//! CSV tables and the JSON summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Version of the CSV column layouts and the summary schema.
pub const SCHEMA_VERSION: u32 = 1;

/// One CSV file: a header row and one row per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Table {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Format {
            kind: "csv",
            reason: e.to_string(),
        };
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format {
            kind: "csv",
            reason: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
    }
}

/// Formats a float for CSV in shortest round-trip form.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// The result of one experiment.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub report: Value,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn new(name: &str, passed: bool, report: &impl Serialize, tables: Vec<Table>) -> Self {
        Outcome {
            name: name.to_string(),
            passed,
            report: serde_json::to_value(report).expect("reports serialize"),
            tables,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    pub generated_at: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub verdicts: BTreeMap<String, bool>,
    pub results: BTreeMap<String, Value>,
}

impl Summary {
    pub fn new(config: &ExperimentConfig, outcomes: &[Outcome]) -> Self {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Summary {
            tool: "wavesum",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            generated_at: stamp.to_string(),
            config: config.clone(),
            passed: outcomes.iter().all(|o| o.passed),
            verdicts: outcomes
                .iter()
                .map(|o| (o.name.clone(), o.passed))
                .collect(),
            results: outcomes
                .iter()
                .map(|o| (o.name.clone(), o.report.clone()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// The summary with the timestamp blanked, for reproducibility checks.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.generated_at = String::new();
        copy.to_json()
    }
}

/// Writes `summary.json` and one CSV per table into `out_dir`.
pub fn emit_report(
    summary: &Summary,
    outcomes: &[Outcome],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for table in outcomes.iter().flat_map(|o| &o.tables) {
        let path = out_dir.join(format!("{}.csv", table.name));
        fs::write(&path, table.to_csv()?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = out_dir.join("summary.json");
    fs::write(&path, summary.to_json() + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        let mut t = Table::new("t", vec!["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("cells", vec!["v"]);
        t.push(vec![num(0.5)]);
        let outcomes = vec![Outcome::new("demo", true, &vec![1, 2], vec![t])];
        let summary = Summary::new(&ExperimentConfig::default(), &outcomes);
        let files = emit_report(&summary, &outcomes, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let json: Value = serde_json::from_str(&fs::read_to_string(&files[1]).unwrap()).unwrap();
        assert_eq!(json["passed"], Value::Bool(true));
        assert_eq!(json["results"]["demo"][1], 2);
        assert!(summary.canonical_json().contains("\"generated_at\": \"\""));
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let summary = Summary::new(&ExperimentConfig::default(), &[]);
        let err = emit_report(&summary, &[], &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
