use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::approx::csv_error;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// An asserted inequality or identity held.
    Pass,
    /// An asserted inequality or identity failed.
    Fail,
    /// Recorded as evidence only.
    Info,
}

/// One case of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub case: String,
    pub inputs: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub status: Status,
    /// Data kept in the JSON report but not in the flat CSV, such as witnesses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ExperimentRow {
    pub fn new(case: impl Into<String>) -> Self {
        ExperimentRow {
            case: case.into(),
            inputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
            status: Status::Info,
            detail: None,
        }
    }

    pub fn input(mut self, key: &str, value: impl Serialize) -> Self {
        self.inputs.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    /// `Pass` when `ok`, else `Fail`.
    pub fn assert(self, ok: bool) -> Self {
        self.status(if ok { Status::Pass } else { Status::Fail })
    }

    pub fn detail(mut self, value: impl Serialize) -> Self {
        self.detail = serde_json::to_value(value).ok();
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

/// Named collection of cases with the parameters needed to rerun them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub rows: Vec<ExperimentRow>,
    pub seed: u64,
    /// Wall-clock seconds; left empty unless timing is requested, so reruns compare equal.
    #[serde(default)]
    pub runtime_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        ExperimentReport {
            name: name.into(),
            parameters: BTreeMap::new(),
            rows: Vec::new(),
            seed,
            runtime_seconds: None,
        }
    }

    pub fn parameter(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn push(&mut self, row: ExperimentRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ExperimentRow>) {
        self.rows.extend(rows);
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExperimentRow> {
        self.rows.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn row(&self, case: &str) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.case == case)
    }

    /// Flat table: `case`, `status`, every input key, then every metric key.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let inputs: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.inputs.keys()).collect();
        let metrics: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.metrics.keys()).collect();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["case".to_string(), "status".to_string()];
        header.extend(inputs.iter().map(|k| k.to_string()));
        header.extend(metrics.iter().map(|k| k.to_string()));
        w.write_record(&header).map_err(csv_error)?;
        for r in &self.rows {
            let status = match r.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            let mut rec = vec![r.case.clone(), status.to_string()];
            for k in &inputs {
                rec.push(match r.inputs.get(*k) {
                    None => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                });
            }
            for k in &metrics {
                rec.push(r.metrics.get(*k).map(|v| format!("{v:?}")).unwrap_or_default());
            }
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}
