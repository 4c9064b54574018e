//! Metric rows, their CSV form, and Pareto selection.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str =
    "step,lambda,l0,mse,loss_recovered,gamma,dead_fraction,dict_recovery,wallclock_s";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: usize,
    pub lambda: Option<f64>,
    pub l0: f64,
    pub mse: f64,
    pub loss_recovered: f64,
    pub gamma: f64,
    pub dead_fraction: f64,
    pub dict_recovery: Option<f64>,
    pub wallclock_s: f64,
}

impl MetricsRecord {
    /// `self` dominates `other`: no worse on both axes, strictly better on one.
    pub fn dominates(&self, other: &Self) -> bool {
        self.l0 <= other.l0
            && self.loss_recovered >= other.loss_recovered
            && (self.l0 < other.l0 || self.loss_recovered > other.loss_recovered)
    }
}

/// Records not dominated by any other, in input order.
pub fn pareto_frontier(records: &[MetricsRecord]) -> Vec<MetricsRecord> {
    records
        .iter()
        .filter(|r| !records.iter().any(|o| o.dominates(r)))
        .cloned()
        .collect()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            offset: 0,
            message: format!("{}: {other:?}", path.display()),
        },
    }
}

pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(file, "{METRICS_HEADER}").map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    for r in records {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}
