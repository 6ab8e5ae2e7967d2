//! Per-iteration result rows and CSV output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// One recorded iterate of one run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub run_id: String,
    pub env: String,
    pub gamma: f64,
    pub algo: String,
    pub instance: usize,
    pub seed: usize,
    pub iteration: usize,
    pub bellman_err: f64,
    pub value_err: Option<f64>,
    pub policy_value_err: Option<f64>,
    pub wallclock_ns: u64,
}

pub const CSV_HEADER: &str =
    "run_id,env,gamma,algo,instance,seed,iteration,bellman_err,value_err,policy_value_err,wallclock_ns";

pub fn run_id(env: &str, gamma: f64, algo: &str, instance: usize, seed: usize) -> String {
    format!("{env}/g{gamma}/{algo}/i{instance}/s{seed}")
}

/// Writes rows with a header line. Floats use the shortest decimal that
/// round-trips; missing metrics are empty fields.
pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(file, rows)
}

/// Generic CSV writer for summary tables.
pub fn write_records<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
