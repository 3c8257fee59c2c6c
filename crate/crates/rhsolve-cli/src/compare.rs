//! Row-by-row comparison of two CSV runs.

use std::io::Read;

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::CSV_HEADER;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub problem: String,
    pub x: String,
    pub t: String,
    pub n: usize,
    pub re_u: f64,
    pub im_u: f64,
}

pub fn read_rows<R: Read>(input: R) -> CliResult<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(CliError::Schema(format!("unexpected header {}", header.join(","))));
    }
    let num = |s: &str| -> CliResult<f64> { s.parse::<f64>().map_err(|_| CliError::Schema(format!("bad number {s:?}"))) };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(CsvRow {
            problem: rec[0].to_string(),
            x: rec[1].to_string(),
            t: rec[2].to_string(),
            n: rec[3].parse().map_err(|_| CliError::Schema(format!("bad order {:?}", &rec[3])))?,
            re_u: num(&rec[4])?,
            im_u: num(&rec[5])?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffRow {
    pub problem: String,
    pub x: String,
    pub t: String,
    pub n_a: usize,
    pub n_b: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub rows: Vec<DiffRow>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Rows are paired in order and must share problem, x and t; orders may differ
/// (an n vs 2n comparison gives a self-convergence table).
pub fn compare(a: &[CsvRow], b: &[CsvRow], tolerance: f64) -> CliResult<DiffReport> {
    if a.len() != b.len() {
        return Err(CliError::Schema(format!("row counts differ: {} vs {}", a.len(), b.len())));
    }
    let mut rows = Vec::with_capacity(a.len());
    let mut max_dev: f64 = 0.0;
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        if (ra.problem.as_str(), ra.x.as_str(), ra.t.as_str()) != (rb.problem.as_str(), rb.x.as_str(), rb.t.as_str()) {
            return Err(CliError::Schema(format!("row {i} parameters differ")));
        }
        let d = ((ra.re_u - rb.re_u).powi(2) + (ra.im_u - rb.im_u).powi(2)).sqrt();
        max_dev = if d.is_nan() || max_dev.is_nan() { f64::NAN } else { max_dev.max(d) };
        rows.push(DiffRow {
            problem: ra.problem.clone(),
            x: ra.x.clone(),
            t: ra.t.clone(),
            n_a: ra.n,
            n_b: rb.n,
            deviation: d,
        });
    }
    Ok(DiffReport {
        rows,
        max_deviation: max_dev,
        tolerance,
        pass: max_dev <= tolerance,
    })
}
