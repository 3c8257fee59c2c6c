use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::checks::CheckOutcome;
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::run::{Row, RowError};

pub const CSV_HEADER: [&str; 9] = [
    "problem",
    "x",
    "t",
    "n",
    "re_u",
    "im_u",
    "jump_residual",
    "cond_estimate",
    "runtime_ms",
];

/// 17 significant digits; empty for a missing coordinate.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.problem.name().to_string(),
            fmt_opt(r.point.x),
            fmt_opt(r.point.t),
            r.n.to_string(),
            fmt_f64(r.u.re),
            fmt_f64(r.u.im),
            fmt_f64(r.jump_residual),
            fmt_f64(r.cond_estimate),
            format!("{:.3}", r.runtime_ms),
        ])?;
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub row: usize,
    #[serde(flatten)]
    pub error: RowError,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub name: String,
    pub problem: &'static str,
    pub rows: usize,
    pub threads: usize,
    pub runtime_ms: f64,
    pub failures: Vec<Failure>,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, rows: &[Row], checks: Vec<CheckOutcome>, threads: usize, runtime_ms: f64) -> Self {
        let failures: Vec<Failure> = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.error.clone().map(|error| Failure { row: i, error }))
            .collect();
        Manifest {
            schema_version: crate::config::SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            name: cfg.name.clone(),
            problem: cfg.problem.name(),
            rows: rows.len(),
            threads,
            runtime_ms,
            passed: checks.iter().all(|c| c.pass),
            failures,
            checks,
            config: cfg.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemKind;
    use crate::run::Point;
    use num_complex::Complex64;

    #[test]
    fn seventeen_digits() {
        let s = fmt_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let v = std::f64::consts::PI;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn csv_layout() {
        let row = Row {
            problem: ProblemKind::Pii,
            point: Point { x: Some(-2.0), t: None },
            n: 40,
            u: Complex64::new(0.5, -0.25),
            jump_residual: 1e-12,
            cond_estimate: 10.0,
            runtime_ms: 1.5,
            error: None,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("pii,-2.0000000000000000e0,,40,5.0000000000000000e-1,"));
    }
}
