//! Experiment harness: JSON configs in, CSV rows and a JSON manifest out.

pub mod checks;
pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::Path;
use std::time::Instant;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, Manifest};
use crate::run::{run_rows, Row};

/// Rows plus the manifest (checks included) for one config.
pub fn execute(cfg: &ExperimentConfig, threads: usize) -> CliResult<(Vec<Row>, Manifest)> {
    let start = Instant::now();
    let rows = run_rows(cfg, threads)?;
    let outcomes = checks::evaluate(cfg, &rows);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let manifest = Manifest::new(cfg, &rows, outcomes, threads, ms);
    Ok((rows, manifest))
}

/// Write the CSV to `csv` (stdout when `None`) and the manifest when a path is given.
pub fn emit(rows: &[Row], manifest: &Manifest, csv: Option<&Path>, manifest_path: Option<&Path>) -> CliResult<()> {
    match csv {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| CliError::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            write_csv(std::io::BufWriter::new(f), rows)?;
        }
        None => write_csv(std::io::stdout().lock(), rows)?,
    }
    if let Some(p) = manifest_path {
        manifest.write(p)?;
    }
    Ok(())
}
