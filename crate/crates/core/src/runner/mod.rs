//! Experiment runner: config parsing, execution and output files.

pub mod config;
pub mod experiments;
pub mod report;
pub mod tools;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{validate_config, Experiment, ExperimentConfig};
pub use experiments::Table;
pub use report::{Check, Comparison, RunReport, SCHEMA_VERSION};

use crate::{Error, Result};

/// Runs one experiment without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<(RunReport, Vec<Table>)> {
    let mut report = RunReport::new(cfg);
    let tables = experiments::execute(cfg, &mut report)?;
    Ok((report, tables))
}

pub(crate) fn write_table(dir: &Path, t: &Table) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", t.name));
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(&t.header).map_err(csv_err)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|v| format!("{v:.12e}"))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(path)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Runs the experiment and writes `report.json`, `timing.json` and one CSV per table
/// into `out_dir/<experiment>/`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let (mut report, tables) = execute(cfg)?;
    let dir = out_dir.join(cfg.experiment.name());
    fs::create_dir_all(&dir)?;
    for t in &tables {
        let p = write_table(&dir, t)?;
        report.artifacts.push(p.file_name().unwrap().to_string_lossy().into_owned());
    }
    report.artifacts.push("timing.json".into());
    fs::write(dir.join("report.json"), report.to_json())?;
    let timing = serde_json::json!({
        "experiment": cfg.experiment.name(),
        "wall_seconds": start.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
    });
    fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing).unwrap())?;
    log::info!("{}: pass={} -> {}", cfg.experiment.name(), report.pass, dir.display());
    Ok(report)
}
