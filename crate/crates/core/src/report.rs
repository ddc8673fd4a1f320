//! Output bundle: `stats.json`, `trajectories.csv`, `runmeta.json`.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so the
//! files of two runs with the same seed and config are byte-identical and
//! parsing them back recovers every value exactly. Timing only appears in
//! `runmeta.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{ExperimentOutcome, Method};
use crate::optimizers::RunStatus;

pub const STATS_FILE: &str = "stats.json";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const RUNMETA_FILE: &str = "runmeta.json";
pub const TRAJECTORY_HEADER: &str = "method,trial,iter,f_current,f_best,grad_norm";

/// One parsed line of `trajectories.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub method: String,
    pub trial: usize,
    pub iter: usize,
    pub f_current: f64,
    pub f_best: f64,
    pub grad_norm: f64,
}

pub fn stats_json(outcome: &ExperimentOutcome) -> String {
    let mut s = serde_json::to_string_pretty(&outcome.stats).expect("stats serialize");
    s.push('\n');
    s
}

pub fn trajectories_csv(outcome: &ExperimentOutcome) -> String {
    let mut cells: Vec<_> = outcome.cells.iter().filter_map(|c| Some((c, c.record()?))).collect();
    cells.sort_by(|(a, _), (b, _)| (a.method.name(), a.trial).cmp(&(b.method.name(), b.trial)));
    let mut out = String::with_capacity(64 * cells.iter().map(|(_, r)| r.rows.len()).sum::<usize>() + 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (cell, rec) in cells {
        for row in &rec.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                cell.method.name(),
                cell.trial,
                row.k,
                row.f_current,
                row.f_best,
                row.grad_norm
            );
        }
    }
    out
}

pub fn parse_trajectories(text: &str) -> Result<Vec<TrajectoryRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(TRAJECTORY_HEADER) {
        return Err(Error::InvalidArgument("missing trajectories header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::InvalidArgument(format!("malformed row {}: {line}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(TrajectoryRow {
                method: f[0].to_string(),
                trial: f[1].parse().map_err(|_| bad())?,
                iter: f[2].parse().map_err(|_| bad())?,
                f_current: num(f[3])?,
                f_best: num(f[4])?,
                grad_norm: num(f[5])?,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct CellMeta {
    method: Method,
    trial: usize,
    status: Option<RunStatus>,
    error: Option<String>,
    iterations: usize,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    package: &'static str,
    version: &'static str,
    config: &'a crate::harness::ExperimentConfig,
    seed: u64,
    failed_cells: usize,
    total_wall_time_ms: f64,
    cells: Vec<CellMeta>,
}

pub fn runmeta_json(outcome: &ExperimentOutcome, total_wall_time_ms: f64) -> String {
    let cells = outcome
        .cells
        .iter()
        .map(|c| CellMeta {
            method: c.method,
            trial: c.trial,
            status: c.record().map(|r| r.status),
            error: c.outcome.as_ref().err().map(|e| e.to_string()),
            iterations: c.record().map_or(0, |r| r.rows.len().saturating_sub(1)),
            wall_time_ms: c
                .record()
                .and_then(|r| r.rows.last())
                .map_or(0.0, |row| row.wall_time_ms),
        })
        .collect();
    let meta = RunMeta {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: &outcome.config,
        seed: outcome.config.seed,
        failed_cells: outcome.failed_cells(),
        total_wall_time_ms,
        cells,
    };
    let mut s = serde_json::to_string_pretty(&meta).expect("runmeta serialize");
    s.push('\n');
    s
}

/// Write the three bundle files into `dir`, creating it if needed.
pub fn write_bundle(outcome: &ExperimentOutcome, dir: &Path, total_wall_time_ms: f64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        (STATS_FILE, stats_json(outcome)),
        (TRAJECTORIES_FILE, trajectories_csv(outcome)),
        (RUNMETA_FILE, runmeta_json(outcome, total_wall_time_ms)),
    ];
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}
