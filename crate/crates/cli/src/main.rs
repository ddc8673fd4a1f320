use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde_json::json;

use specopt::checks::{self, Level};
use specopt::harness::{run_trials, run_trials_with_threads, ExperimentConfig, ExperimentOutcome};
use specopt::objectives::catalog;
use specopt::report::write_bundle;
use specopt::specdiff::specular_gradient_from_pairs;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_FAILED_CELLS: u8 = 2;

#[derive(Parser)]
#[command(name = "specopt", version, about = "Specular gradient methods on Elastic Net benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method on seeded random instances.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run the config over the cross product of λ₁ and λ₂ values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda1: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda2: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run the sampled invariant suites.
    Check {
        #[arg(long, default_value = "fast")]
        level: String,
    },
    /// Print the specular gradient of a catalog function at a point.
    Specgrad {
        name: String,
        #[arg(allow_hyphen_values = true)]
        point: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::Run { config, out, seed, trials } => cmd_run(&config, &out, seed, trials),
        Command::Sweep { config, lambda1, lambda2, out, seed, trials } => {
            cmd_sweep(&config, &lambda1, &lambda2, &out, seed, trials)
        }
        Command::Check { level } => cmd_check(&level),
        Command::Specgrad { name, point } => cmd_specgrad(&name, &point),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>, trials: Option<usize>) -> anyhow::Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_cap() -> anyhow::Result<Option<usize>> {
    match std::env::var("SPECOPT_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("SPECOPT_THREADS must be a positive integer, got {s:?}"),
        },
        Err(_) => Ok(None),
    }
}

fn execute(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<ExperimentOutcome> {
    let start = Instant::now();
    let outcome = match thread_cap()? {
        Some(n) => run_trials_with_threads(cfg, n)?,
        None => run_trials(cfg)?,
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    write_bundle(&outcome, out, elapsed_ms).with_context(|| format!("writing {}", out.display()))?;
    Ok(outcome)
}

fn print_summary(outcome: &ExperimentOutcome) {
    for stats in &outcome.stats.methods {
        match &stats.final_f_best {
            Some(s) => println!(
                "{:<8} mean {:.6e}  median {:.6e}  sd {:.3e}  ({} ok, {} failed)",
                stats.method.name(),
                s.mean,
                s.median,
                s.stddev,
                stats.completed,
                stats.failed
            ),
            None => println!("{:<8} no completed runs ({} failed)", stats.method.name(), stats.failed),
        }
    }
}

fn cmd_run(config: &Path, out: &Path, seed: Option<u64>, trials: Option<usize>) -> anyhow::Result<u8> {
    let cfg = load_config(config, seed, trials)?;
    let outcome = execute(&cfg, out)?;
    print_summary(&outcome);
    println!("wrote {}", out.display());
    Ok(if outcome.failed_cells() > 0 { EXIT_FAILED_CELLS } else { EXIT_OK })
}

fn cell_dir(lambda1: f64, lambda2: f64) -> String {
    format!("l1_{lambda1}_l2_{lambda2}")
}

fn cmd_sweep(
    config: &Path,
    lambda1: &[f64],
    lambda2: &[f64],
    out: &Path,
    seed: Option<u64>,
    trials: Option<usize>,
) -> anyhow::Result<u8> {
    if lambda1.is_empty() || lambda2.is_empty() {
        bail!("lambda lists must not be empty");
    }
    let base = load_config(config, seed, trials)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut entries = Vec::new();
    let mut code = EXIT_OK;
    for &l1 in lambda1 {
        for &l2 in lambda2 {
            let dir = cell_dir(l1, l2);
            let mut cfg = base.clone();
            cfg.lambda1 = l1;
            cfg.lambda2 = l2;
            let result = cfg.validate().map_err(anyhow::Error::from).and_then(|()| execute(&cfg, &out.join(&dir)));
            let entry = match result {
                Ok(outcome) => {
                    let failed = outcome.failed_cells();
                    if failed > 0 && code == EXIT_OK {
                        code = EXIT_FAILED_CELLS;
                    }
                    println!("{dir}: {failed} failed cells");
                    json!({ "lambda1": l1, "lambda2": l2, "dir": dir, "failed_cells": failed, "error": null })
                }
                Err(e) => {
                    eprintln!("{dir}: error: {e:#}");
                    code = EXIT_ERROR;
                    json!({ "lambda1": l1, "lambda2": l2, "dir": dir, "failed_cells": null, "error": format!("{e:#}") })
                }
            };
            entries.push(entry);
        }
    }
    let manifest = json!({ "config": base, "cells": entries });
    let path = out.join("index.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(code)
}

fn cmd_check(level: &str) -> anyhow::Result<u8> {
    let level: Level = level.parse()?;
    let mut all = true;
    for report in checks::run_all(level) {
        println!("{report}");
        all &= report.passed();
    }
    Ok(if all { EXIT_OK } else { EXIT_ERROR })
}

fn cmd_specgrad(name: &str, point: &str) -> anyhow::Result<u8> {
    let obj = catalog(name)?;
    let x = point
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad coordinate {s:?}")))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    if x.len() != obj.dim() {
        bail!("{name} takes a point of dimension {}, got {}", obj.dim(), x.len());
    }
    let pairs = obj.partials(&x)?;
    let gradient = specular_gradient_from_pairs(&pairs)?;
    let doc = json!({ "function": name, "point": x, "gradient": gradient, "pairs": pairs });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(EXIT_OK)
}
