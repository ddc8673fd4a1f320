//! Seeded multi-trial experiments on random Elastic Net instances.
//!
//! Every trial draws `A`, `b` and `x₀` i.i.d. standard normal and runs each
//! configured method on that same instance. Randomness comes from ChaCha20
//! keyed by `seed_from_u64(seed)`; the 64-bit ChaCha stream id selects the
//! substream, `trial << 8` for the instance and `(trial << 8) | (1 + method)`
//! for a stochastic method's index draws. Streams never overlap, so trials can
//! run in any order or in parallel with identical results.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::ElasticNetProblem;
use crate::optimizers::{
    adam_run, gd_run, hspeg_run, speg_run, sspeg_run, RunRecord, RunStatus, StepSchedule,
    DEFAULT_ETA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SPEG-s", alias = "SPEG")]
    SpegS,
    #[serde(rename = "SPEG-g")]
    SpegG,
    #[serde(rename = "S-SPEG")]
    SSpeg,
    #[serde(rename = "H-SPEG")]
    HSpeg,
    #[serde(rename = "GD")]
    Gd,
    #[serde(rename = "Adam")]
    Adam,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::SpegS,
        Method::SpegG,
        Method::SSpeg,
        Method::HSpeg,
        Method::Gd,
        Method::Adam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SpegS => "SPEG-s",
            Method::SpegG => "SPEG-g",
            Method::SSpeg => "S-SPEG",
            Method::HSpeg => "H-SPEG",
            Method::Gd => "GD",
            Method::Adam => "Adam",
        }
    }

    fn stream_tag(self) -> u64 {
        1 + Method::ALL.iter().position(|&m| m == self).unwrap() as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "SPEG" {
            return Ok(Method::SpegS);
        }
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

fn default_trials() -> usize {
    20
}
fn default_max_iters() -> usize {
    100
}
fn default_switch_k() -> usize {
    10
}
fn default_schedule_c() -> f64 {
    4.0
}
fn default_gd_step() -> f64 {
    0.001
}
fn default_adam_lr() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_switch_k")]
    pub switch_k: usize,
    #[serde(default = "default_schedule_c")]
    pub schedule_c: f64,
    #[serde(default = "default_gd_step")]
    pub gd_step: f64,
    #[serde(default = "default_adam_lr")]
    pub adam_lr: f64,
}

impl ExperimentConfig {
    /// A config with the default trial count, budget and step sizes.
    pub fn new(m: usize, n: usize, lambda1: f64, lambda2: f64, methods: Vec<Method>) -> Self {
        Self {
            m,
            n,
            lambda1,
            lambda2,
            trials: default_trials(),
            max_iters: default_max_iters(),
            methods,
            seed: 0,
            switch_k: default_switch_k(),
            schedule_c: default_schedule_c(),
            gd_step: default_gd_step(),
            adam_lr: default_adam_lr(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n == 0 {
            return fail(format!("m and n must be positive, got {}x{}", self.m, self.n));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.max_iters == 0 {
            return fail("max_iters must be at least 1".into());
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0 && self.lambda1.is_finite() && self.lambda2.is_finite()) {
            return fail("lambda1 and lambda2 must be finite and nonnegative".into());
        }
        if self.methods.is_empty() {
            return fail("methods must not be empty".into());
        }
        if !(self.schedule_c > 0.0 && self.schedule_c.is_finite()) {
            return fail(format!("schedule_c must be positive, got {}", self.schedule_c));
        }
        if !(self.gd_step > 0.0 && self.gd_step.is_finite()) {
            return fail(format!("gd_step must be positive, got {}", self.gd_step));
        }
        if !(self.adam_lr > 0.0 && self.adam_lr.is_finite()) {
            return fail(format!("adam_lr must be positive, got {}", self.adam_lr));
        }
        if self.methods.contains(&Method::HSpeg) && (self.switch_k == 0 || self.switch_k > self.max_iters) {
            return fail(format!(
                "switch_k must be in 1..={}, got {}",
                self.max_iters, self.switch_k
            ));
        }
        Ok(())
    }
}

pub fn trial_rng(seed: u64, trial: usize, tag: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 8) | tag);
    rng
}

/// One random instance: `A` (row-major), then `b`, then `x₀`, all `N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: Array2<f64>,
    pub b: Array1<f64>,
    pub x0: Vec<f64>,
}

pub fn sample_instance<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Instance {
    let mut draw = || -> f64 { rng.sample(StandardNormal) };
    let a = Array2::from_shape_simple_fn((m, n), &mut draw);
    let b = Array1::from_shape_simple_fn(m, &mut draw);
    let x0 = (0..n).map(|_| draw()).collect();
    Instance { a, b, x0 }
}

/// Mean, median (midpoint for even counts) and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
}

pub fn aggregate_stats(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot aggregate an empty sample".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    let stddev = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(Summary { mean, median, stddev })
}

/// Outcome of one method on one trial.
#[derive(Debug, Clone)]
pub struct Cell {
    pub method: Method,
    pub trial: usize,
    pub outcome: Result<RunRecord>,
}

impl Cell {
    pub fn failed(&self) -> bool {
        match &self.outcome {
            Ok(rec) => rec.status == RunStatus::NumericalFailure,
            Err(_) => true,
        }
    }

    pub fn record(&self) -> Option<&RunRecord> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iter: usize,
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub method: Method,
    pub completed: usize,
    pub failed: usize,
    /// Statistics of the final best values; absent when every trial failed.
    #[serde(rename = "final")]
    pub final_f_best: Option<Summary>,
    /// Per-iteration statistics of the best value so far.
    pub trajectory: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub methods: Vec<MethodStats>,
}

impl TrialStats {
    pub fn get(&self, method: Method) -> Option<&MethodStats> {
        self.methods.iter().find(|s| s.method == method)
    }

    pub fn mean_final(&self, method: Method) -> Option<f64> {
        self.get(method)?.final_f_best.map(|s| s.mean)
    }
}

/// Results of [`run_trials`]: cells ordered by trial, then by config method order.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub stats: TrialStats,
    pub cells: Vec<Cell>,
    pub instances: Vec<Instance>,
}

impl ExperimentOutcome {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.failed()).count()
    }

    pub fn cells_for(&self, method: Method) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.method == method)
    }

    pub fn problem(&self, trial: usize) -> Result<ElasticNetProblem> {
        let inst = &self.instances[trial];
        ElasticNetProblem::new(inst.a.clone(), inst.b.clone(), self.config.lambda1, self.config.lambda2)
    }
}

pub fn run_method(cfg: &ExperimentConfig, method: Method, trial: usize, p: &ElasticNetProblem, x0: &[f64]) -> Result<RunRecord> {
    let diminishing = StepSchedule::NormalizedDiminishing { c: cfg.schedule_c };
    let mut rng = trial_rng(cfg.seed, trial, method.stream_tag());
    match method {
        Method::SpegS => speg_run(p, x0, diminishing, cfg.max_iters, DEFAULT_ETA),
        Method::SpegG => speg_run(p, x0, StepSchedule::Geometric { ratio: 0.5 }, cfg.max_iters, DEFAULT_ETA),
        Method::SSpeg => sspeg_run(p, x0, diminishing, cfg.max_iters, DEFAULT_ETA, &mut rng),
        Method::HSpeg => hspeg_run(p, x0, diminishing, cfg.switch_k, cfg.max_iters, DEFAULT_ETA, &mut rng),
        Method::Gd => gd_run(p, x0, cfg.gd_step, cfg.max_iters),
        Method::Adam => adam_run(p, x0, cfg.adam_lr, cfg.max_iters),
    }
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> (Instance, Vec<Cell>) {
    let mut rng = trial_rng(cfg.seed, trial, 0);
    let inst = sample_instance(cfg.m, cfg.n, &mut rng);
    let cells = match ElasticNetProblem::new(inst.a.clone(), inst.b.clone(), cfg.lambda1, cfg.lambda2) {
        Ok(p) => cfg
            .methods
            .iter()
            .map(|&method| Cell {
                method,
                trial,
                outcome: run_method(cfg, method, trial, &p, &inst.x0),
            })
            .collect(),
        Err(e) => cfg
            .methods
            .iter()
            .map(|&method| Cell { method, trial, outcome: Err(e.clone()) })
            .collect(),
    };
    (inst, cells)
}

fn method_stats(method: Method, cells: &[&Cell]) -> MethodStats {
    let records: Vec<&RunRecord> = cells
        .iter()
        .filter(|c| !c.failed())
        .filter_map(|c| c.record())
        .collect();
    let finals: Vec<f64> = records.iter().map(|r| r.final_f_best()).collect();
    let len = records.iter().map(|r| r.rows.len()).max().unwrap_or(0);
    let trajectory = (0..len)
        .map(|k| {
            // runs that stopped early hold their last best value
            let column: Vec<f64> = records
                .iter()
                .map(|r| r.rows.get(k).unwrap_or_else(|| r.rows.last().unwrap()).f_best)
                .collect();
            let s = aggregate_stats(&column).expect("nonempty column");
            TrajectoryPoint { iter: k, mean: s.mean, median: s.median, stddev: s.stddev }
        })
        .collect();
    MethodStats {
        method,
        completed: records.len(),
        failed: cells.len() - records.len(),
        final_f_best: aggregate_stats(&finals).ok(),
        trajectory,
    }
}

pub fn summarize(cfg: &ExperimentConfig, cells: &[Cell]) -> TrialStats {
    let methods = cfg
        .methods
        .iter()
        .map(|&m| {
            let of_method: Vec<&Cell> = cells.iter().filter(|c| c.method == m).collect();
            method_stats(m, &of_method)
        })
        .collect();
    TrialStats { methods }
}

/// Run every configured method on every trial, in parallel over trials on the
/// current rayon pool.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let per_trial: Vec<(Instance, Vec<Cell>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect();
    let mut instances = Vec::with_capacity(cfg.trials);
    let mut cells = Vec::with_capacity(cfg.trials * cfg.methods.len());
    for (inst, c) in per_trial {
        instances.push(inst);
        cells.extend(c);
    }
    let stats = summarize(cfg, &cells);
    Ok(ExperimentOutcome { config: cfg.clone(), stats, cells, instances })
}

/// [`run_trials`] on a dedicated pool of `threads` workers.
pub fn run_trials_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_trials(cfg))
}
