//! Specular gradient methods (deterministic, stochastic, hybrid, projected)
//! and the GD / Adam baselines.
//!
//! Every run records one row per visited iterate `x_k`: the objective value,
//! the best value so far, the norm of the search direction used at `x_k` and
//! the step taken from it. Specular methods are not descent methods, so the
//! best iterate is tracked alongside the current one.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{distance, norm2};
use crate::objectives::{ElasticNetProblem, Objective};
use crate::specdiff::specular_gradient_from_pairs;

/// Default stationarity tolerance on the specular gradient norm.
pub const DEFAULT_ETA: f64 = 1e-12;

/// Step-size rule `h_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepSchedule {
    /// `h_k = c / ((k+1)·‖g_k‖)`: unit-direction steps of length `c/(k+1)`,
    /// which sum to infinity while their squares stay summable.
    NormalizedDiminishing { c: f64 },
    /// `h_k = ratio^(k+1) / ‖g_k‖`.
    Geometric { ratio: f64 },
    /// `h_k = h`.
    Constant { h: f64 },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::NormalizedDiminishing { c } => c > 0.0 && c.is_finite(),
            Self::Geometric { ratio } => ratio > 0.0 && ratio < 1.0,
            Self::Constant { h } => h > 0.0 && h.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid step schedule {self:?}")))
        }
    }

    /// Length of the move `h_k·‖g_k‖` before normalization, i.e. `t_k` for
    /// normalized rules.
    pub fn step_length(&self, k: usize) -> f64 {
        match *self {
            Self::NormalizedDiminishing { c } => c / (k as f64 + 1.0),
            Self::Geometric { ratio } => ratio.powi(k as i32 + 1),
            Self::Constant { h } => h,
        }
    }

    pub fn step(&self, k: usize, grad_norm: f64) -> f64 {
        match self {
            Self::Constant { h } => *h,
            _ => self.step_length(k) / grad_norm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    MaxIters,
    Stationary,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRow {
    pub k: usize,
    pub f_current: f64,
    pub f_best: f64,
    pub grad_norm: f64,
    /// Step size applied at this iterate; zero on the terminal row.
    pub step: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rows: Vec<IterRow>,
    pub status: RunStatus,
    pub x_best: Vec<f64>,
    pub x_final: Vec<f64>,
}

impl RunRecord {
    pub fn final_f_best(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.f_best)
    }

    /// `(h_k, ‖g_k‖)` for every iterate a step was taken from.
    pub fn schedule_trace(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.step > 0.0)
            .map(|r| (r.step, r.grad_norm))
            .collect()
    }

    /// Equality of everything except wall-clock timing.
    pub fn same_trajectory(&self, other: &RunRecord) -> bool {
        self.status == other.status
            && self.x_best == other.x_best
            && self.x_final == other.x_final
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.k == b.k
                    && a.f_current.to_bits() == b.f_current.to_bits()
                    && a.f_best.to_bits() == b.f_best.to_bits()
                    && a.grad_norm.to_bits() == b.grad_norm.to_bits()
                    && a.step.to_bits() == b.step.to_bits()
            })
    }
}

struct Recorder {
    rows: Vec<IterRow>,
    x_best: Vec<f64>,
    f_best: f64,
    start: Instant,
}

impl Recorder {
    fn new(x0: &[f64]) -> Self {
        Self {
            rows: Vec::new(),
            x_best: x0.to_vec(),
            f_best: f64::INFINITY,
            start: Instant::now(),
        }
    }

    /// Returns false when the values are not finite.
    fn push(&mut self, k: usize, x: &[f64], f: f64, grad_norm: f64, step: f64) -> bool {
        if f < self.f_best {
            self.f_best = f;
            self.x_best.copy_from_slice(x);
        }
        self.rows.push(IterRow {
            k,
            f_current: f,
            f_best: self.f_best,
            grad_norm,
            step,
            wall_time_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
        f.is_finite() && grad_norm.is_finite()
    }

    fn set_last_step(&mut self, step: f64) {
        if let Some(row) = self.rows.last_mut() {
            row.step = step;
        }
    }

    fn finish(self, status: RunStatus, x: Vec<f64>) -> RunRecord {
        RunRecord {
            rows: self.rows,
            status,
            x_best: self.x_best,
            x_final: x,
        }
    }
}

/// Closed convex sets with a closed-form Euclidean projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProjectionSet {
    EuclideanBall { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl ProjectionSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::EuclideanBall { center, radius } => {
                if !(*radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument(format!("bad ball radius {radius}")));
                }
            }
            Self::Box { lo, hi } => {
                check_dim(lo.len(), hi.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::InvalidArgument("box needs lo <= hi".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::EuclideanBall { center, .. } => center.len(),
            Self::Box { lo, .. } => lo.len(),
        }
    }

    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        check_dim(self.dim(), y.len())?;
        Ok(match self {
            Self::EuclideanBall { center, radius } => {
                let dist = distance(y, center);
                if dist <= *radius {
                    y.to_vec()
                } else {
                    let scale = radius / dist;
                    center.iter().zip(y).map(|(c, t)| c + scale * (t - c)).collect()
                }
            }
            Self::Box { lo, hi } => y
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(t, (l, h))| t.clamp(*l, *h))
                .collect(),
        })
    }
}

/// `π_E(x − h·g)`.
pub fn projected_speg_step(x: &[f64], g: &[f64], h: f64, set: &ProjectionSet) -> Result<Vec<f64>> {
    check_dim(x.len(), g.len())?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - h * b).collect();
    set.project(&y)
}

fn validate_start<O: Objective + ?Sized>(obj: &O, x0: &[f64], eta: f64) -> Result<()> {
    check_dim(obj.dim(), x0.len())?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta must be nonnegative, got {eta}")));
    }
    Ok(())
}

fn full_direction<O: Objective + ?Sized>(obj: &O, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (f, pairs) = obj.value_and_partials(x)?;
    Ok((f, specular_gradient_from_pairs(&pairs)?))
}

/// Shared loop of the specular methods. `sampled(k, x)` may return a
/// stochastic direction for iteration `k`; otherwise the full specular
/// gradient is used. The objective value is always the full one.
fn specular_loop<O, S>(
    obj: &O,
    x0: &[f64],
    sched: StepSchedule,
    max_iters: usize,
    eta: Option<f64>,
    project: Option<&ProjectionSet>,
    mut sampled: S,
) -> RunRecord
where
    O: Objective + ?Sized,
    S: FnMut(usize, &[f64]) -> Option<Result<Vec<f64>>>,
{
    let mut rec = Recorder::new(x0);
    let mut x = x0.to_vec();
    for k in 0..=max_iters {
        let eval = if k == max_iters {
            full_direction(obj, &x)
        } else {
            match sampled(k, &x) {
                None => full_direction(obj, &x),
                Some(g) => g.and_then(|g| Ok((obj.value(&x)?, g))),
            }
        };
        let Ok((f, g)) = eval else {
            return rec.finish(RunStatus::NumericalFailure, x);
        };
        let gnorm = norm2(&g);
        if !rec.push(k, &x, f, gnorm, 0.0) {
            return rec.finish(RunStatus::NumericalFailure, x);
        }
        if k == max_iters {
            break;
        }
        if eta.is_some_and(|eta| gnorm <= eta) {
            return rec.finish(RunStatus::Stationary, x);
        }
        let h = sched.step(k, gnorm);
        if !h.is_finite() {
            return rec.finish(RunStatus::NumericalFailure, x);
        }
        rec.set_last_step(h);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= h * gi;
        }
        if let Some(set) = project {
            x = set.project(&x).expect("projection set validated before the run");
        }
    }
    rec.finish(RunStatus::MaxIters, x)
}

/// SPEG: `x_{k+1} = x_k − h_k ∇ˢf(x_k)`, stopping early once `‖∇ˢf(x_k)‖ ≤ eta`.
pub fn speg_run<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    sched: StepSchedule,
    max_iters: usize,
    eta: f64,
) -> Result<RunRecord> {
    validate_start(obj, x0, eta)?;
    sched.validate()?;
    Ok(specular_loop(obj, x0, sched, max_iters, Some(eta), None, |_, _| None))
}

/// SPEG followed by projection onto `set` after every step.
pub fn projected_speg_run<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    sched: StepSchedule,
    max_iters: usize,
    eta: f64,
    set: &ProjectionSet,
) -> Result<RunRecord> {
    validate_start(obj, x0, eta)?;
    sched.validate()?;
    set.validate()?;
    check_dim(obj.dim(), set.dim())?;
    Ok(specular_loop(obj, x0, sched, max_iters, Some(eta), Some(set), |_, _| None))
}

fn sampled_direction<R: Rng + ?Sized>(p: &ElasticNetProblem, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let j = rng.random_range(0..p.m());
    let comp = p.component(j)?;
    specular_gradient_from_pairs(&comp.partials(x)?)
}

/// S-SPEG on the finite-sum form of an Elastic Net problem: each step uses
/// the specular gradient of one component drawn uniformly with replacement.
pub fn sspeg_run<R: Rng + ?Sized>(
    p: &ElasticNetProblem,
    x0: &[f64],
    sched: StepSchedule,
    max_iters: usize,
    eta: f64,
    rng: &mut R,
) -> Result<RunRecord> {
    hspeg_run(p, x0, sched, 0, max_iters, eta, rng)
}

/// H-SPEG: full specular gradients for `k < switch_k`, sampled components after.
pub fn hspeg_run<R: Rng + ?Sized>(
    p: &ElasticNetProblem,
    x0: &[f64],
    sched: StepSchedule,
    switch_k: usize,
    max_iters: usize,
    eta: f64,
    rng: &mut R,
) -> Result<RunRecord> {
    validate_start(p, x0, eta)?;
    sched.validate()?;
    if switch_k > max_iters {
        return Err(Error::InvalidArgument(format!(
            "switch_k {switch_k} exceeds max_iters {max_iters}"
        )));
    }
    Ok(specular_loop(p, x0, sched, max_iters, Some(eta), None, |k, x| {
        (k >= switch_k).then(|| sampled_direction(p, x, rng))
    }))
}

/// Gradient descent with a constant step, using the specular gradient as the
/// direction (it is the classical gradient wherever that exists).
pub fn gd_run<O: Objective + ?Sized>(obj: &O, x0: &[f64], h: f64, max_iters: usize) -> Result<RunRecord> {
    validate_start(obj, x0, 0.0)?;
    let sched = StepSchedule::Constant { h };
    sched.validate()?;
    Ok(specular_loop(obj, x0, sched, max_iters, None, None, |_, _| None))
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Adam with bias correction, driven by the specular gradient.
pub fn adam_run<O: Objective + ?Sized>(obj: &O, x0: &[f64], lr: f64, max_iters: usize) -> Result<RunRecord> {
    validate_start(obj, x0, 0.0)?;
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidArgument(format!("learning rate must be positive, got {lr}")));
    }
    let n = x0.len();
    let mut rec = Recorder::new(x0);
    let mut x = x0.to_vec();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (mut b1t, mut b2t) = (1.0, 1.0);
    for k in 0..=max_iters {
        let Ok((f, g)) = full_direction(obj, &x) else {
            return Ok(rec.finish(RunStatus::NumericalFailure, x));
        };
        if !rec.push(k, &x, f, norm2(&g), 0.0) {
            return Ok(rec.finish(RunStatus::NumericalFailure, x));
        }
        if k == max_iters {
            break;
        }
        rec.set_last_step(lr);
        b1t *= ADAM_BETA1;
        b2t *= ADAM_BETA2;
        for i in 0..n {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            let m_hat = m[i] / (1.0 - b1t);
            let v_hat = v[i] / (1.0 - b2t);
            x[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
        }
    }
    Ok(rec.finish(RunStatus::MaxIters, x))
}

/// Per-iteration right-hand side of the basic inequality
/// `f(x_k⋄) − f(x*) ≤ (‖x₀ − x*‖² + Σ_{ℓ≤k} h_ℓ²‖g_ℓ‖²) / (2 Σ_{ℓ≤k} h_ℓ)`,
/// from a trace of `(h_ℓ, ‖g_ℓ‖)`.
pub fn basic_inequality_bound(x0: &[f64], xstar: &[f64], trace: &[(f64, f64)]) -> Result<Vec<f64>> {
    check_dim(x0.len(), xstar.len())?;
    if trace.is_empty() {
        return Err(Error::InvalidArgument("empty schedule trace".into()));
    }
    let r0 = distance(x0, xstar).powi(2);
    let mut sum_h = 0.0;
    let mut sum_sq = 0.0;
    Ok(trace
        .iter()
        .map(|&(h, g)| {
            sum_h += h;
            sum_sq += (h * g) * (h * g);
            (r0 + sum_sq) / (2.0 * sum_h)
        })
        .collect())
}
