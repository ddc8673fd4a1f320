//! Sampled invariant suites.
//!
//! Each suite draws its own deterministic random cases and reports how many
//! violated the property. `Level::Fast` uses 10² cases per suite and
//! `Level::Full` 10⁴.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, offset};
use crate::objectives::{DiagonalLasso, ElasticNetProblem, EuclideanNorm, Objective, TestFunction1d};
use crate::optimizers::{basic_inequality_bound, speg_run, StepSchedule, DEFAULT_ETA};
use crate::scalar::{afun_f64, afun_tan_form, bfun};
use crate::specdiff::{
    default_fd_schedule, fd_specular_directional, specular_directional, specular_from_one_sided,
    specular_gradient, Direction, OneSidedPair,
};

const SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    pub fn samples(self) -> usize {
        match self {
            Level::Fast => 100,
            Level::Full => 10_000,
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(Error::InvalidArgument(format!("unknown level {s:?}, expected fast or full"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub elapsed_ms: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {:<22} {:>6} samples, {} failures ({:.0} ms)",
            self.name, self.samples, self.failures, self.elapsed_ms
        )?;
        if let Some(msg) = &self.first_failure {
            write!(f, "; first: {msg}")?;
        }
        Ok(())
    }
}

/// Failure tally shared by the suites.
struct Tally {
    samples: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self { samples: 0, failures: 0, first: None }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.samples += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(msg());
            }
        }
    }

    fn error(&mut self, e: Error) {
        self.check(false, || format!("error: {e}"));
    }
}

pub const SUITE_NAMES: [&str; 7] = [
    "scalar-identities",
    "ordering-lemma",
    "subgradient-inequality",
    "quasi-fermat",
    "quasi-mvt",
    "estimator-consistency",
    "basic-inequality",
];

fn suite_fn(name: &str) -> Option<fn(usize, &mut ChaCha20Rng) -> Tally> {
    Some(match name {
        "scalar-identities" => scalar_identities,
        "ordering-lemma" => ordering_lemma,
        "subgradient-inequality" => subgradient_inequality,
        "quasi-fermat" => quasi_fermat,
        "quasi-mvt" => quasi_mvt,
        "estimator-consistency" => estimator_consistency,
        "basic-inequality" => basic_inequality,
        _ => return None,
    })
}

pub fn run_suite(name: &str, samples: usize) -> Result<SuiteReport> {
    let index = SUITE_NAMES
        .iter()
        .position(|&n| n == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {name:?}")))?;
    let suite = suite_fn(name).expect("every listed suite has a body");
    let mut rng = ChaCha20Rng::seed_from_u64(SEED);
    rng.set_stream(index as u64);
    let start = Instant::now();
    let tally = suite(samples, &mut rng);
    Ok(SuiteReport {
        name: SUITE_NAMES[index],
        samples: tally.samples,
        failures: tally.failures,
        first_failure: tally.first,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn run_all(level: Level) -> Vec<SuiteReport> {
    SUITE_NAMES
        .iter()
        .map(|name| run_suite(name, level.samples()).expect("known suite"))
        .collect()
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Random sign times a magnitude log-uniform in `[1e-6, 1e6]`, with a few
/// exact zeros.
pub fn log_uniform_signed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random_bool(0.02) {
        return 0.0;
    }
    let mag = 10f64.powf(rng.random_range(-6.0..=6.0));
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Standard normal vector with each coordinate set to exactly zero with
/// probability `p_zero`, so samples land on the ℓ₁ kinks.
pub fn sparse_normal<R: Rng + ?Sized>(n: usize, p_zero: f64, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random_bool(p_zero) { 0.0 } else { normal(rng) })
        .collect()
}

/// Random Elastic Net instance with `m, n ≤ 20` and `λ₁, λ₂ ∈ [0, 2]`
/// (each zero with probability 0.1).
pub fn random_elastic_net<R: Rng + ?Sized>(rng: &mut R) -> ElasticNetProblem {
    let m = rng.random_range(1..=20);
    let n = rng.random_range(1..=20);
    let a = Array2::from_shape_simple_fn((m, n), || normal(rng));
    let b = Array1::from_shape_simple_fn(m, || normal(rng));
    let mut lambda = || if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..2.0) };
    let (l1, l2) = (lambda(), lambda());
    ElasticNetProblem::new(a, b, l1, l2).expect("valid random instance")
}

/// Diagonal lasso with `d ∈ [0.5, 2]`, `b ∈ [−3, 3]`.
pub fn random_diagonal_lasso<R: Rng + ?Sized>(n: usize, lambda1: f64, rng: &mut R) -> DiagonalLasso {
    let d = (0..n).map(|_| rng.random_range(0.5..=2.0)).collect();
    let b = (0..n).map(|_| rng.random_range(-3.0..=3.0)).collect();
    DiagonalLasso::new(d, b, lambda1).expect("valid random instance")
}

const SCALAR_EXAMPLES: [(f64, f64, f64); 5] = [
    (3.0, 3.0, 3.0),
    (1.0, -1.0, 0.0),
    (2.0, 1.0, 1.387_425_886_722_793_1),
    (0.0, f64::INFINITY, 1.0),
    (f64::INFINITY, f64::NEG_INFINITY, 0.0),
];

fn scalar_identities(samples: usize, rng: &mut ChaCha20Rng) -> Tally {
    let mut t = Tally::new();
    for &(a, b, want) in &SCALAR_EXAMPLES {
        let got = afun_f64(a, b).unwrap_or(f64::NAN);
        t.check((got - want).abs() <= 1e-12, || format!("afun({a}, {b}) = {got}, want {want}"));
    }
    for &(a, b, c, want) in &[(1.0, 1.0, 2.0, 0.5), (1.0, -1.0, 5.0, 0.0), (2.0, 1.0, 1.0, SCALAR_EXAMPLES[2].2)] {
        let got = bfun(a, b, c).unwrap_or(f64::NAN);
        t.check((got - want).abs() <= 1e-12, || format!("bfun({a}, {b}, {c}) = {got}, want {want}"));
    }
    for _ in 0..samples {
        let a = log_uniform_signed(rng);
        let b = if rng.random_bool(0.05) { -a } else { log_uniform_signed(rng) };
        let (Ok(ab), Ok(ba)) = (afun_f64(a, b), afun_f64(b, a)) else {
            t.check(false, || format!("afun({a}, {b}) errored"));
            continue;
        };
        t.check(ab.to_bits() == ba.to_bits(), || format!("afun not symmetric at ({a}, {b})"));
        t.check(a.min(b) <= ab && ab <= a.max(b), || format!("afun({a}, {b}) = {ab} not between"));
        let half = (a + b).abs() / 2.0;
        t.check(ab.abs() <= half + 1e-12 * half.max(1.0), || {
            format!("|afun({a}, {b})| = {} exceeds |a+b|/2 = {half}", ab.abs())
        });
        let tan = afun_tan_form(a, b).unwrap_or(f64::NAN);
        t.check((ab - tan).abs() <= 1e-9 * (1.0 + ab.abs()), || {
            format!("afun({a}, {b}) = {ab}, tan form {tan}")
        });

        let c = 10f64.powf(rng.random_range(-6.0..6.0));
        let (x, y) = (normal(rng) * c * 10f64.powf(rng.random_range(-3.0..3.0)), normal(rng) * c);
        let bf = bfun(x, y, c).unwrap_or(f64::NAN);
        let af = afun_f64(x / c, y / c).unwrap_or(f64::NAN);
        t.check((bf - af).abs() <= 1e-9 * (1.0 + bf.abs()), || {
            format!("bfun({x}, {y}, {c}) = {bf}, afun(a/c, b/c) = {af}")
        });
    }
    t
}

fn ordering_lemma(samples: usize, rng: &mut ChaCha20Rng) -> Tally {
    let mut t = Tally::new();
    for _ in 0..samples {
        let p = random_elastic_net(rng);
        let x = sparse_normal(p.n(), 0.3, rng);
        let v = sparse_normal(p.n(), 0.2, rng);
        match ordering_chain(&p, &x, &v) {
            Ok(chain) => t.check(chain.windows(2).all(|w| w[0] <= w[1] + 1e-9), || {
                format!("chain {chain:?} out of order")
            }),
            Err(e) => t.error(e),
        }
    }
    t
}

/// `[f(x)−f(x−v), ∂⁻_v f(x), ∂ˢ_v f(x), ∂⁺_v f(x), f(x+v)−f(x)]`, which is
/// nondecreasing for convex `f`.
pub fn ordering_chain<O: Objective + ?Sized>(obj: &O, x: &[f64], v: &[f64]) -> Result<[f64; 5]> {
    let fx = obj.value(x)?;
    let back = fx - obj.value(&offset(x, v, -1.0))?;
    let fwd = obj.value(&offset(x, v, 1.0))? - fx;
    let pair = obj.one_sided(x, v)?;
    let spec = specular_directional(obj, x, &Direction::new(v.to_vec())?)?;
    Ok([back, pair.minus.value(), spec, pair.plus.value(), fwd])
}

fn subgradient_inequality(samples: usize, rng: &mut ChaCha20Rng) -> Tally {
    let mut t = Tally::new();
    for _ in 0..samples {
        let p = random_elastic_net(rng);
        let x = sparse_normal(p.n(), 0.3, rng);
        let w = sparse_normal(p.n(), 0.3, rng);
        match subgradient_gap(&p, &x, &w) {
            Ok((gap, fw)) => t.check(gap >= -1e-8 * (1.0 + fw.abs()), || {
                format!("f(w) − f(x) − g·(w−x) = {gap}")
            }),
            Err(e) => t.error(e),
        }
    }
    t
}

/// `(f(w) − f(x) − ∇ˢf(x)·(w−x), f(w))`.
pub fn subgradient_gap<O: Objective + ?Sized>(obj: &O, x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let g = specular_gradient(obj, x)?;
    let fx = obj.value(x)?;
    let fw = obj.value(w)?;
    let step: Vec<f64> = w.iter().zip(x).map(|(a, b)| a - b).collect();
    Ok((fw - fx - dot(&g, &step), fw))
}

/// Directional form at a minimizer: `|∂ˢ_v f(x*)| ≤ ‖v‖` for each `v`.
pub fn quasi_fermat_directional<O: Objective + ?Sized>(
    obj: &O,
    xstar: &[f64],
    dirs: &[Vec<f64>],
    slack: f64,
) -> Result<Option<String>> {
    for v in dirs {
        let d = Direction::new(v.clone())?;
        let s = specular_directional(obj, xstar, &d)?;
        if s.abs() > d.norm() + slack {
            return Ok(Some(format!("|∂ˢ_v f| = {} > ‖v‖ = {}", s.abs(), d.norm())));
        }
    }
    Ok(None)
}

/// Gradient form: `|∇ˢf(x*)·v| ≤ ‖v‖` for each `v` and `|Σᵢ ∂ˢᵢ f(x*)| ≤ √n`.
pub fn quasi_fermat_gradient<O: Objective + ?Sized>(
    obj: &O,
    xstar: &[f64],
    dirs: &[Vec<f64>],
    slack: f64,
) -> Result<Option<String>> {
    let g = specular_gradient(obj, xstar)?;
    let sum: f64 = g.iter().sum();
    let root_n = (g.len() as f64).sqrt();
    if sum.abs() > root_n + slack {
        return Ok(Some(format!("|Σ ∂ˢᵢ f| = {} > √n = {root_n}", sum.abs())));
    }
    for v in dirs {
        let ip = dot(&g, v).abs();
        if ip > norm2(v) + slack {
            return Ok(Some(format!("|∇ˢf·v| = {ip} > ‖v‖ = {}", norm2(v))));
        }
    }
    Ok(None)
}

pub fn random_unit_directions<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
            let nv = norm2(&v);
            if nv > 0.0 {
                break v.into_iter().map(|c| c / nv).collect();
            }
        })
        .collect()
}

/// The directional form is checked at exact minimizers of random diagonal
/// lasso problems, kinks included. The gradient form additionally needs the
/// specular gradient to represent every directional derivative, so it is
/// checked where that holds: 1-D minimizers, the origin of `‖x‖₂`, and
/// diagonal lasso minimizers with no zero coordinate.
fn quasi_fermat(samples: usize, rng: &mut ChaCha20Rng) -> Tally {
    const SLACK: f64 = 1e-6;
    let mut t = Tally::new();
    let record = |t: &mut Tally, what: &str, r: Result<Option<String>>| match r {
        Ok(None) => t.check(true, String::new),
        Ok(Some(msg)) => t.check(false, || format!("{what}: {msg}")),
        Err(e) => t.error(e),
    };
    for f in [TestFunction1d::Abs, TestFunction1d::KinkQuad, TestFunction1d::Quad] {
        let dirs = vec![vec![1.0], vec![-1.0], vec![normal(rng)]];
        record(&mut t, f.name(), quasi_fermat_gradient(&f, &[0.0], &dirs, SLACK));
    }
    let norm = EuclideanNorm::new(3);
    let dirs = random_unit_directions(3, 10, rng);
    record(&mut t, "norm", quasi_fermat_gradient(&norm, &[0.0; 3], &dirs, SLACK));

    for _ in 0..samples {
        let n = rng.random_range(1..=10);
        let lambda1 = rng.random_range(0.0..=2.0);
        let p = random_diagonal_lasso(n, lambda1, rng);
        let xstar = p.minimizer();
        let dirs = random_unit_directions(n, 100, rng);
        record(&mut t, "lasso directional", quasi_fermat_directional(&p, &xstar, &dirs, SLACK));
        if xstar.iter().all(|&c| c != 0.0) {
            record(&mut t, "lasso gradient", quasi_fermat_gradient(&p, &xstar, &dirs, SLACK));
        }
    }
    t
}

/// Extremes of the specular derivative of `f` over `grid` points in `[a, b]`.
pub fn specular_derivative_range(f: TestFunction1d, a: f64, b: f64, grid: usize) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid {
        let s = a + (b - a) * i as f64 / (grid - 1) as f64;
        let (left, right) = f.slopes(s);
        let d = specular_from_one_sided(OneSidedPair::new(right, left)?, 1.0)?;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}

/// Sampled Quasi-MVT on `[a, b]`:
/// `min fˢ·(b−a) − slack ≤ f(b) − f(a) ≤ max fˢ·(b−a) + slack`, with
/// `slack = 1e−3·(b−a)` over a 10⁴-point grid.
pub fn quasi_mvt_holds(f: TestFunction1d, a: f64, b: f64) -> Result<bool> {
    let (lo, hi) = specular_derivative_range(f, a, b, 10_000)?;
    let width = b - a;
    let secant = f.eval(b) - f.eval(a);
    let slack = 1e-3 * width;
    Ok(lo * width - slack <= secant && secant <= hi * width + slack)
}

/// Random interval inside `[−5, 5]`; a third of them have a kink as an endpoint.
pub fn random_interval<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let mut a: f64 = rng.random_range(-5.0..5.0);
        let mut b: f64 = rng.random_range(-5.0..5.0);
        if rng.random_bool(1.0 / 3.0) {
            if rng.random_bool(0.5) {
                a = 0.0;
            } else {
                b = 0.0;
            }
        }
        if a != b {
            return (a.min(b), a.max(b));
        }
    }
}

fn quasi_mvt(samples: usize, rng: &mut ChaCha20Rng) -> Tally {
    let mut t = Tally::new();
    let per_function = (samples / 20).max(20);
    for f in TestFunction1d::ALL {
        for _ in 0..per_function {
            let (a, b) = random_interval(rng);
            match quasi_mvt_holds(f, a, b) {
                Ok(ok) => t.check(ok, || format!("{} on [{a}, {b}]", f.name())),
                Err(e) => t.error(e),
            }
        }
    }
    t
}

/// Test points for `f`: every kink, then points at least `1e−3` from any kink.
pub fn estimator_points<R: Rng + ?Sized>(f: TestFunction1d, count: usize, rng: &mut R) -> Vec<f64> {
    let mut pts: Vec<f64> = f.kinks().to_vec();
    while pts.len() < count {
        let t = rng.random_range(-5.0..5.0);
        if f.kinks().iter().all(|k| (t - k).abs() >= 1e-3) {
            pts.push(t);
        }
    }
    pts
}

/// `|fd estimate − oracle|` for the specular derivative of `f` at `t` along `s`.
pub fn estimator_error(f: TestFunction1d, t: f64, s: f64) -> Result<f64> {
    let fd = fd_specular_directional(|x: &[f64]| f.eval(x[0]), &[t], &[s], &default_fd_schedule())?;
    let oracle = specular_directional(&f, &[t], &Direction::new(vec![s])?)?;
    Ok((fd.value - oracle).abs())
}

fn estimator_consistency(samples: usize, rng: &mut ChaCha20Rng) -> Tally {
    let mut t = Tally::new();
    let per_function = (samples / 4).max(10);
    for f in TestFunction1d::ALL {
        for x in estimator_points(f, per_function, rng) {
            let s = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(-3.0..3.0) };
            if s == 0.0 {
                continue;
            }
            match estimator_error(f, x, s) {
                Ok(err) => t.check(err <= 1e-5, || format!("{} at {x} along {s}: error {err}", f.name())),
                Err(e) => t.error(e),
            }
        }
    }
    t
}

/// Largest `f(x_k⋄) − f(x*) − bound_k` over a SPEG run on a diagonal lasso
/// problem; nonpositive when the basic inequality holds at every iterate.
pub fn basic_inequality_excess(p: &DiagonalLasso, x0: &[f64], iters: usize) -> Result<f64> {
    let xstar = p.minimizer();
    let fstar = p.value(&xstar)?;
    let rec = speg_run(p, x0, StepSchedule::NormalizedDiminishing { c: 4.0 }, iters, DEFAULT_ETA)?;
    let trace = rec.schedule_trace();
    if trace.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let bound = basic_inequality_bound(x0, &xstar, &trace)?;
    Ok(rec
        .rows
        .iter()
        .zip(&bound)
        .map(|(row, b)| row.f_best - fstar - b - 1e-9 * (1.0 + fstar.abs()))
        .fold(f64::NEG_INFINITY, f64::max))
}

fn basic_inequality(samples: usize, rng: &mut ChaCha20Rng) -> Tally {
    let mut t = Tally::new();
    for _ in 0..samples {
        let n = rng.random_range(1..=10);
        let lambda1 = rng.random_range(0.0..=2.0);
        let p = random_diagonal_lasso(n, lambda1, rng);
        let x0: Vec<f64> = (0..n).map(|_| 3.0 * normal(rng)).collect();
        match basic_inequality_excess(&p, &x0, 200) {
            Ok(excess) => t.check(excess <= 0.0, || format!("bound exceeded by {excess}")),
            Err(e) => t.error(e),
        }
    }
    t
}
