//! Specular directional derivatives, gradients and Jacobians assembled from
//! one-sided derivatives, plus a finite-difference estimator.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2, offset};
use crate::objectives::Objective;
use crate::scalar::{afun, ExtendedReal};

/// Forward and backward one-sided directional derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSidedPair {
    pub plus: ExtendedReal,
    pub minus: ExtendedReal,
}

impl OneSidedPair {
    pub fn new(plus: f64, minus: f64) -> Result<Self> {
        Ok(Self {
            plus: ExtendedReal::new(plus)?,
            minus: ExtendedReal::new(minus)?,
        })
    }

    /// The pair along `-v`, given this pair along `v`.
    pub fn reversed(self) -> Self {
        Self {
            plus: -self.minus,
            minus: -self.plus,
        }
    }

    /// True when neither derivative is infinite with the same sign as the other.
    pub fn is_admissible(self) -> bool {
        !(self.plus == self.minus && !self.plus.is_finite())
    }
}

/// A direction vector with its cached Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    v: Vec<f64>,
    norm: f64,
}

impl Direction {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("direction must be finite".into()));
        }
        let norm = norm2(&v);
        Ok(Self { v, norm })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.norm == 0.0
    }
}

/// Specular derivative from a one-sided pair along a direction of norm `vnorm`:
/// `vnorm · afun(plus/vnorm, minus/vnorm)`, with derivatives beyond the
/// infinity threshold treated as infinite.
pub fn specular_from_one_sided(pair: OneSidedPair, vnorm: f64) -> Result<f64> {
    if !(vnorm > 0.0 && vnorm.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "direction norm must be positive, got {vnorm}"
        )));
    }
    let plus = ExtendedReal::promote(pair.plus.value())?;
    let minus = ExtendedReal::promote(pair.minus.value())?;
    if plus == minus && !plus.is_finite() {
        return Err(Error::HypothesisViolation {
            sign: if plus.is_pos_infinity() { '+' } else { '-' },
        });
    }
    if plus.is_finite() && plus == -minus {
        return Ok(0.0);
    }
    let scaled = |x: ExtendedReal| {
        if x.is_finite() {
            ExtendedReal::new(x.value() / vnorm)
        } else {
            Ok(x)
        }
    };
    let a = afun(scaled(plus)?, scaled(minus)?);
    Ok(vnorm * a.value())
}

/// Specular directional derivative of `obj` at `x` along `dir`; zero for the
/// zero direction.
pub fn specular_directional<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    dir: &Direction,
) -> Result<f64> {
    if dir.is_zero() {
        check_dim(obj.dim(), x.len())?;
        return Ok(0.0);
    }
    let pair = obj.one_sided(x, dir.as_slice())?;
    specular_from_one_sided(pair, dir.norm())
}

/// Specular gradient from the one-sided partial derivatives along `e_1..e_n`.
pub fn specular_gradient_from_pairs(pairs: &[OneSidedPair]) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|&p| specular_from_one_sided(p, 1.0))
        .collect()
}

pub fn specular_gradient<O: Objective + ?Sized>(obj: &O, x: &[f64]) -> Result<Vec<f64>> {
    specular_gradient_from_pairs(&obj.partials(x)?)
}

/// Row `j` is the specular gradient of `components[j]` at `x`.
pub fn specular_jacobian(components: &[&dyn Objective], x: &[f64]) -> Result<Array2<f64>> {
    let n = x.len();
    let mut jac = Array2::zeros((components.len(), n));
    for (j, comp) in components.iter().enumerate() {
        check_dim(comp.dim(), n)?;
        let pairs = comp.partials(x)?;
        for (i, pair) in pairs.into_iter().enumerate() {
            jac[[j, i]] = specular_from_one_sided(pair, 1.0).map_err(|e| Error::AtEntry {
                row: j,
                col: i,
                source: Box::new(e),
            })?;
        }
    }
    Ok(jac)
}

/// Result of [`fd_specular_directional`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    /// Step at which `value` was taken.
    pub step: f64,
    /// `|value - previous estimate|`.
    pub agreement: f64,
}

pub const FD_RTOL: f64 = 1e-6;

/// `h = 2^-k` for `k = 10..=24`.
pub fn default_fd_schedule() -> Vec<f64> {
    (10..=24).map(|k| 0.5f64.powi(k)).collect()
}

/// Estimate the specular directional derivative from symmetric difference
/// quotients, `‖v‖·afun(Δ⁺/(h‖v‖), Δ⁻/(h‖v‖))`, over a decreasing schedule of
/// steps. Returns the estimate at the smallest step that agrees with its
/// predecessor within [`FD_RTOL`].
pub fn fd_specular_directional<F>(f: F, x: &[f64], v: &[f64], schedule: &[f64]) -> Result<FdEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    check_dim(x.len(), v.len())?;
    let vnorm = norm2(v);
    if vnorm == 0.0 || !vnorm.is_finite() {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    if schedule.len() < 2 {
        return Err(Error::InvalidArgument("schedule needs at least two steps".into()));
    }
    if schedule[0] <= 0.0 || schedule.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::InvalidArgument(
            "schedule must be positive and strictly decreasing".into(),
        ));
    }

    let fx = f(x);
    let mut estimates = Vec::with_capacity(schedule.len());
    for &h in schedule {
        let fwd = (f(&offset(x, v, h)) - fx) / h;
        let bwd = (fx - f(&offset(x, v, -h))) / h;
        let pair = OneSidedPair::new(fwd, bwd)?;
        estimates.push(specular_from_one_sided(pair, vnorm)?);
    }

    let agree = |a: f64, b: f64| (a - b).abs() <= FD_RTOL * a.abs().max(b.abs()).max(1.0);
    (1..estimates.len())
        .rev()
        .find(|&k| agree(estimates[k], estimates[k - 1]))
        .map(|k| FdEstimate {
            value: estimates[k],
            step: schedule[k],
            agreement: (estimates[k] - estimates[k - 1]).abs(),
        })
        .ok_or_else(|| {
            let n = estimates.len();
            Error::EstimationFailure {
                previous: estimates[n - 2],
                last: estimates[n - 1],
            }
        })
}

/// `|afun(Δ⁺/‖w‖, Δ⁻/‖w‖) − ⟨ℓ, w⟩/‖w‖|` with `Δ⁺ = f(x+w) − f(x)` and
/// `Δ⁻ = f(x) − f(x−w)`. Sampled along shrinking `w`, this decays to zero
/// when `ℓ` is the specular differential of `f` at `x`.
pub fn frechet_residual<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    ell: &[f64],
    w: &[f64],
) -> Result<f64> {
    check_dim(obj.dim(), x.len())?;
    check_dim(x.len(), ell.len())?;
    check_dim(x.len(), w.len())?;
    let wnorm = norm2(w);
    if wnorm == 0.0 {
        return Err(Error::InvalidArgument("w must be nonzero".into()));
    }
    let fx = obj.value(x)?;
    let fwd = (obj.value(&offset(x, w, 1.0))? - fx) / wnorm;
    let bwd = (fx - obj.value(&offset(x, w, -1.0))?) / wnorm;
    let a = afun(ExtendedReal::promote(fwd)?, ExtendedReal::promote(bwd)?);
    Ok((a.value() - dot(ell, w) / wnorm).abs())
}
