//! Scalar kernels: extended reals and the two-slope combination functions.
//!
//! `afun(α, β)` is the tangent of the mean angle of two slopes,
//! `tan(½ arctan α + ½ arctan β)`, written in closed form
//! `(αβ − 1 + √((1+α²)(1+β²))) / (α + β)` and extended to infinite
//! slopes. `bfun(a, b, c)` is the same quantity for the slopes `a/c`, `b/c`
//! without forming the quotients.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-sided derivatives with magnitude at or above this value are treated
/// as infinite before they are combined.
pub const INFINITY_THRESHOLD: f64 = 1e12;

/// A real number or ±∞. Never NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const ZERO: Self = Self(0.0);
    pub const POS_INFINITY: Self = Self(f64::INFINITY);
    pub const NEG_INFINITY: Self = Self(f64::NEG_INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            Err(Error::InvalidArgument("NaN is not an extended real".into()))
        } else {
            Ok(Self(value))
        }
    }

    /// Like [`ExtendedReal::new`], but values with `|value| >= INFINITY_THRESHOLD`
    /// become the infinity of the same sign.
    pub fn promote(value: f64) -> Result<Self> {
        let x = Self::new(value)?;
        if x.0.abs() >= INFINITY_THRESHOLD {
            Ok(Self(f64::INFINITY.copysign(x.0)))
        } else {
            Ok(x)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_pos_infinity(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_neg_infinity(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtendedReal is never NaN")
    }
}

impl TryFrom<f64> for ExtendedReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ExtendedReal> for f64 {
    fn from(x: ExtendedReal) -> f64 {
        x.0
    }
}

impl std::ops::Neg for ExtendedReal {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pos_infinity() {
            f.write_str("+inf")
        } else if self.is_neg_infinity() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Mean-angle combination of two slopes, including the infinite extension:
/// `afun(α, ±∞) = α ± √(1+α²)`, `afun(±∞, ∓∞) = 0`, `afun(±∞, ±∞) = ±∞`.
pub fn afun(alpha: ExtendedReal, beta: ExtendedReal) -> ExtendedReal {
    match (alpha.is_finite(), beta.is_finite()) {
        (true, true) => ExtendedReal(afun_finite(alpha.0, beta.0)),
        (false, false) => {
            if alpha == beta {
                alpha
            } else {
                ExtendedReal::ZERO
            }
        }
        (true, false) => ExtendedReal(with_infinite(alpha.0, beta.0 > 0.0)),
        (false, true) => ExtendedReal(with_infinite(beta.0, alpha.0 > 0.0)),
    }
}

/// `a ± √(1+a²)` without cancellation.
fn with_infinite(a: f64, positive: bool) -> f64 {
    let h = 1f64.hypot(a);
    match (positive, a >= 0.0) {
        (true, true) => a + h,
        (true, false) => 1.0 / (h - a),
        (false, false) => a - h,
        (false, true) => -1.0 / (a + h),
    }
}

fn afun_finite(alpha: f64, beta: f64) -> f64 {
    // Adding +0 maps −0 to +0 so the result does not depend on argument order.
    let (alpha, beta) = (alpha + 0.0, beta + 0.0);
    let (lo, hi) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
    if lo == hi {
        return lo;
    }
    let prod = lo * hi;
    let root = 1f64.hypot(lo) * 1f64.hypot(hi);
    if !prod.is_finite() || !root.is_finite() {
        return tan_mean_angle(lo, hi).clamp(lo, hi);
    }
    // For prod <= 1 multiply through by the conjugate: the numerator
    // prod - 1 + root equals (lo + hi)^2 / (root + 1 - prod).
    let value = if prod > 1.0 {
        (prod - 1.0 + root) / (lo + hi)
    } else {
        (lo + hi) / (root + 1.0 - prod)
    };
    value.clamp(lo, hi)
}

fn tan_mean_angle(alpha: f64, beta: f64) -> f64 {
    (0.5 * alpha.atan() + 0.5 * beta.atan()).tan()
}

/// Convenience wrapper over [`afun`] for plain floats (±∞ allowed, NaN rejected).
pub fn afun_f64(alpha: f64, beta: f64) -> Result<f64> {
    Ok(afun(ExtendedReal::new(alpha)?, ExtendedReal::new(beta)?).value())
}

/// Reference form `tan(½ arctan α + ½ arctan β)`, used to cross-check [`afun`].
pub fn afun_tan_form(alpha: f64, beta: f64) -> Result<f64> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tan form needs finite arguments, got ({alpha}, {beta})"
        )));
    }
    Ok(tan_mean_angle(alpha, beta))
}

/// `(a√(b²+c²) + b√(a²+c²)) / (c√(a²+c²) + c√(b²+c²))` for `c > 0`.
pub fn bfun(a: f64, b: f64, c: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bfun needs finite arguments, got ({a}, {b}, {c})"
        )));
    }
    if c <= 0.0 {
        return Err(Error::InvalidArgument(format!("bfun needs c > 0, got {c}")));
    }
    let ra = a.hypot(c);
    let rb = b.hypot(c);
    let num = if a * b >= 0.0 {
        a * rb + b * ra
    } else {
        // a*rb and -b*ra share a sign here, so the conjugate has no cancellation.
        c * (c * (a - b) * (a + b) / (a * rb - b * ra))
    };
    Ok(num / (c * (ra + rb)))
}
