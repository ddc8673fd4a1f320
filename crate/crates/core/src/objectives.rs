//! Convex objectives with exact one-sided directional-derivative oracles.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{basis, dot, norm1, norm2};
use crate::specdiff::OneSidedPair;

/// A convex function on ℝⁿ that can report its one-sided directional
/// derivatives exactly.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// `(∂⁺_v f(x), ∂⁻_v f(x))`.
    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair>;

    /// One-sided partial derivatives along the standard basis.
    fn partials(&self, x: &[f64]) -> Result<Vec<OneSidedPair>> {
        check_dim(self.dim(), x.len())?;
        (0..self.dim())
            .map(|i| self.one_sided(x, &basis(self.dim(), i)))
            .collect()
    }

    fn value_and_partials(&self, x: &[f64]) -> Result<(f64, Vec<OneSidedPair>)> {
        Ok((self.value(x)?, self.partials(x)?))
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        (**self).one_sided(x, v)
    }
    fn partials(&self, x: &[f64]) -> Result<Vec<OneSidedPair>> {
        (**self).partials(x)
    }
    fn value_and_partials(&self, x: &[f64]) -> Result<(f64, Vec<OneSidedPair>)> {
        (**self).value_and_partials(x)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        (**self).one_sided(x, v)
    }
    fn partials(&self, x: &[f64]) -> Result<Vec<OneSidedPair>> {
        (**self).partials(x)
    }
    fn value_and_partials(&self, x: &[f64]) -> Result<(f64, Vec<OneSidedPair>)> {
        (**self).value_and_partials(x)
    }
}

/// One-sided derivatives of `|t|` at `t` along `s`: `sign(t)·s` twice away from
/// zero, `(|s|, −|s|)` at zero.
#[inline]
fn abs_one_sided(t: f64, s: f64) -> (f64, f64) {
    if t > 0.0 {
        (s, s)
    } else if t < 0.0 {
        (-s, -s)
    } else {
        (s.abs(), -s.abs())
    }
}

/// Sum over coordinates of the one-sided derivatives of `‖x‖₁` along `v`.
fn l1_one_sided(x: &[f64], v: &[f64]) -> (f64, f64) {
    x.iter().zip(v).fold((0.0, 0.0), |(p, m), (&t, &s)| {
        let (dp, dm) = abs_one_sided(t, s);
        (p + dp, m + dm)
    })
}

/// Partials of `smooth + λ₁‖x‖₁` given the smooth gradient.
fn l1_partials(grad: &[f64], x: &[f64], lambda1: f64) -> Result<Vec<OneSidedPair>> {
    grad.iter()
        .zip(x)
        .map(|(&g, &t)| {
            let (p, m) = abs_one_sided(t, 1.0);
            OneSidedPair::new(g + lambda1 * p, g + lambda1 * m)
        })
        .collect()
}

/// `f(x) = (1/2m)‖Ax − b‖² + (λ₂/2)‖x‖² + λ₁‖x‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetProblem {
    a: Array2<f64>,
    b: Array1<f64>,
    lambda1: f64,
    lambda2: f64,
}

impl ElasticNetProblem {
    pub fn new(a: Array2<f64>, b: Array1<f64>, lambda1: f64, lambda2: f64) -> Result<Self> {
        let (m, n) = a.dim();
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!("A must be nonempty, got {m}x{n}")));
        }
        check_dim(m, b.len())?;
        if !(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "regularization must be finite and nonnegative, got ({lambda1}, {lambda2})"
            )));
        }
        // Row-major so each sample row is a contiguous slice.
        let a = if a.is_standard_layout() { a } else { a.as_standard_layout().into_owned() };
        Ok(Self { a, b, lambda1, lambda2 })
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn b(&self) -> &Array1<f64> {
        &self.b
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    fn residual(&self, x: &[f64]) -> Array1<f64> {
        self.a.dot(&ArrayView1::from(x)) - &self.b
    }

    fn value_from_residual(&self, r: &Array1<f64>, x: &[f64]) -> f64 {
        r.dot(r) / (2.0 * self.m() as f64)
            + 0.5 * self.lambda2 * dot(x, x)
            + self.lambda1 * norm1(x)
    }

    fn gradient_from_residual(&self, r: &Array1<f64>, x: &[f64]) -> Vec<f64> {
        let inv_m = 1.0 / self.m() as f64;
        let atr = self.a.t().dot(r);
        atr.iter()
            .zip(x)
            .map(|(g, t)| g * inv_m + self.lambda2 * t)
            .collect()
    }

    /// Gradient of the smooth part, `(1/m)Aᵀ(Ax − b) + λ₂x`.
    pub fn smooth_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n(), x.len())?;
        Ok(self.gradient_from_residual(&self.residual(x), x))
    }

    /// Component `j` (zero-based) of the finite-sum form `f = (1/m) Σ f_j`.
    pub fn component(&self, j: usize) -> Result<ElasticNetComponent<'_>> {
        if j >= self.m() {
            return Err(Error::IndexOutOfRange { index: j, len: self.m() });
        }
        Ok(ElasticNetComponent { problem: self, j })
    }
}

impl Objective for ElasticNetProblem {
    fn dim(&self) -> usize {
        self.n()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        Ok(self.value_from_residual(&self.residual(x), x))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.n(), x.len())?;
        check_dim(self.n(), v.len())?;
        let gv = dot(&self.smooth_gradient(x)?, v);
        let (p, m) = l1_one_sided(x, v);
        OneSidedPair::new(gv + self.lambda1 * p, gv + self.lambda1 * m)
    }

    fn partials(&self, x: &[f64]) -> Result<Vec<OneSidedPair>> {
        l1_partials(&self.smooth_gradient(x)?, x, self.lambda1)
    }

    fn value_and_partials(&self, x: &[f64]) -> Result<(f64, Vec<OneSidedPair>)> {
        check_dim(self.n(), x.len())?;
        let r = self.residual(x);
        let grad = self.gradient_from_residual(&r, x);
        Ok((self.value_from_residual(&r, x), l1_partials(&grad, x, self.lambda1)?))
    }
}

/// `f_j(x) = ½(a_j·x − b_j)² + (λ₂/2)‖x‖² + λ₁‖x‖₁`.
#[derive(Debug, Clone, Copy)]
pub struct ElasticNetComponent<'a> {
    problem: &'a ElasticNetProblem,
    j: usize,
}

impl ElasticNetComponent<'_> {
    pub fn index(&self) -> usize {
        self.j
    }

    fn row(&self) -> &[f64] {
        self.problem
            .a
            .row(self.j)
            .to_slice()
            .expect("rows are contiguous")
    }

    fn row_residual(&self, x: &[f64]) -> f64 {
        dot(self.row(), x) - self.problem.b[self.j]
    }

    pub fn smooth_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.problem.n(), x.len())?;
        let r = self.row_residual(x);
        let l2 = self.problem.lambda2;
        Ok(self.row().iter().zip(x).map(|(a, t)| a * r + l2 * t).collect())
    }
}

impl Objective for ElasticNetComponent<'_> {
    fn dim(&self) -> usize {
        self.problem.n()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.problem.n(), x.len())?;
        let r = self.row_residual(x);
        Ok(0.5 * r * r + 0.5 * self.problem.lambda2 * dot(x, x) + self.problem.lambda1 * norm1(x))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.problem.n(), v.len())?;
        let gv = dot(&self.smooth_gradient(x)?, v);
        let (p, m) = l1_one_sided(x, v);
        let l1 = self.problem.lambda1;
        OneSidedPair::new(gv + l1 * p, gv + l1 * m)
    }

    fn partials(&self, x: &[f64]) -> Result<Vec<OneSidedPair>> {
        l1_partials(&self.smooth_gradient(x)?, x, self.problem.lambda1)
    }
}

/// `f(x) = Σᵢ ½dᵢ(xᵢ − bᵢ)² + λ₁|xᵢ|` with `dᵢ > 0`; minimizer in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalLasso {
    d: Vec<f64>,
    b: Vec<f64>,
    lambda1: f64,
}

impl DiagonalLasso {
    pub fn new(d: Vec<f64>, b: Vec<f64>, lambda1: f64) -> Result<Self> {
        check_dim(d.len(), b.len())?;
        if d.is_empty() {
            return Err(Error::InvalidArgument("empty problem".into()));
        }
        if let Some(bad) = d.iter().find(|&&di| !(di > 0.0 && di.is_finite())) {
            return Err(Error::InvalidArgument(format!("diagonal entries must be positive, got {bad}")));
        }
        if !(lambda1 >= 0.0 && lambda1.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda1 must be nonnegative, got {lambda1}")));
        }
        Ok(Self { d, b, lambda1 })
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn minimizer(&self) -> Vec<f64> {
        soft_threshold(&self.d, &self.b, self.lambda1)
    }
}

fn soft_threshold(d: &[f64], b: &[f64], lambda1: f64) -> Vec<f64> {
    d.iter()
        .zip(b)
        .map(|(&di, &bi)| bi.signum() * (bi.abs() - lambda1 / di).max(0.0))
        .collect()
}

/// Closed-form minimizer of `Σᵢ ½dᵢ(xᵢ − bᵢ)² + λ₁|xᵢ|`:
/// `xᵢ = sign(bᵢ)·max(|bᵢ| − λ₁/dᵢ, 0)`.
pub fn diagonal_lasso_minimizer(d: &[f64], b: &[f64], lambda1: f64) -> Result<Vec<f64>> {
    Ok(DiagonalLasso::new(d.to_vec(), b.to_vec(), lambda1)?.minimizer())
}

impl Objective for DiagonalLasso {
    fn dim(&self) -> usize {
        self.d.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(x.iter()
            .zip(&self.d)
            .zip(&self.b)
            .map(|((&t, &d), &b)| 0.5 * d * (t - b) * (t - b) + self.lambda1 * t.abs())
            .sum())
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), v.len())?;
        let gv: f64 = x
            .iter()
            .zip(&self.d)
            .zip(&self.b)
            .zip(v)
            .map(|(((&t, &d), &b), &s)| d * (t - b) * s)
            .sum();
        let (p, m) = l1_one_sided(x, v);
        OneSidedPair::new(gv + self.lambda1 * p, gv + self.lambda1 * m)
    }

    fn partials(&self, x: &[f64]) -> Result<Vec<OneSidedPair>> {
        check_dim(self.dim(), x.len())?;
        let grad: Vec<f64> = x
            .iter()
            .zip(&self.d)
            .zip(&self.b)
            .map(|((&t, &d), &b)| d * (t - b))
            .collect();
        l1_partials(&grad, x, self.lambda1)
    }
}

/// `‖x‖₁`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct L1Norm {
    dim: usize,
}

impl L1Norm {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Objective for L1Norm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(norm1(x))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())?;
        let (p, m) = l1_one_sided(x, v);
        OneSidedPair::new(p, m)
    }
}

/// `‖x‖₂`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EuclideanNorm {
    dim: usize,
}

impl EuclideanNorm {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Objective for EuclideanNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(norm2(x))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())?;
        let nx = norm2(x);
        if nx == 0.0 {
            let nv = norm2(v);
            OneSidedPair::new(nv, -nv)
        } else {
            let d = dot(x, v) / nx;
            OneSidedPair::new(d, d)
        }
    }
}

/// `½‖x‖²`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfSquaredNorm {
    dim: usize,
}

impl HalfSquaredNorm {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Objective for HalfSquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(0.5 * dot(x, x))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())?;
        let d = dot(x, v);
        OneSidedPair::new(d, d)
    }
}

/// `w·x`
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    weights: Vec<f64>,
}

impl Linear {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }
}

impl Objective for Linear {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(dot(&self.weights, x))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), v.len())?;
        let d = dot(&self.weights, v);
        OneSidedPair::new(d, d)
    }
}

/// Piecewise-smooth convex functions of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction1d {
    /// `|x|`
    Abs,
    /// `max(x, 2x)`
    MaxAffine,
    /// `x² + 3·max(x, 0)`
    KinkQuad,
    /// `x²`
    Quad,
}

impl TestFunction1d {
    pub const ALL: [TestFunction1d; 4] = [Self::Abs, Self::MaxAffine, Self::KinkQuad, Self::Quad];

    pub fn name(self) -> &'static str {
        match self {
            Self::Abs => "abs",
            Self::MaxAffine => "maxaffine",
            Self::KinkQuad => "kinkquad",
            Self::Quad => "quad",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownFunction(name.to_string()))
    }

    /// Points where the function is not differentiable.
    pub fn kinks(self) -> &'static [f64] {
        match self {
            Self::Abs | Self::MaxAffine | Self::KinkQuad => &[0.0],
            Self::Quad => &[],
        }
    }

    pub fn eval(self, t: f64) -> f64 {
        match self {
            Self::Abs => t.abs(),
            Self::MaxAffine => t.max(2.0 * t),
            Self::KinkQuad => t * t + 3.0 * t.max(0.0),
            Self::Quad => t * t,
        }
    }

    /// Left and right derivatives at `t`.
    pub fn slopes(self, t: f64) -> (f64, f64) {
        let kink = |left: f64, right: f64| {
            if t < 0.0 {
                (left, left)
            } else if t > 0.0 {
                (right, right)
            } else {
                (left, right)
            }
        };
        match self {
            Self::Abs => kink(-1.0, 1.0),
            Self::MaxAffine => kink(1.0, 2.0),
            Self::KinkQuad => {
                let (l, r) = kink(0.0, 3.0);
                (2.0 * t + l, 2.0 * t + r)
            }
            Self::Quad => (2.0 * t, 2.0 * t),
        }
    }

    /// One-sided derivatives at `t` along `s`.
    pub fn one_sided_scalar(self, t: f64, s: f64) -> (f64, f64) {
        let (left, right) = self.slopes(t);
        if s >= 0.0 {
            (right * s, left * s)
        } else {
            (left * s, right * s)
        }
    }
}

impl Objective for TestFunction1d {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(1, x.len())?;
        Ok(self.eval(x[0]))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(1, x.len())?;
        check_dim(1, v.len())?;
        let (p, m) = self.one_sided_scalar(x[0], v[0]);
        OneSidedPair::new(p, m)
    }
}

pub fn test_function_1d(name: &str) -> Result<TestFunction1d> {
    TestFunction1d::from_name(name)
}

/// A one-variable function applied to coordinate `index` of ℝⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Embedded1d {
    inner: TestFunction1d,
    dim: usize,
    index: usize,
}

impl Embedded1d {
    pub fn new(inner: TestFunction1d, dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        Ok(Self { inner, dim, index })
    }
}

impl Objective for Embedded1d {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.inner.eval(x[self.index]))
    }

    fn one_sided(&self, x: &[f64], v: &[f64]) -> Result<OneSidedPair> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())?;
        let (p, m) = self.inner.one_sided_scalar(x[self.index], v[self.index]);
        OneSidedPair::new(p, m)
    }
}

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: [&str; 6] = ["abs", "maxaffine", "kinkquad", "quad", "abs2d", "norm2d"];

/// Look up a named objective: the 1-D test functions plus `abs2d` (`|x₁|+|x₂|`)
/// and `norm2d` (`‖x‖₂` on ℝ²).
pub fn catalog(name: &str) -> Result<Box<dyn Objective>> {
    match name {
        "abs2d" => Ok(Box::new(L1Norm::new(2))),
        "norm2d" => Ok(Box::new(EuclideanNorm::new(2))),
        _ => Ok(Box::new(TestFunction1d::from_name(name)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2, Array2};

    fn pair(p: f64, m: f64) -> OneSidedPair {
        OneSidedPair::new(p, m).unwrap()
    }

    fn identity(n: usize) -> Array2<f64> {
        Array2::eye(n)
    }

    #[test]
    fn elastic_net_value_examples() {
        let p = ElasticNetProblem::new(identity(2), arr1(&[0.0, 0.0]), 0.0, 0.0).unwrap();
        assert_eq!(p.value(&[3.0, 4.0]).unwrap(), 6.25);
        let p = ElasticNetProblem::new(identity(1), arr1(&[1.0]), 1.0, 0.0).unwrap();
        assert_eq!(p.value(&[0.0]).unwrap(), 0.5);
        let p = ElasticNetProblem::new(identity(1), arr1(&[1.0]), 1.0, 2.0).unwrap();
        assert_eq!(p.value(&[1.0]).unwrap(), 2.0);
        assert!(matches!(
            p.value(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn elastic_net_rejects_bad_construction() {
        assert!(ElasticNetProblem::new(identity(2), arr1(&[0.0]), 0.0, 0.0).is_err());
        assert!(ElasticNetProblem::new(identity(2), arr1(&[0.0, 0.0]), -1.0, 0.0).is_err());
        assert!(ElasticNetProblem::new(Array2::zeros((0, 2)), arr1(&[]), 0.0, 0.0).is_err());
    }

    #[test]
    fn elastic_net_one_sided_examples() {
        let a = arr2(&[[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]]);
        let p = ElasticNetProblem::new(a, arr1(&[1.0, 0.0, 2.0]), 0.0, 0.7).unwrap();
        let x = [0.0, 0.3];
        let v = [1.0, -2.0];
        let g = p.smooth_gradient(&x).unwrap();
        let pr = p.one_sided(&x, &v).unwrap();
        assert_eq!(pr.plus, pr.minus);
        assert!((pr.plus.value() - dot(&g, &v)).abs() < 1e-15);

        let p = ElasticNetProblem::new(identity(1), arr1(&[0.0]), 1.0, 0.0).unwrap();
        assert_eq!(p.one_sided(&[0.0], &[1.0]).unwrap(), pair(1.0, -1.0));
        let p = ElasticNetProblem::new(identity(1), arr1(&[2.0]), 1.0, 0.0).unwrap();
        assert_eq!(p.one_sided(&[0.0], &[1.0]).unwrap(), pair(-1.0, -3.0));
        assert!(p.one_sided(&[0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn partials_match_basis_one_sided() {
        let a = arr2(&[[1.0, 2.0, 0.0], [0.5, -1.0, 4.0]]);
        let p = ElasticNetProblem::new(a, arr1(&[1.0, -1.0]), 0.3, 0.2).unwrap();
        let x = [0.0, -0.4, 1.5];
        let fast = p.partials(&x).unwrap();
        for (i, pr) in fast.iter().enumerate() {
            let slow = p.one_sided(&x, &basis(3, i)).unwrap();
            assert!((pr.plus.value() - slow.plus.value()).abs() < 1e-14);
            assert!((pr.minus.value() - slow.minus.value()).abs() < 1e-14);
        }
        let (f, pairs) = p.value_and_partials(&x).unwrap();
        assert_eq!(f, p.value(&x).unwrap());
        assert_eq!(pairs, fast);
    }

    #[test]
    fn component_examples() {
        let p = ElasticNetProblem::new(identity(2), arr1(&[1.0, 2.0]), 0.0, 0.0).unwrap();
        let f1 = p.component(0).unwrap().value(&[0.0, 0.0]).unwrap();
        let f2 = p.component(1).unwrap().value(&[0.0, 0.0]).unwrap();
        assert_eq!((f1, f2), (0.5, 2.0));
        assert_eq!((f1 + f2) / 2.0, p.value(&[0.0, 0.0]).unwrap());
        assert!(matches!(p.component(2), Err(Error::IndexOutOfRange { index: 2, len: 2 })));

        let single = ElasticNetProblem::new(arr2(&[[2.0, -1.0]]), arr1(&[0.5]), 0.1, 0.4).unwrap();
        let c = single.component(0).unwrap();
        let x = [0.7, -0.2];
        assert_eq!(c.value(&x).unwrap(), single.value(&x).unwrap());

        let c = p.component(1).unwrap();
        let x = [0.3, 0.9];
        let g = c.smooth_gradient(&x).unwrap();
        let v = [0.5, -1.5];
        assert_eq!(c.one_sided(&x, &v).unwrap(), pair(dot(&g, &v), dot(&g, &v)));
    }

    #[test]
    fn diagonal_lasso_examples() {
        assert_eq!(diagonal_lasso_minimizer(&[1.0], &[3.0], 1.0).unwrap(), vec![2.0]);
        assert_eq!(
            diagonal_lasso_minimizer(&[2.0, 0.5], &[-1.0, 4.0], 0.0).unwrap(),
            vec![-1.0, 4.0]
        );
        assert_eq!(diagonal_lasso_minimizer(&[1.0], &[0.5], 1.0).unwrap(), vec![0.0]);
        assert!(diagonal_lasso_minimizer(&[0.0], &[0.5], 1.0).is_err());
        assert!(diagonal_lasso_minimizer(&[1.0, -2.0], &[0.5, 1.0], 1.0).is_err());
    }

    #[test]
    fn soft_threshold_matches_grid_search() {
        // independent check: brute force over [-5, 5] at 1e-4 resolution
        let f = |t: f64| 0.5 * (t - 3.0) * (t - 3.0) + t.abs();
        let best = (0..=100_000)
            .map(|i| -5.0 + i as f64 * 1e-4)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        let x = diagonal_lasso_minimizer(&[1.0], &[3.0], 1.0).unwrap()[0];
        assert!((x - best).abs() <= 1e-4);
    }

    #[test]
    fn test_function_examples() {
        assert_eq!(test_function_1d("abs").unwrap().one_sided(&[0.0], &[1.0]).unwrap(), pair(1.0, -1.0));
        assert_eq!(
            test_function_1d("maxaffine").unwrap().one_sided(&[0.0], &[1.0]).unwrap(),
            pair(2.0, 1.0)
        );
        assert_eq!(test_function_1d("quad").unwrap().one_sided(&[3.0], &[1.0]).unwrap(), pair(6.0, 6.0));
        assert_eq!(
            test_function_1d("kinkquad").unwrap().one_sided(&[0.0], &[-2.0]).unwrap(),
            pair(0.0, -6.0)
        );
        assert!(matches!(test_function_1d("cosh"), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn catalog_lookup() {
        for name in CATALOG_NAMES {
            assert!(catalog(name).is_ok(), "{name}");
        }
        assert_eq!(catalog("abs2d").unwrap().dim(), 2);
        assert!(catalog("nope").is_err());
    }

    #[test]
    fn euclidean_norm_at_origin() {
        let n = EuclideanNorm::new(2);
        assert_eq!(n.one_sided(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), pair(5.0, -5.0));
        assert_eq!(n.one_sided(&[3.0, 4.0], &[1.0, 0.0]).unwrap(), pair(0.6, 0.6));
    }

    #[test]
    fn embedded_index_checked() {
        assert!(Embedded1d::new(TestFunction1d::Abs, 2, 2).is_err());
    }
}
