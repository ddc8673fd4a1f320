//! Specular differentiation and specular gradient methods.
//!
//! The specular derivative of a function at a kink combines its one-sided
//! derivatives by taking the tangent of the mean of their angles. For convex
//! functions the resulting specular gradient is a subgradient, which makes it
//! a drop-in search direction for subgradient-type methods.
//!
//! - [`scalar`]: extended reals and the slope-combination kernels.
//! - [`specdiff`]: specular directional derivatives, gradients, Jacobians.
//! - [`objectives`]: convex test objectives with exact one-sided oracles.
//! - [`optimizers`]: SPEG, S-SPEG, H-SPEG, projected SPEG, GD and Adam.
//! - [`harness`]: seeded multi-trial experiments on Elastic Net instances.
//! - [`report`]: stats/trajectory/metadata output files.
//! - [`checks`]: sampled invariant suites.

pub mod checks;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod objectives;
pub mod optimizers;
pub mod report;
pub mod scalar;
pub mod specdiff;

pub use error::{Error, Result};
pub use objectives::{DiagonalLasso, ElasticNetProblem, Objective, TestFunction1d};
pub use scalar::{afun, afun_tan_form, bfun, ExtendedReal, INFINITY_THRESHOLD};
pub use specdiff::{specular_gradient, Direction, OneSidedPair};
