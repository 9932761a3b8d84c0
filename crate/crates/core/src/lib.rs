//! Randomized smoothing of non-smooth objectives.
//!
//! Replaces a rough function `g` by its smoothed counterpart
//! `g_eps(x) = E[g(x + eps Z)]`, `Z ~ mu`, and estimates its value and
//! gradient by Monte Carlo:
//!
//! * [`estimators::smoothed_value`] — sample average of `g(x + eps z)`.
//! * [`estimators::grad_zeroth`] — score-function (value-only) gradient
//!   estimator, usable even when `g` is non-differentiable.
//! * [`estimators::grad_first`] — average of raw gradients at perturbed
//!   points, for objectives with an a.e. gradient oracle.
//!
//! The [`oracle`] module provides closed forms and 1D quadrature as
//! independent ground truth, [`problems`] supplies objectives exhibiting
//! null/undefined-gradient pathologies (hard rasterization, sticking
//! contact), and [`optimize`] runs plain gradient descent on any of the
//! estimators.

pub mod error;
pub mod estimators;
pub mod noise;
pub mod optimize;
pub mod oracle;
pub mod problems;

pub use error::Error;
pub use estimators::{GradientEstimate, SmoothingConfig, ValueEstimate};
pub use noise::{NoiseDistribution, NoiseKind, RngStream};
pub use optimize::{DescentConfig, GradSource, StopReason, Trajectory};
pub use oracle::QuadratureRule;
pub use problems::Objective;
