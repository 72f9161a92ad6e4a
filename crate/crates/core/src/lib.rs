//! Auxiliary-based independence testing of instrumental variables.
//!
//! Given observational data on a treatment `X`, an outcome `Y`, optional
//! covariates `W` and a candidate instrument `Z`, the test estimates the
//! structural effect `h(X, W)` with an IV estimator, forms the auxiliary
//! variable `A = Y - h(X, W)`, and checks whether `A` is independent of the
//! candidate (or of its residual after regressing on `W`). A valid
//! instrument always yields independence, so a rejection marks `Z` invalid.
//!
//! The crate also ships the synthetic data-generating processes used to
//! benchmark the test and a Monte Carlo harness that turns them into
//! misidentification-rate tables.

// `!(a < b)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ait;
pub mod bench;
pub mod data;
pub mod error;
pub mod hsic;
pub mod iv;
pub mod regression;
pub mod rng;
pub mod stats;
pub mod synth;

pub use ait::{ait_test, auxiliary_variable, default_alpha, AitConfig, AitResult, Alpha, Decision, EffectMode};
pub use data::{center, load_csv, ColumnRoles, Dataset};
pub use error::{Error, Result};
pub use hsic::{HsicConfig, HsicMethod, IndependenceResult};
pub use iv::{control_function_fit, predict_effect, tsls_fit, EffectMethod, EstimatorConfig, FittedEffect};
