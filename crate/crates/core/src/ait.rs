//! The auxiliary-based independence test for a single candidate instrument.
//!
//! H0: the candidate is a valid instrument. The procedure
//!
//! 1. estimates `h(X, W)` with 2SLS (constant effect) or the control-function
//!    estimator (non-constant effect),
//! 2. forms the auxiliary variable `A = Y - h(X, W)`,
//! 3. residualizes the candidate on the covariates with a random forest
//!    (the candidate itself when there are none),
//! 4. tests `A` against the residual with HSIC after standardizing both,
//! 5. rejects H0 when the p-value is below alpha.
//!
//! A valid instrument always satisfies the independence, so a rejection is
//! evidence of invalidity. Failing to reject does not establish validity.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hsic::{hsic_test, HsicConfig, IndependenceResult};
use crate::iv::{control_function_fit, predict_effect, tsls_fit_with, EstimatorConfig, FittedEffect};
use crate::regression::{forest_seed, residualize, ForestParams};
use crate::rng::derive_seed;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EffectMode {
    /// Prior knowledge of a constant effect: two-stage least squares.
    Constant,
    /// General nonlinear effect: control-function estimator.
    NonConstant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// `10 / n`, clamped to `[1e-4, 0.1]`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AitConfig {
    pub effect_mode: EffectMode,
    pub estimator: EstimatorConfig,
    pub hsic: HsicConfig,
    pub forest: ForestParams,
    pub alpha: Alpha,
    pub seed: u64,
}

impl Default for AitConfig {
    fn default() -> Self {
        Self {
            effect_mode: EffectMode::NonConstant,
            estimator: EstimatorConfig::default(),
            hsic: HsicConfig::default(),
            forest: ForestParams::default(),
            alpha: Alpha::Auto,
            seed: 0,
        }
    }
}

impl AitConfig {
    pub fn validate(&self) -> Result<()> {
        if let Alpha::Fixed(a) = self.alpha {
            if !(a > 0.0 && a <= 0.5) {
                return Err(Error::InvalidConfig(format!("alpha must lie in (0, 0.5], got {a}")));
            }
        }
        self.estimator.validate()?;
        self.hsic.validate()
    }

    pub fn alpha_for(&self, n: usize) -> Result<f64> {
        match self.alpha {
            Alpha::Auto => default_alpha(n),
            Alpha::Fixed(a) => Ok(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// The candidate is shown to be an invalid instrument.
    RejectH0,
    /// No evidence against validity.
    FailToReject,
}

impl Decision {
    pub fn rejected(self) -> bool {
        self == Decision::RejectH0
    }

    pub fn describe(self) -> &'static str {
        match self {
            Decision::RejectH0 => "reject H0: invalid IV",
            Decision::FailToReject => "fail to reject H0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AitResult {
    pub decision: Decision,
    pub p_value: f64,
    pub alpha_used: f64,
    /// `A = Y - h(X, W)`, before standardization.
    pub auxiliary: Vec<f64>,
    /// Candidate residual on the covariates, before standardization.
    pub residual_z: Vec<f64>,
    pub fitted: FittedEffect,
    pub independence: IndependenceResult,
}

/// `10 / n` clamped to `[1e-4, 0.1]`.
pub fn default_alpha(n: usize) -> Result<f64> {
    if n < 25 {
        return Err(Error::InvalidInput(format!("automatic alpha needs n >= 25, got {n}")));
    }
    Ok((10.0 / n as f64).clamp(1e-4, 0.1))
}

/// `A = Y - h(X, W)`. Uses the covariates only if `h` was fitted with them.
pub fn auxiliary_variable(d: &Dataset, h: &FittedEffect) -> Result<Vec<f64>> {
    let w: &[Vec<f64>] = if h.w_coefficients.is_empty() { &[] } else { d.w() };
    let pred = predict_effect(h, d.x(), w)?;
    Ok(d.y().iter().zip(pred).map(|(y, p)| y - p).collect())
}

pub fn fit_effect(d: &Dataset, z_index: usize, cfg: &AitConfig) -> Result<FittedEffect> {
    match cfg.effect_mode {
        EffectMode::Constant => tsls_fit_with(d, z_index, cfg.estimator.include_covariates),
        EffectMode::NonConstant => control_function_fit(d, z_index, &cfg.estimator),
    }
}

/// Run the test for candidate `z_index`. Deterministic given `cfg.seed`.
pub fn ait_test(d: &Dataset, z_index: usize, cfg: &AitConfig) -> Result<AitResult> {
    cfg.validate()?;
    let alpha_used = cfg.alpha_for(d.n())?;
    let fitted = fit_effect(d, z_index, cfg)?;
    let auxiliary = auxiliary_variable(d, &fitted)?;

    let z = d.candidate(z_index)?;
    let forest = ForestParams {
        seed: forest_seed(cfg.seed),
        ..cfg.forest
    };
    let residual_z = residualize(z, d.w(), forest)?;

    let a_std = stats::standardize(&auxiliary)
        .ok_or_else(|| Error::CannotTest("auxiliary variable is numerically constant".into()))?;
    let z_std = stats::standardize(&residual_z)
        .ok_or_else(|| Error::CannotTest("candidate residual is numerically constant".into()))?;

    let hsic_cfg = HsicConfig {
        seed: derive_seed(cfg.seed, 0x6873_6963),
        ..cfg.hsic
    };
    let independence = hsic_test(&a_std, &z_std, &hsic_cfg)?;
    let p_value = independence.p_value;
    let decision = if p_value < alpha_used {
        Decision::RejectH0
    } else {
        Decision::FailToReject
    };
    Ok(AitResult {
        decision,
        p_value,
        alpha_used,
        auxiliary,
        residual_z,
        fitted,
        independence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_alpha_rule() {
        assert!((default_alpha(3000).unwrap() - 10.0 / 3000.0).abs() < 1e-15);
        assert_eq!(default_alpha(50).unwrap(), 0.1);
        assert_eq!(default_alpha(200_000).unwrap(), 1e-4);
        assert_eq!(default_alpha(100).unwrap(), 0.1);
        assert!(default_alpha(24).is_err());
    }

    #[test]
    fn alpha_bounds_are_validated() {
        for bad in [0.0, 0.6, -0.1, f64::NAN] {
            let cfg = AitConfig {
                alpha: Alpha::Fixed(bad),
                ..Default::default()
            };
            assert!(cfg.validate().is_err());
        }
        let ok = AitConfig {
            alpha: Alpha::Fixed(0.5),
            ..Default::default()
        };
        assert!(ok.validate().is_ok());
    }
}
