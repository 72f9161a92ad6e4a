//! Estimators of the structural effect `h(X, W)` from a single candidate
//! instrument: two-stage least squares for constant effects and a
//! polynomial control-function estimator for nonlinear effects.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regression::{linear_residualize, ols_fit, ols_fit_labeled, poly_basis};
use crate::stats;

/// Minimum |corr(Z, X)| (both residualized on W) for a usable instrument.
pub const WEAK_INSTRUMENT_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectMethod {
    Tsls,
    ControlFunction,
}

impl EffectMethod {
    pub fn name(self) -> &'static str {
        match self {
            EffectMethod::Tsls => "2sls",
            EffectMethod::ControlFunction => "control-function",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    /// Powers of Z in the first stage (k).
    pub instrument_degree: usize,
    /// Powers of X in the outcome equation (d).
    pub treatment_degree: usize,
    pub include_covariates: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            instrument_degree: 3,
            treatment_degree: 2,
            include_covariates: true,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.treatment_degree == 0 {
            return Err(Error::InvalidConfig("treatment basis degree must be at least 1".into()));
        }
        if self.instrument_degree < self.treatment_degree {
            return Err(Error::InvalidConfig(format!(
                "order condition violated: instrument degree {} < treatment degree {}",
                self.instrument_degree, self.treatment_degree
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// First-stage F statistic for the excluded instrument terms.
    pub first_stage_f: f64,
    /// |corr(Z, X)| after linear residualization on the covariates.
    pub relevance: f64,
    /// Variance of the outcome-equation residual.
    pub residual_variance: f64,
    /// Coefficient on the first-stage residual (control function only).
    pub control_coefficient: Option<f64>,
    /// Instrument basis degree actually used.
    pub instrument_degree: usize,
}

/// The estimated structural function
/// `h(x, w) = intercept + sum_j x_coefficients[j] * x^(j+1) + w . w_coefficients`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedEffect {
    pub method: EffectMethod,
    pub x_basis_degree: usize,
    pub x_coefficients: Vec<f64>,
    pub w_coefficients: Vec<f64>,
    pub intercept: f64,
    pub diagnostics: Diagnostics,
}

fn covariates_for(d: &Dataset, include: bool) -> &[Vec<f64>] {
    if include {
        d.w()
    } else {
        &[]
    }
}

fn count_distinct(v: &[f64], cap: usize) -> usize {
    let mut seen: Vec<f64> = Vec::new();
    for &x in v {
        if !seen.contains(&x) {
            seen.push(x);
            if seen.len() >= cap {
                break;
            }
        }
    }
    seen.len()
}

fn check_relevance(x: &[f64], z: &[f64], w: &[Vec<f64>]) -> Result<f64> {
    let xr = linear_residualize(x, w)?;
    let zr = linear_residualize(z, w)?;
    let corr = stats::correlation(&zr, &xr).abs();
    if !(corr >= WEAK_INSTRUMENT_THRESHOLD) {
        return Err(Error::WeakInstrument {
            correlation: corr,
            threshold: WEAK_INSTRUMENT_THRESHOLD,
        });
    }
    Ok(corr)
}

/// F statistic comparing `target ~ base` with `target ~ base + extra`.
fn partial_f(base: &[Vec<f64>], full: &[Vec<f64>], target: &[f64], extra: usize) -> Result<f64> {
    let rss = |design: &[Vec<f64>]| -> Result<f64> {
        let fit = ols_fit(design, target)?;
        Ok(fit.residuals(design, target)?.iter().map(|r| r * r).sum())
    };
    let restricted = rss(base)?;
    let unrestricted = rss(full)?;
    let df = target.len() as f64 - full.len() as f64 - 1.0;
    if unrestricted <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((restricted - unrestricted) / extra as f64) / (unrestricted / df))
}

fn check_sample_size(d: &Dataset, needed: usize) -> Result<()> {
    if d.n() <= needed {
        return Err(Error::InvalidInput(format!(
            "need more than {needed} observations for this fit, got {}",
            d.n()
        )));
    }
    Ok(())
}

/// Two-stage least squares with a single excluded instrument.
///
/// Stage one regresses X on [Z, W]; stage two regresses Y on [X_hat, W].
pub fn tsls_fit(d: &Dataset, z_index: usize) -> Result<FittedEffect> {
    tsls_fit_with(d, z_index, true)
}

pub fn tsls_fit_with(d: &Dataset, z_index: usize, include_covariates: bool) -> Result<FittedEffect> {
    let z = d.candidate(z_index)?;
    let w = covariates_for(d, include_covariates);
    check_sample_size(d, w.len() + 3)?;
    let relevance = check_relevance(d.x(), z, w)?;

    let mut stage1_design = vec![z.to_vec()];
    stage1_design.extend(w.iter().cloned());
    let stage1 = ols_fit(&stage1_design, d.x())?;
    let x_hat = stage1.predict(&stage1_design)?;
    let first_stage_f = partial_f(w, &stage1_design, d.x(), 1)?;

    let mut stage2_design = vec![x_hat];
    stage2_design.extend(w.iter().cloned());
    let mut labels = vec!["x".to_string()];
    labels.extend(d.roles().w_names.iter().take(w.len()).cloned());
    let stage2 = ols_fit_labeled(&stage2_design, d.y(), labels)?;

    let mut fitted = FittedEffect {
        method: EffectMethod::Tsls,
        x_basis_degree: 1,
        x_coefficients: vec![stage2.coefficients[0]],
        w_coefficients: stage2.coefficients[1..].to_vec(),
        intercept: stage2.intercept,
        diagnostics: Diagnostics {
            first_stage_f,
            relevance,
            residual_variance: 0.0,
            control_coefficient: None,
            instrument_degree: 1,
        },
    };
    fitted.diagnostics.residual_variance = stats::variance(&structural_residual(d, &fitted, w)?);
    Ok(fitted)
}

fn structural_residual(d: &Dataset, h: &FittedEffect, w: &[Vec<f64>]) -> Result<Vec<f64>> {
    let pred = predict_effect(h, d.x(), w)?;
    Ok(d.y().iter().zip(pred).map(|(y, p)| y - p).collect())
}

/// Control-function estimator with polynomial bases.
///
/// Stage one regresses X on [W, Z, ..., Z^k] and keeps the residual `e1`.
/// Stage two regresses Y on [X, ..., X^d, W, e1]; the X and W coefficients
/// form `h`, the `e1` coefficient is reported in the diagnostics only.
///
/// Degrees shrink to what the data can support: a candidate with `m`
/// distinct values gets at most `m - 1` powers, and a treatment with `m`
/// distinct values at most `m - 1` (so a binary treatment gets `d = 1`).
pub fn control_function_fit(d: &Dataset, z_index: usize, cfg: &EstimatorConfig) -> Result<FittedEffect> {
    cfg.validate()?;
    let z = d.candidate(z_index)?;
    let w = covariates_for(d, cfg.include_covariates);
    let k = cfg
        .instrument_degree
        .min(count_distinct(z, cfg.instrument_degree + 1).saturating_sub(1))
        .max(1);
    let d_eff = cfg
        .treatment_degree
        .min(k)
        .min(count_distinct(d.x(), cfg.treatment_degree + 1).saturating_sub(1))
        .max(1);
    check_sample_size(d, k + d_eff + w.len() + 3)?;
    let relevance = check_relevance(d.x(), z, w)?;

    let mut stage1_design: Vec<Vec<f64>> = w.to_vec();
    stage1_design.extend(poly_basis(z, k)?);
    let stage1 = ols_fit(&stage1_design, d.x())?;
    let e1 = stage1.residuals(&stage1_design, d.x())?;
    let first_stage_f = partial_f(w, &stage1_design, d.x(), k)?;

    let mut stage2_design = poly_basis(d.x(), d_eff)?;
    stage2_design.extend(w.iter().cloned());
    stage2_design.push(e1);
    let mut labels: Vec<String> = (1..=d_eff).map(|j| format!("x^{j}")).collect();
    labels.extend(d.roles().w_names.iter().take(w.len()).cloned());
    labels.push("e1".into());
    let stage2 = ols_fit_labeled(&stage2_design, d.y(), labels)?;

    let coefs = &stage2.coefficients;
    let mut fitted = FittedEffect {
        method: EffectMethod::ControlFunction,
        x_basis_degree: d_eff,
        x_coefficients: coefs[..d_eff].to_vec(),
        w_coefficients: coefs[d_eff..d_eff + w.len()].to_vec(),
        intercept: stage2.intercept,
        diagnostics: Diagnostics {
            first_stage_f,
            relevance,
            residual_variance: 0.0,
            control_coefficient: Some(coefs[d_eff + w.len()]),
            instrument_degree: k,
        },
    };
    fitted.diagnostics.residual_variance = stats::variance(&structural_residual(d, &fitted, w)?);
    Ok(fitted)
}

/// Evaluate `h` at the given treatment values and covariate columns.
pub fn predict_effect(h: &FittedEffect, x: &[f64], w: &[Vec<f64>]) -> Result<Vec<f64>> {
    if w.len() != h.w_coefficients.len() {
        return Err(Error::DimensionMismatch {
            what: "covariate width",
            expected: h.w_coefficients.len(),
            got: w.len(),
        });
    }
    if let Some(col) = w.iter().find(|c| c.len() != x.len()) {
        return Err(Error::DimensionMismatch {
            what: "covariate length",
            expected: x.len(),
            got: col.len(),
        });
    }
    let out: Vec<f64> = (0..x.len())
        .map(|i| {
            let mut power = 1.0;
            let mut v = h.intercept;
            for c in &h.x_coefficients {
                power *= x[i];
                v += c * power;
            }
            v + w.iter().zip(&h.w_coefficients).map(|(col, c)| c * col[i]).sum::<f64>()
        })
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite effect prediction".into()));
    }
    Ok(out)
}
