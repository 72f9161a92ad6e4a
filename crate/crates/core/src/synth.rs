//! Synthetic data-generating processes with ground-truth instrument labels.
//!
//! Each [`ScenarioFamily`] is one structural model. Every dataset carries two
//! candidates (one valid, one invalid) except the discrete-treatment family,
//! which carries a single candidate whose validity is set by the requested [`DiscreteViolation`].
//!
//! Noise terms are drawn from the requested family and shifted by the
//! family's population mean, so every structural noise enters with mean
//! zero. Logarithms are evaluated as `ln(max(|arg|, 1e-6))` so that every
//! formula is total on the real line.

use rand::Rng as _;
use rand_distr::{Beta, Distribution, Exp, Gamma, LogNormal, Normal, StudentT, Uniform};

use crate::data::{ColumnRoles, Dataset};
use crate::error::{Error, Result};
use crate::regression::{ols_fit, poly_basis};
use crate::rng::{rng_from_seed, Rng};
use crate::stats;

/// Smallest sample size the generators accept.
pub const MIN_SAMPLES: usize = 100;

const LOG_FLOOR: f64 = 1e-6;

fn safe_ln(v: f64) -> f64 {
    v.abs().max(LOG_FLOOR).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseDistribution {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    StudentT {
        df: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Exponential {
        rate: f64,
    },
    /// One of [`NoiseDistribution::MIXED_POOL`], drawn afresh for each noise term.
    Mixed,
}

impl NoiseDistribution {
    pub const GAUSSIAN: Self = Self::Gaussian { mean: 0.0, sd: 1.0 };
    pub const UNIFORM: Self = Self::Uniform { low: -2.0, high: 2.0 };
    pub const STUDENT_T: Self = Self::StudentT { df: 5.0 };
    pub const BETA: Self = Self::Beta { alpha: 0.5, beta: 0.1 };
    pub const GAMMA: Self = Self::Gamma { shape: 2.0, scale: 1.0 };
    pub const LOG_NORMAL: Self = Self::LogNormal { mu: 0.0, sigma: 1.0 };

    pub const MIXED_POOL: [Self; 6] = [
        Self::UNIFORM,
        Self::BETA,
        Self::STUDENT_T,
        Self::GAMMA,
        Self::LOG_NORMAL,
        Self::GAUSSIAN,
    ];

    /// Canonical member of a family by name.
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Self::GAUSSIAN,
            "uniform" => Self::UNIFORM,
            "t" | "student-t" | "studentt" => Self::STUDENT_T,
            "beta" => Self::BETA,
            "gamma" => Self::GAMMA,
            "lognormal" | "log-normal" => Self::LOG_NORMAL,
            "exponential" | "exp" => Self::Exponential { rate: 0.5 },
            "mixed" => Self::Mixed,
            _ => {
                return Err(Error::UnknownVariant {
                    kind: "distribution",
                    name: name.to_string(),
                })
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Uniform { .. } => "uniform",
            Self::StudentT { .. } => "t",
            Self::Beta { .. } => "beta",
            Self::Gamma { .. } => "gamma",
            Self::LogNormal { .. } => "lognormal",
            Self::Exponential { .. } => "exponential",
            Self::Mixed => "mixed",
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::Gaussian { mean, sd } => format!("N({mean}, {sd}^2)"),
            Self::Uniform { low, high } => format!("U({low}, {high})"),
            Self::StudentT { df } => format!("T({df})"),
            Self::Beta { alpha, beta } => format!("Beta({alpha}, {beta})"),
            Self::Gamma { shape, scale } => format!("Gamma(shape={shape}, scale={scale})"),
            Self::LogNormal { mu, sigma } => format!("LogNormal({mu}, {sigma})"),
            Self::Exponential { rate } => format!("Exp(rate={rate})"),
            Self::Mixed => "mixed".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Gaussian { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            Self::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Self::StudentT { df } => df > 2.0 && df.is_finite(),
            Self::Beta { alpha, beta } => alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite(),
            Self::Gamma { shape, scale } => shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite(),
            Self::LogNormal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            Self::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Self::Mixed => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(self.describe()))
        }
    }

    /// Population mean; `None` for `Mixed`.
    pub fn mean(&self) -> Option<f64> {
        Some(match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::Uniform { low, high } => 0.5 * (low + high),
            Self::StudentT { .. } => 0.0,
            Self::Beta { alpha, beta } => alpha / (alpha + beta),
            Self::Gamma { shape, scale } => shape * scale,
            Self::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Self::Exponential { rate } => 1.0 / rate,
            Self::Mixed => return None,
        })
    }

    /// Population variance; `None` for `Mixed`.
    pub fn variance(&self) -> Option<f64> {
        Some(match *self {
            Self::Gaussian { sd, .. } => sd * sd,
            Self::Uniform { low, high } => (high - low).powi(2) / 12.0,
            Self::StudentT { df } => df / (df - 2.0),
            Self::Beta { alpha, beta } => alpha * beta / ((alpha + beta).powi(2) * (alpha + beta + 1.0)),
            Self::Gamma { shape, scale } => shape * scale * scale,
            Self::LogNormal { mu, sigma } => ((sigma * sigma).exp() - 1.0) * (2.0 * mu + sigma * sigma).exp(),
            Self::Exponential { rate } => 1.0 / (rate * rate),
            Self::Mixed => return None,
        })
    }

    /// Pick a concrete family for `Mixed`; identity otherwise.
    pub fn resolve(&self, rng: &mut Rng) -> Self {
        match self {
            Self::Mixed => Self::MIXED_POOL[rng.random_range(0..Self::MIXED_POOL.len())],
            other => *other,
        }
    }
}

fn draw<D: Distribution<f64>>(d: D, n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| d.sample(rng)).collect()
}

/// `n` i.i.d. draws. `Mixed` picks one family from the pool, then draws from it.
pub fn sample_noise(dist: &NoiseDistribution, n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    dist.validate()?;
    let bad = |e: &dyn std::fmt::Display| Error::InvalidParams(e.to_string());
    Ok(match dist.resolve(rng) {
        NoiseDistribution::Gaussian { mean, sd } => draw(Normal::new(mean, sd).map_err(|e| bad(&e))?, n, rng),
        NoiseDistribution::Uniform { low, high } => draw(Uniform::new(low, high).map_err(|e| bad(&e))?, n, rng),
        NoiseDistribution::StudentT { df } => draw(StudentT::new(df).map_err(|e| bad(&e))?, n, rng),
        NoiseDistribution::Beta { alpha, beta } => draw(Beta::new(alpha, beta).map_err(|e| bad(&e))?, n, rng),
        NoiseDistribution::Gamma { shape, scale } => draw(Gamma::new(shape, scale).map_err(|e| bad(&e))?, n, rng),
        NoiseDistribution::LogNormal { mu, sigma } => draw(LogNormal::new(mu, sigma).map_err(|e| bad(&e))?, n, rng),
        NoiseDistribution::Exponential { rate } => draw(Exp::new(rate).map_err(|e| bad(&e))?, n, rng),
        NoiseDistribution::Mixed => unreachable!("resolved above"),
    })
}

/// Draw a noise term and shift it to population mean zero. Returns the
/// concrete family used.
fn centered_noise(dist: &NoiseDistribution, n: usize, rng: &mut Rng) -> Result<(Vec<f64>, NoiseDistribution)> {
    let concrete = dist.resolve(rng);
    let mut v = sample_noise(&concrete, n, rng)?;
    let m = concrete.mean().unwrap_or(0.0);
    v.iter_mut().for_each(|x| *x -= m);
    Ok((v, concrete))
}

/// The five shapes used across the nonlinear tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowFunction {
    Log,
    Quadratic,
    Cubic,
    LogQuadratic,
    ExpQuadratic,
}

impl RowFunction {
    pub const ALL: [Self; 5] = [
        Self::Log,
        Self::Quadratic,
        Self::Cubic,
        Self::LogQuadratic,
        Self::ExpQuadratic,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "log" => Self::Log,
            "quadratic" => Self::Quadratic,
            "cubic" => Self::Cubic,
            "log-quadratic" | "logquadratic" => Self::LogQuadratic,
            "exp-quadratic" | "expquadratic" => Self::ExpQuadratic,
            _ => {
                return Err(Error::UnknownVariant {
                    kind: "function",
                    name: name.to_string(),
                })
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Log => "log",
            Self::Quadratic => "quadratic",
            Self::Cubic => "cubic",
            Self::LogQuadratic => "log-quadratic",
            Self::ExpQuadratic => "exp-quadratic",
        }
    }
}

/// Which formula set a row function is taken from; coefficients differ by table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaTable {
    /// Nonlinear confounder-to-candidate map, constant effect.
    ExogeneityConst,
    /// Nonlinear effect of the treatment, exogeneity violation.
    ExogeneityNonConst,
    /// Direct candidate-to-outcome path, constant effect.
    ExclusionConst,
    /// Direct candidate-to-outcome path, nonlinear effect.
    ExclusionNonConst,
}

impl FormulaTable {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "table3" => Self::ExogeneityConst,
            "table4" => Self::ExogeneityNonConst,
            "table5" => Self::ExclusionConst,
            "table6" => Self::ExclusionNonConst,
            _ => {
                return Err(Error::UnknownVariant {
                    kind: "formula table",
                    name: name.to_string(),
                })
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ExogeneityConst => "table3",
            Self::ExogeneityNonConst => "table4",
            Self::ExclusionConst => "table5",
            Self::ExclusionNonConst => "table6",
        }
    }
}

/// Unit-coefficient functions drawn at random by the discrete-treatment family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolFunction {
    Cos,
    Sin,
    Square,
    Cubic,
    Logarithmic,
    Exponential,
}

impl PoolFunction {
    pub const ALL: [Self; 6] = [
        Self::Cos,
        Self::Sin,
        Self::Square,
        Self::Cubic,
        Self::Logarithmic,
        Self::Exponential,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonlinearFn {
    Row {
        function: RowFunction,
        table: FormulaTable,
    },
    Pool(PoolFunction),
    /// 1 above zero, 0 at zero, -1 below.
    Sign,
    /// 1 where the argument exceeds its sample mean, else 0.
    Indicator,
    Identity,
}

impl NonlinearFn {
    /// Resolve a function by name and formula variant (`table3`..`table6`
    /// for the row shapes, `pool` for the random pool).
    pub fn parse(name: &str, variant: &str) -> Result<Self> {
        let lname = name.to_ascii_lowercase();
        match lname.as_str() {
            "sign" => return Ok(Self::Sign),
            "indicator" => return Ok(Self::Indicator),
            "identity" => return Ok(Self::Identity),
            _ => {}
        }
        if variant.eq_ignore_ascii_case("pool") {
            let f = match lname.as_str() {
                "cos" => PoolFunction::Cos,
                "sin" => PoolFunction::Sin,
                "square" => PoolFunction::Square,
                "cubic" => PoolFunction::Cubic,
                "log" | "logarithmic" => PoolFunction::Logarithmic,
                "exp" | "exponential" => PoolFunction::Exponential,
                _ => {
                    return Err(Error::UnknownVariant {
                        kind: "function",
                        name: name.to_string(),
                    })
                }
            };
            return Ok(Self::Pool(f));
        }
        Ok(Self::Row {
            function: RowFunction::parse(name)?,
            table: FormulaTable::parse(variant)?,
        })
    }

    pub fn formula(&self) -> &'static str {
        use FormulaTable::*;
        use RowFunction::*;
        match self {
            Self::Row { function, table } => match (table, function) {
                (ExogeneityConst, Log) => "ln(0.2|x| - 1)",
                (ExogeneityConst, Quadratic) => "x^2 - 2x + 1",
                (ExogeneityConst, Cubic) => "x^3 - 0.5x^2 + 0.2x",
                (ExogeneityConst, LogQuadratic) => "ln(|0.5x^2 + x|)",
                (ExogeneityConst, ExpQuadratic) => "exp(0.3x^2 + x)",
                (ExogeneityNonConst, Log) => "ln(0.5|x|)",
                (ExogeneityNonConst, Quadratic) => "x^2 - 2x + 1",
                (ExogeneityNonConst, Cubic) => "0.01x^3 - 0.5x^2 + 0.2x",
                (ExogeneityNonConst, LogQuadratic) => "0.1 ln(|0.5x^2 - 1|) - 2",
                (ExogeneityNonConst, ExpQuadratic) => "exp(0.3x^2 + x)",
                (ExclusionConst, Log) => "ln(0.2|x|) - 2",
                (ExclusionConst, Quadratic) => "0.2x^2 + 2x - 2",
                (ExclusionConst, Cubic) => "0.01x^3 - x - 6",
                (ExclusionConst, LogQuadratic) => "ln(|0.5x^2 + x - 0.1|)",
                (ExclusionConst, ExpQuadratic) => "exp(0.3x^2 + x) - 0.1",
                (ExclusionNonConst, Log) => "ln(0.2|x| - 2) - 1",
                (ExclusionNonConst, Quadratic) => "0.2x^2 + 2x - 2",
                (ExclusionNonConst, Cubic) => "0.01x^3 - x - 6",
                (ExclusionNonConst, LogQuadratic) => "ln(|0.5x^2 + x - 1|)",
                (ExclusionNonConst, ExpQuadratic) => "exp(0.2x^2) - 3",
            },
            Self::Pool(p) => match p {
                PoolFunction::Cos => "cos(x)",
                PoolFunction::Sin => "sin(x)",
                PoolFunction::Square => "x^2",
                PoolFunction::Cubic => "x^3",
                PoolFunction::Logarithmic => "ln(1 + |x|)",
                PoolFunction::Exponential => "exp(x)",
            },
            Self::Sign => "sign(x)",
            Self::Indicator => "1[x > mean(x)]",
            Self::Identity => "x",
        }
    }

    fn eval_scalar(&self, x: f64) -> f64 {
        use FormulaTable::*;
        use RowFunction::*;
        match self {
            Self::Row { function, table } => match (table, function) {
                (ExogeneityConst, Log) => safe_ln(0.2 * x.abs() - 1.0),
                (ExogeneityConst, Quadratic) | (ExogeneityNonConst, Quadratic) => x * x - 2.0 * x + 1.0,
                (ExogeneityConst, Cubic) => x.powi(3) - 0.5 * x * x + 0.2 * x,
                (ExogeneityConst, LogQuadratic) => safe_ln(0.5 * x * x + x),
                (ExogeneityConst, ExpQuadratic) | (ExogeneityNonConst, ExpQuadratic) => (0.3 * x * x + x).exp(),
                (ExogeneityNonConst, Log) => safe_ln(0.5 * x.abs()),
                (ExogeneityNonConst, Cubic) => 0.01 * x.powi(3) - 0.5 * x * x + 0.2 * x,
                (ExogeneityNonConst, LogQuadratic) => 0.1 * safe_ln(0.5 * x * x - 1.0) - 2.0,
                (ExclusionConst, Log) => safe_ln(0.2 * x.abs()) - 2.0,
                (ExclusionConst, Quadratic) | (ExclusionNonConst, Quadratic) => 0.2 * x * x + 2.0 * x - 2.0,
                (ExclusionConst, Cubic) | (ExclusionNonConst, Cubic) => 0.01 * x.powi(3) - x - 6.0,
                (ExclusionConst, LogQuadratic) => safe_ln(0.5 * x * x + x - 0.1),
                (ExclusionConst, ExpQuadratic) => (0.3 * x * x + x).exp() - 0.1,
                (ExclusionNonConst, Log) => safe_ln(0.2 * x.abs() - 2.0) - 1.0,
                (ExclusionNonConst, LogQuadratic) => safe_ln(0.5 * x * x + x - 1.0),
                (ExclusionNonConst, ExpQuadratic) => (0.2 * x * x).exp() - 3.0,
            },
            Self::Pool(p) => match p {
                PoolFunction::Cos => x.cos(),
                PoolFunction::Sin => x.sin(),
                PoolFunction::Square => x * x,
                PoolFunction::Cubic => x.powi(3),
                PoolFunction::Logarithmic => (1.0 + x.abs()).ln(),
                PoolFunction::Exponential => x.exp(),
            },
            Self::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::Identity => x,
            Self::Indicator => unreachable!("indicator depends on the whole vector"),
        }
    }
}

/// Apply `f` elementwise (the indicator thresholds at the sample mean).
pub fn eval_fn(f: &NonlinearFn, x: &[f64]) -> Vec<f64> {
    match f {
        NonlinearFn::Indicator => {
            let m = stats::mean(x);
            x.iter().map(|&v| if v > m { 1.0 } else { 0.0 }).collect()
        }
        _ => x.iter().map(|&v| f.eval_scalar(v)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioFamily {
    LinearExogeneity,
    NonlinConstExogeneity,
    NonlinNonConstExogeneity,
    NonlinConstExclusion,
    NonlinNonConstExclusion,
    CovariateLinear,
    DiscreteTreatment,
}

impl ScenarioFamily {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "table2" | "linear-exogeneity" => Self::LinearExogeneity,
            "table3" | "nonlin-const-exogeneity" => Self::NonlinConstExogeneity,
            "table4" | "nonlin-nonconst-exogeneity" => Self::NonlinNonConstExogeneity,
            "table5" | "nonlin-const-exclusion" => Self::NonlinConstExclusion,
            "table6" | "nonlin-nonconst-exclusion" => Self::NonlinNonConstExclusion,
            "table7" | "covariate-linear" => Self::CovariateLinear,
            "table8" | "discrete-treatment" => Self::DiscreteTreatment,
            _ => {
                return Err(Error::UnknownVariant {
                    kind: "scenario",
                    name: name.to_string(),
                })
            }
        })
    }

    pub fn table(self) -> &'static str {
        match self {
            Self::LinearExogeneity => "table2",
            Self::NonlinConstExogeneity => "table3",
            Self::NonlinNonConstExogeneity => "table4",
            Self::NonlinConstExclusion => "table5",
            Self::NonlinNonConstExclusion => "table6",
            Self::CovariateLinear => "table7",
            Self::DiscreteTreatment => "table8",
        }
    }

    /// Whether the family's outcome equation is linear in the treatment.
    pub fn constant_effect(self) -> bool {
        !matches!(self, Self::NonlinNonConstExogeneity | Self::NonlinNonConstExclusion)
    }

    pub fn formula_table(self) -> Option<FormulaTable> {
        match self {
            Self::NonlinConstExogeneity => Some(FormulaTable::ExogeneityConst),
            Self::NonlinNonConstExogeneity => Some(FormulaTable::ExogeneityNonConst),
            Self::NonlinConstExclusion => Some(FormulaTable::ExclusionConst),
            Self::NonlinNonConstExclusion => Some(FormulaTable::ExclusionNonConst),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientRule {
    Fixed(f64),
    /// Drawn once per dataset.
    Uniform {
        low: f64,
        high: f64,
    },
}

impl CoefficientRule {
    pub const DEFAULT_UNIFORM: Self = Self::Uniform { low: 0.5, high: 1.5 };

    fn draw(&self, rng: &mut Rng) -> f64 {
        match *self {
            Self::Fixed(v) => v,
            Self::Uniform { low, high } => rng.random_range(low..high),
        }
    }
}

/// Which instrument condition the discrete-treatment candidate breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscreteViolation {
    None,
    Exogeneity,
    Exclusion,
}

impl DiscreteViolation {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "none" | "valid" => Self::None,
            "exogeneity" => Self::Exogeneity,
            "exclusion" => Self::Exclusion,
            _ => {
                return Err(Error::UnknownVariant {
                    kind: "violation",
                    name: name.to_string(),
                })
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Exogeneity => "exogeneity",
            Self::Exclusion => "exclusion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub family: ScenarioFamily,
    pub noise: NoiseDistribution,
    pub function: Option<RowFunction>,
    pub covariate_dim: usize,
    pub coefficients: CoefficientRule,
    pub true_beta: f64,
    pub violation: DiscreteViolation,
}

impl ScenarioSpec {
    /// Linear model, exogeneity violation, noise family per row.
    pub fn linear_exogeneity(noise: NoiseDistribution) -> Self {
        Self {
            family: ScenarioFamily::LinearExogeneity,
            noise,
            function: None,
            covariate_dim: 0,
            coefficients: CoefficientRule::DEFAULT_UNIFORM,
            true_beta: 1.0,
            violation: DiscreteViolation::None,
        }
    }

    /// Nonlinear confounder-to-candidate map, constant effect, Gaussian noise.
    pub fn nonlin_const_exogeneity(function: RowFunction) -> Self {
        Self {
            family: ScenarioFamily::NonlinConstExogeneity,
            noise: NoiseDistribution::GAUSSIAN,
            function: Some(function),
            covariate_dim: 0,
            coefficients: CoefficientRule::Fixed(1.0),
            true_beta: 1.0,
            violation: DiscreteViolation::None,
        }
    }

    /// Nonlinear effect, exogeneity violation, uniform noise on (-2, 2).
    pub fn nonlin_nonconst_exogeneity(function: RowFunction) -> Self {
        Self {
            family: ScenarioFamily::NonlinNonConstExogeneity,
            noise: NoiseDistribution::UNIFORM,
            function: Some(function),
            covariate_dim: 0,
            coefficients: CoefficientRule::Fixed(1.0),
            true_beta: 1.0,
            violation: DiscreteViolation::None,
        }
    }

    /// Exclusion violation, constant effect, Beta(0.5, 0.1) noise.
    pub fn nonlin_const_exclusion(function: RowFunction) -> Self {
        Self {
            family: ScenarioFamily::NonlinConstExclusion,
            noise: NoiseDistribution::BETA,
            function: Some(function),
            covariate_dim: 0,
            coefficients: CoefficientRule::DEFAULT_UNIFORM,
            true_beta: 1.0,
            violation: DiscreteViolation::None,
        }
    }

    /// Exclusion violation, nonlinear effect, Beta(0.5, 0.1) noise.
    pub fn nonlin_nonconst_exclusion(function: RowFunction) -> Self {
        Self {
            family: ScenarioFamily::NonlinNonConstExclusion,
            noise: NoiseDistribution::BETA,
            function: Some(function),
            covariate_dim: 0,
            coefficients: CoefficientRule::Fixed(1.0),
            true_beta: 1.0,
            violation: DiscreteViolation::None,
        }
    }

    /// Binary candidates with `q` Gaussian covariates.
    pub fn covariate_linear(q: usize) -> Self {
        Self {
            family: ScenarioFamily::CovariateLinear,
            noise: NoiseDistribution::STUDENT_T,
            function: None,
            covariate_dim: q,
            coefficients: CoefficientRule::Fixed(1.0),
            true_beta: 1.0,
            violation: DiscreteViolation::None,
        }
    }

    /// Binary treatment and candidate; `violation` selects validity.
    pub fn discrete_treatment(violation: DiscreteViolation) -> Self {
        Self {
            family: ScenarioFamily::DiscreteTreatment,
            noise: NoiseDistribution::GAUSSIAN,
            function: None,
            covariate_dim: 0,
            coefficients: CoefficientRule::Fixed(1.0),
            true_beta: 1.0,
            violation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if let CoefficientRule::Uniform { low, high } = self.coefficients {
            if !(low < high) {
                return Err(Error::InvalidConfig(format!("empty coefficient range [{low}, {high})")));
            }
        }
        if !self.true_beta.is_finite() {
            return Err(Error::InvalidConfig("true effect must be finite".into()));
        }
        let needs_function = self.family.formula_table().is_some();
        if needs_function != self.function.is_some() {
            return Err(Error::InvalidConfig(format!(
                "scenario {} {} a nonlinear function",
                self.family.table(),
                if needs_function { "requires" } else { "does not take" }
            )));
        }
        match self.family {
            ScenarioFamily::CovariateLinear if ![2, 3, 5].contains(&self.covariate_dim) => {
                return Err(Error::InvalidConfig(format!(
                    "covariate scenario needs 2, 3 or 5 covariates, got {}",
                    self.covariate_dim
                )))
            }
            ScenarioFamily::CovariateLinear => {}
            _ if self.covariate_dim != 0 => {
                return Err(Error::InvalidConfig(format!(
                    "scenario {} has no covariates",
                    self.family.table()
                )))
            }
            _ => {}
        }
        if self.family != ScenarioFamily::DiscreteTreatment && self.violation != DiscreteViolation::None {
            return Err(Error::InvalidConfig(
                "violation switch applies to the discrete scenario only".into(),
            ));
        }
        Ok(())
    }

    /// Short label such as `table4/quadratic` or `table2/uniform`.
    pub fn label(&self) -> String {
        let detail = match self.family {
            ScenarioFamily::LinearExogeneity => self.noise.name().to_string(),
            ScenarioFamily::CovariateLinear => format!("q={}", self.covariate_dim),
            ScenarioFamily::DiscreteTreatment => self.violation.name().to_string(),
            _ => self.function.map_or("-", RowFunction::name).to_string(),
        };
        format!("{}/{}", self.family.table(), detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Validity {
    Valid,
    InvalidExogeneity,
    InvalidExclusion,
}

impl Validity {
    pub fn is_valid(self) -> bool {
        self == Validity::Valid
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Valid => "valid",
            Self::InvalidExogeneity => "invalid-exogeneity",
            Self::InvalidExclusion => "invalid-exclusion",
        }
    }
}

/// Where a labeled dataset came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Scenario(ScenarioSpec),
    Motivating(MotivatingKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: Dataset,
    /// One label per candidate column.
    pub labels: Vec<Validity>,
    /// The unobserved confounder; for oracle checks only.
    pub latent_u: Vec<f64>,
    pub provenance: Provenance,
    pub seed: u64,
    /// Realized random choices (coefficients, function draws, noise families).
    pub realized: Vec<(String, String)>,
}

impl LabeledDataset {
    /// Plain-text `key = value` description for a sidecar file.
    pub fn metadata(&self) -> String {
        let mut out = String::new();
        match &self.provenance {
            Provenance::Scenario(spec) => {
                out.push_str(&format!("scenario = {}\n", spec.family.table()));
                out.push_str(&format!("label = {}\n", spec.label()));
                out.push_str(&format!("noise = {}\n", spec.noise.describe()));
                if let (Some(f), Some(t)) = (spec.function, spec.family.formula_table()) {
                    let nf = NonlinearFn::Row { function: f, table: t };
                    out.push_str(&format!("function = {} : {}\n", f.name(), nf.formula()));
                }
                out.push_str(&format!("covariates = {}\n", spec.covariate_dim));
                out.push_str(&format!("true_beta = {}\n", spec.true_beta));
                if spec.family == ScenarioFamily::DiscreteTreatment {
                    out.push_str(&format!("violation = {}\n", spec.violation.name()));
                }
            }
            Provenance::Motivating(kind) => {
                out.push_str(&format!("scenario = {}\n", kind.name()));
                out.push_str("true_beta = 1\n");
            }
        }
        out.push_str(&format!("n = {}\n", self.data.n()));
        out.push_str(&format!("seed = {}\n", self.seed));
        for (name, label) in self.data.roles().z_names.iter().zip(&self.labels) {
            out.push_str(&format!("label.{name} = {}\n", label.name()));
        }
        for (k, v) in &self.realized {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scale(c: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

fn sum_all(terms: &[&[f64]]) -> Vec<f64> {
    let n = terms[0].len();
    (0..n).map(|i| terms.iter().map(|t| t[i]).sum()).collect()
}

struct Draws<'a> {
    rng: Rng,
    n: usize,
    realized: &'a mut Vec<(String, String)>,
}

impl Draws<'_> {
    fn noise(&mut self, name: &str, dist: &NoiseDistribution) -> Result<Vec<f64>> {
        let (v, concrete) = centered_noise(dist, self.n, &mut self.rng)?;
        if matches!(dist, NoiseDistribution::Mixed) {
            self.realized.push((format!("noise.{name}"), concrete.describe()));
        }
        Ok(v)
    }

    fn coef(&mut self, name: &str, rule: &CoefficientRule) -> f64 {
        let c = rule.draw(&mut self.rng);
        if matches!(rule, CoefficientRule::Uniform { .. }) {
            self.realized.push((format!("coef.{name}"), format!("{c}")));
        }
        c
    }

    fn pool_fn(&mut self, name: &str) -> NonlinearFn {
        let f = NonlinearFn::Pool(PoolFunction::ALL[self.rng.random_range(0..PoolFunction::ALL.len())]);
        self.realized.push((format!("fn.{name}"), f.formula().to_string()));
        f
    }
}

fn two_candidate_roles() -> ColumnRoles {
    ColumnRoles {
        x_name: "X".into(),
        y_name: "Y".into(),
        z_names: vec!["Z1".into(), "Z2".into()],
        w_names: vec![],
    }
}

/// Sample one dataset from `spec`. Bitwise reproducible per `seed`.
pub fn generate(spec: &ScenarioSpec, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "generators need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    spec.validate()?;
    let mut realized = Vec::new();
    let mut dr = Draws {
        rng: rng_from_seed(seed),
        n,
        realized: &mut realized,
    };
    let noise = spec.noise;
    let beta = spec.true_beta;
    let rule = spec.coefficients;

    let (data, labels, latent_u) = match spec.family {
        ScenarioFamily::LinearExogeneity
        | ScenarioFamily::NonlinConstExogeneity
        | ScenarioFamily::NonlinNonConstExogeneity => {
            let u = dr.noise("U", &noise)?;
            let e_z1 = dr.noise("Z1", &noise)?;
            let e_z2 = dr.noise("Z2", &noise)?;
            let e_x = dr.noise("X", &noise)?;
            let e_y = dr.noise("Y", &noise)?;
            let gamma = dr.coef("gamma", &rule);
            let tau1 = dr.coef("tau1", &rule);
            let tau2 = dr.coef("tau2", &rule);
            let rho = dr.coef("rho", &rule);
            let kappa = dr.coef("kappa", &rule);
            let row = |f: RowFunction| NonlinearFn::Row {
                function: f,
                table: spec.family.formula_table().expect("validated"),
            };
            let z1 = match spec.family {
                ScenarioFamily::NonlinConstExogeneity => add(&eval_fn(&row(spec.function.unwrap()), &u), &e_z1),
                _ => add(&scale(gamma, &u), &e_z1),
            };
            let z2 = e_z2;
            let x = sum_all(&[&scale(tau1, &z1), &scale(tau2, &z2), &scale(rho, &u), &e_x]);
            let effect = match spec.family {
                ScenarioFamily::NonlinNonConstExogeneity => eval_fn(&row(spec.function.unwrap()), &x),
                _ => scale(beta, &x),
            };
            let y = sum_all(&[&effect, &scale(kappa, &u), &e_y]);
            let d = Dataset::with_roles(x, y, vec![z1, z2], vec![], two_candidate_roles())?;
            (d, vec![Validity::InvalidExogeneity, Validity::Valid], u)
        }
        ScenarioFamily::NonlinConstExclusion | ScenarioFamily::NonlinNonConstExclusion => {
            let f = NonlinearFn::Row {
                function: spec.function.unwrap(),
                table: spec.family.formula_table().expect("validated"),
            };
            let u = dr.noise("U", &noise)?;
            let z1 = dr.noise("Z1", &noise)?;
            let z2 = dr.noise("Z2", &noise)?;
            let e_x = dr.noise("X", &noise)?;
            let e_y = dr.noise("Y", &noise)?;
            let sign_z1 = eval_fn(&NonlinearFn::Sign, &z1);
            let g_x = eval_fn(&f, &z2);
            let g_y = eval_fn(&f, &z1);
            let (x, y) = if spec.family == ScenarioFamily::NonlinConstExclusion {
                let rho = dr.coef("rho", &rule);
                let kappa = dr.coef("kappa", &rule);
                let x = sum_all(&[&sign_z1, &g_x, &scale(rho, &u), &e_x]);
                let y = sum_all(&[&scale(beta, &x), &g_y, &scale(kappa, &u), &e_y]);
                (x, y)
            } else {
                let phi = eval_fn(&f, &u);
                let x = sum_all(&[&sign_z1, &g_x, &phi, &e_x]);
                let y = sum_all(&[&eval_fn(&f, &x), &g_y, &phi, &e_y]);
                (x, y)
            };
            let d = Dataset::with_roles(x, y, vec![z1, z2], vec![], two_candidate_roles())?;
            (d, vec![Validity::InvalidExclusion, Validity::Valid], u)
        }
        ScenarioFamily::CovariateLinear => {
            let q = spec.covariate_dim;
            let w: Vec<Vec<f64>> = (0..q)
                .map(|j| dr.noise(&format!("W{}", j + 1), &NoiseDistribution::GAUSSIAN))
                .collect::<Result<_>>()?;
            let w_sum: Vec<f64> = (0..n).map(|i| w.iter().map(|c| c[i]).sum()).collect();
            let u = dr.noise("U", &NoiseDistribution::STUDENT_T)?;
            let e_z1 = dr.noise("Z1", &NoiseDistribution::BETA)?;
            let e_z2 = dr.noise("Z2", &NoiseDistribution::GAUSSIAN)?;
            let delta = dr.noise("X", &NoiseDistribution::STUDENT_T)?;
            let eps = dr.noise("Y", &NoiseDistribution::STUDENT_T)?;
            let raw: Vec<f64> = (0..q).map(|_| StandardNormalDraw.sample(&mut dr.rng)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let lambda: Vec<f64> = raw.iter().map(|v| v / norm).collect();
            dr.realized.push(("coef.lambda".into(), format!("{lambda:?}")));

            let z1 = eval_fn(&NonlinearFn::Indicator, &sum_all(&[&u, &w_sum, &e_z1]));
            let z2 = eval_fn(&NonlinearFn::Indicator, &add(&w_sum, &e_z2));
            let lw: Vec<f64> = (0..n)
                .map(|i| lambda.iter().zip(&w).map(|(l, c)| l * c[i]).sum())
                .collect();
            let x = sum_all(&[&scale(0.5, &z1), &scale(0.5, &z2), &lw, &u, &delta]);
            let y = sum_all(&[&scale(beta, &x), &w_sum, &u, &eps]);
            let roles = ColumnRoles {
                w_names: (1..=q).map(|j| format!("W{j}")).collect(),
                ..two_candidate_roles()
            };
            let d = Dataset::with_roles(x, y, vec![z1, z2], w, roles)?;
            (d, vec![Validity::InvalidExogeneity, Validity::Valid], u)
        }
        ScenarioFamily::DiscreteTreatment => {
            let u = dr.noise("U", &noise)?;
            let e_z = dr.noise("Z", &noise)?;
            let e_x = dr.noise("X", &noise)?;
            let e_y = dr.noise("Y", &noise)?;
            let phi_z = dr.pool_fn("phi_Z");
            let g_x = dr.pool_fn("g_X");
            let phi_x = dr.pool_fn("phi_X");
            let g_y = dr.pool_fn("g_Y");
            let phi_y = dr.pool_fn("phi_Y");
            let z_arg = if spec.violation == DiscreteViolation::Exogeneity {
                add(&eval_fn(&phi_z, &u), &e_z)
            } else {
                e_z
            };
            let z = eval_fn(&NonlinearFn::Indicator, &z_arg);
            let x = eval_fn(
                &NonlinearFn::Indicator,
                &sum_all(&[&eval_fn(&g_x, &z), &eval_fn(&phi_x, &u), &e_x]),
            );
            let mut terms = vec![scale(beta, &x), eval_fn(&phi_y, &u), e_y];
            if spec.violation == DiscreteViolation::Exclusion {
                terms.push(eval_fn(&g_y, &z));
            }
            let refs: Vec<&[f64]> = terms.iter().map(Vec::as_slice).collect();
            let y = sum_all(&refs);
            let label = match spec.violation {
                DiscreteViolation::None => Validity::Valid,
                DiscreteViolation::Exogeneity => Validity::InvalidExogeneity,
                DiscreteViolation::Exclusion => Validity::InvalidExclusion,
            };
            let roles = ColumnRoles {
                x_name: "X".into(),
                y_name: "Y".into(),
                z_names: vec!["Z".into()],
                w_names: vec![],
            };
            let d = Dataset::with_roles(x, y, vec![z], vec![], roles)?;
            (d, vec![label], u)
        }
    };

    Ok(LabeledDataset {
        data,
        labels,
        latent_u,
        provenance: Provenance::Scenario(*spec),
        seed,
        realized,
    })
}

struct StandardNormalDraw;

impl Distribution<f64> for StandardNormalDraw {
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::StandardNormal.sample(rng)
    }
}

/// The three small single-candidate examples contrasting Gaussian, partially
/// non-Gaussian, and partially nonlinear confounding of the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotivatingKind {
    /// All noise Gaussian, `Z = 2U + e`: the violation is undetectable.
    LinearGaussian,
    /// Confounder noise `Exp(0.5)`, rest Gaussian: detectable.
    LinearPartialNonGaussian,
    /// All noise Gaussian but `Z = exp(U) + e`: detectable.
    PartialNonlinearGaussian,
}

impl MotivatingKind {
    pub const ALL: [Self; 3] = [
        Self::LinearGaussian,
        Self::LinearPartialNonGaussian,
        Self::PartialNonlinearGaussian,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "linear-gaussian" => Self::LinearGaussian,
            "linear-partial-nongaussian" => Self::LinearPartialNonGaussian,
            "partial-nonlinear-gaussian" => Self::PartialNonlinearGaussian,
            _ => {
                return Err(Error::UnknownVariant {
                    kind: "example",
                    name: name.to_string(),
                })
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::LinearGaussian => "linear-gaussian",
            Self::LinearPartialNonGaussian => "linear-partial-nongaussian",
            Self::PartialNonlinearGaussian => "partial-nonlinear-gaussian",
        }
    }
}

/// `U = e_U`, `Z = 2U + e_Z` (or `exp(U) + e_Z`), `X = 1.5Z + 0.8U + e_X`,
/// `Y = X + 3.5U + e_Y`. The single candidate is invalid.
pub fn motivating_example(kind: MotivatingKind, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "generators need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let gauss = NoiseDistribution::GAUSSIAN;
    let u_dist = match kind {
        MotivatingKind::LinearPartialNonGaussian => NoiseDistribution::Exponential { rate: 0.5 },
        _ => gauss,
    };
    let u = sample_noise(&u_dist, n, &mut rng)?;
    let e_z = sample_noise(&gauss, n, &mut rng)?;
    let e_x = sample_noise(&gauss, n, &mut rng)?;
    let e_y = sample_noise(&gauss, n, &mut rng)?;
    let z = match kind {
        MotivatingKind::PartialNonlinearGaussian => u.iter().zip(&e_z).map(|(u, e)| u.exp() + e).collect(),
        _ => add(&scale(2.0, &u), &e_z),
    };
    let x = sum_all(&[&scale(1.5, &z), &scale(0.8, &u), &e_x]);
    let y = sum_all(&[&x, &scale(3.5, &u), &e_y]);
    let roles = ColumnRoles {
        x_name: "X".into(),
        y_name: "Y".into(),
        z_names: vec!["Z".into()],
        w_names: vec![],
    };
    Ok(LabeledDataset {
        data: Dataset::with_roles(x, y, vec![z], vec![], roles)?,
        labels: vec![Validity::InvalidExogeneity],
        latent_u: u,
        provenance: Provenance::Motivating(kind),
        seed,
        realized: vec![],
    })
}

/// Multiple correlation of a candidate with a cubic polynomial in the latent
/// confounder. Near zero exactly when the candidate does not depend on it.
pub fn confounder_dependence(candidate: &[f64], latent_u: &[f64]) -> Result<f64> {
    let basis = poly_basis(latent_u, 3)?;
    let fit = ols_fit(&basis, candidate)?;
    let fitted = fit.predict(&basis)?;
    let total = stats::variance(candidate);
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok((stats::variance(&fitted) / total).clamp(0.0, 1.0).sqrt())
}
