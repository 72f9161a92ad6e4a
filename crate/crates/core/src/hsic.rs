//! Hilbert-Schmidt independence criterion tests for two scalar samples.
//!
//! All tests use Gaussian kernels with median-heuristic bandwidths and the
//! biased statistic `HSIC_b = trace(K H L H) / n^2`. Three null
//! distributions are available:
//!
//! * [`HsicMethod::Permutation`]: shuffles `b` against `a`, exact but O(n^2) per draw.
//! * [`HsicMethod::Gamma`]: two-moment gamma fit to the null of `n * HSIC_b`.
//! * [`HsicMethod::LargeScale`]: random Fourier features for both kernels and a
//!   gamma fit to the feature-space null, O(n D^2) for `D` features.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats;

/// Largest sample used by the median heuristic.
pub const BANDWIDTH_SUBSAMPLE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HsicMethod {
    Permutation,
    Gamma,
    LargeScale,
}

impl HsicMethod {
    pub fn name(self) -> &'static str {
        match self {
            HsicMethod::Permutation => "permutation",
            HsicMethod::Gamma => "gamma",
            HsicMethod::LargeScale => "large-scale",
        }
    }
}

impl std::fmt::Display for HsicMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsicConfig {
    /// `None` picks permutation below `large_scale_threshold` and the
    /// large-scale test at or above it.
    pub method: Option<HsicMethod>,
    pub permutations: usize,
    pub num_features: usize,
    pub large_scale_threshold: usize,
    pub seed: u64,
}

impl Default for HsicConfig {
    fn default() -> Self {
        Self {
            method: None,
            permutations: 500,
            num_features: 100,
            large_scale_threshold: 2000,
            seed: 0,
        }
    }
}

impl HsicConfig {
    pub fn resolve_method(&self, n: usize) -> HsicMethod {
        self.method.unwrap_or(if n < self.large_scale_threshold {
            HsicMethod::Permutation
        } else {
            HsicMethod::LargeScale
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Some(HsicMethod::Permutation) && self.permutations < 100 {
            return Err(Error::InvalidConfig(format!(
                "permutation test needs at least 100 permutations, got {}",
                self.permutations
            )));
        }
        if self.method == Some(HsicMethod::LargeScale) && self.num_features < 10 {
            return Err(Error::InvalidConfig(format!(
                "large-scale test needs at least 10 features, got {}",
                self.num_features
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceResult {
    /// Biased HSIC estimate (exact or feature-approximated).
    pub statistic: f64,
    pub p_value: f64,
    pub method: HsicMethod,
    pub bandwidth_a: f64,
    pub bandwidth_b: f64,
    pub n: usize,
}

/// Median of pairwise absolute differences over at most
/// [`BANDWIDTH_SUBSAMPLE`] points taken at a fixed stride.
///
/// When more than half of the pairs are ties (discrete data) the median is
/// zero; the median of the non-zero differences is used instead.
pub fn median_bandwidth(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::DegenerateInput("bandwidth needs at least two points".into()));
    }
    let stride = v.len().div_ceil(BANDWIDTH_SUBSAMPLE);
    let sample: Vec<f64> = v.iter().step_by(stride).take(BANDWIDTH_SUBSAMPLE).copied().collect();
    let mut diffs = Vec::with_capacity(sample.len() * (sample.len() - 1) / 2);
    for (i, a) in sample.iter().enumerate() {
        for b in &sample[i + 1..] {
            diffs.push((a - b).abs());
        }
    }
    let med = stats::median(&mut diffs);
    if med > 0.0 {
        return Ok(med);
    }
    let mut nonzero: Vec<f64> = diffs.into_iter().filter(|d| *d > 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::DegenerateInput("all values are identical".into()));
    }
    Ok(stats::median(&mut nonzero))
}

fn check_pair(a: &[f64], b: &[f64], min_n: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "sample length",
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < min_n {
        return Err(Error::InvalidInput(format!(
            "test needs at least {min_n} observations, got {}",
            a.len()
        )));
    }
    Ok(())
}

fn check_bandwidth(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {s}")));
    }
    Ok(())
}

/// Dense Gaussian Gram matrix, row-major.
fn gram(v: &[f64], sigma: f64) -> Vec<f64> {
    let n = v.len();
    let inv = -0.5 / (sigma * sigma);
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in i + 1..n {
            let d = v[i] - v[j];
            let e = (d * d * inv).exp();
            k[i * n + j] = e;
            k[j * n + i] = e;
        }
    }
    k
}

/// `H K H` for a symmetric row-major Gram matrix.
fn double_center(k: &[f64], n: usize) -> Vec<f64> {
    let row_means: Vec<f64> = k.chunks_exact(n).map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = k[i * n + j] - row_means[i] - row_means[j] + grand;
        }
    }
    out
}

/// Biased HSIC estimate `trace(K H L H) / n^2` with Gaussian kernels.
pub fn hsic_statistic(a: &[f64], b: &[f64], sigma_a: f64, sigma_b: f64) -> Result<f64> {
    check_pair(a, b, 5)?;
    check_bandwidth(sigma_a)?;
    check_bandwidth(sigma_b)?;
    let n = a.len();
    let kc = double_center(&gram(a, sigma_a), n);
    let l = gram(b, sigma_b);
    Ok(frobenius_dot(&kc, &l) / (n * n) as f64)
}

fn frobenius_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Permutation test: `b` is shuffled with one RNG stream per permutation,
/// derived from `cfg.seed`. The p-value is `(1 + #{T_perm >= T}) / (1 + P)`.
pub fn hsic_test_permutation(a: &[f64], b: &[f64], cfg: &HsicConfig) -> Result<IndependenceResult> {
    check_pair(a, b, 5)?;
    if cfg.permutations < 100 {
        return Err(Error::InvalidConfig(format!(
            "permutation test needs at least 100 permutations, got {}",
            cfg.permutations
        )));
    }
    let n = a.len();
    let sa = median_bandwidth(a)?;
    let sb = median_bandwidth(b)?;
    let kc = double_center(&gram(a, sa), n);
    let l = gram(b, sb);
    let observed = frobenius_dot(&kc, &l);
    // Relative slack so permutations that reproduce the observed value up to
    // rounding count as ties.
    let tol = 1e-12 * observed.abs().max(1e-300);

    let exceed: usize = (0..cfg.permutations)
        .into_par_iter()
        .map(|p| {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, p as u64));
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut total = 0.0;
            for i in 0..n {
                let krow = &kc[i * n..(i + 1) * n];
                let lrow = &l[perm[i] * n..(perm[i] + 1) * n];
                let mut s = 0.0;
                for j in i + 1..n {
                    s += krow[j] * lrow[perm[j]];
                }
                total += 2.0 * s + krow[i];
            }
            usize::from(total >= observed - tol)
        })
        .sum();

    Ok(IndependenceResult {
        statistic: observed / (n * n) as f64,
        p_value: (1 + exceed) as f64 / (1 + cfg.permutations) as f64,
        method: HsicMethod::Permutation,
        bandwidth_a: sa,
        bandwidth_b: sb,
        n,
    })
}

/// Upper tail of a gamma distribution matched to `mean` and `variance`.
fn gamma_tail(x: f64, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) || !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::DegenerateNull(format!(
            "matched null has mean {mean:.3e} and variance {variance:.3e}"
        )));
    }
    let shape = mean * mean / variance;
    let rate = mean / variance;
    let dist = Gamma::new(shape, rate).map_err(|e| Error::DegenerateNull(e.to_string()))?;
    Ok(dist.sf(x).clamp(0.0, 1.0))
}

/// Gamma approximation to the null of `n * HSIC_b`, with mean and variance
/// computed in closed form from the Gram matrices.
pub fn hsic_test_gamma(a: &[f64], b: &[f64], cfg: &HsicConfig) -> Result<IndependenceResult> {
    let _ = cfg;
    check_pair(a, b, 30)?;
    let n = a.len();
    let nf = n as f64;
    let sa = median_bandwidth(a)?;
    let sb = median_bandwidth(b)?;
    let k = gram(a, sa);
    let l = gram(b, sb);
    let kc = double_center(&k, n);
    let lc = double_center(&l, n);

    let hsic_b = frobenius_dot(&kc, &lc) / (nf * nf);

    let mut off_diag_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = kc[i * n + j] * lc[i * n + j] / 6.0;
                off_diag_sq += v * v;
            }
        }
    }
    let variance =
        72.0 * (nf - 4.0) * (nf - 5.0) / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0)) * off_diag_sq / (nf * (nf - 1.0));
    let off_mean = |m: &[f64]| (m.iter().sum::<f64>() - nf) / (nf * (nf - 1.0));
    let mu_a = off_mean(&k);
    let mu_b = off_mean(&l);
    let mean = (1.0 + mu_a * mu_b - mu_a - mu_b) / nf;

    // n * HSIC_b has mean n * mean and variance n^2 * variance.
    let p_value = gamma_tail(nf * hsic_b, nf * mean, nf * nf * variance)?;
    Ok(IndependenceResult {
        statistic: hsic_b,
        p_value,
        method: HsicMethod::Gamma,
        bandwidth_a: sa,
        bandwidth_b: sb,
        n,
    })
}

/// Column-centered random Fourier features of a Gaussian kernel, `n x D`.
fn centered_features(v: &[f64], sigma: f64, num_features: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    let freqs: Vec<f64> = (0..num_features)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g / sigma
        })
        .collect();
    let phases: Vec<f64> = (0..num_features)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let scale = (2.0 / num_features as f64).sqrt();
    let n = v.len();
    let mut phi = DMatrix::<f64>::from_fn(n, num_features, |i, k| scale * (freqs[k] * v[i] + phases[k]).cos());
    for mut col in phi.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    phi
}

/// Random-feature HSIC with a gamma null fitted in feature space.
///
/// With centered feature matrices `F` (for `a`) and `G` (for `b`), the
/// statistic is `|F^T G|_F^2 / n^2`. Under independence `n * HSIC` behaves
/// like a weighted sum of chi-squares with mean `tr(Cf) tr(Cg)` and variance
/// `2 |Cf|_F^2 |Cg|_F^2`, where `Cf = F^T F / n`.
pub fn hsic_test_large_scale(a: &[f64], b: &[f64], cfg: &HsicConfig) -> Result<IndependenceResult> {
    check_pair(a, b, 200)?;
    if cfg.num_features < 10 {
        return Err(Error::InvalidConfig(format!(
            "large-scale test needs at least 10 features, got {}",
            cfg.num_features
        )));
    }
    let n = a.len();
    let nf = n as f64;
    let sa = median_bandwidth(a)?;
    let sb = median_bandwidth(b)?;
    let f = centered_features(a, sa, cfg.num_features, derive_seed(cfg.seed, 1));
    let g = centered_features(b, sb, cfg.num_features, derive_seed(cfg.seed, 2));

    let cross = f.tr_mul(&g);
    let hsic = cross.norm_squared() / (nf * nf);
    let cf = f.tr_mul(&f) / nf;
    let cg = g.tr_mul(&g) / nf;
    let mean = cf.trace() * cg.trace();
    let variance = 2.0 * cf.norm_squared() * cg.norm_squared();
    let p_value = gamma_tail(nf * hsic, mean, variance)?;
    Ok(IndependenceResult {
        statistic: hsic,
        p_value,
        method: HsicMethod::LargeScale,
        bandwidth_a: sa,
        bandwidth_b: sb,
        n,
    })
}

/// Run the test selected by `cfg` (auto-selected by sample size when unset).
pub fn hsic_test(a: &[f64], b: &[f64], cfg: &HsicConfig) -> Result<IndependenceResult> {
    cfg.validate()?;
    match cfg.resolve_method(a.len()) {
        HsicMethod::Permutation => hsic_test_permutation(a, b, cfg),
        HsicMethod::Gamma => hsic_test_gamma(a, b, cfg),
        HsicMethod::LargeScale => hsic_test_large_scale(a, b, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_examples() {
        assert_eq!(median_bandwidth(&[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(median_bandwidth(&[0.0, 1.0, 2.0]).unwrap(), 1.0);
        assert!(matches!(median_bandwidth(&[2.0; 5]), Err(Error::DegenerateInput(_))));
        assert!(median_bandwidth(&[1.0]).is_err());
    }

    #[test]
    fn bandwidth_for_mostly_tied_binary_data() {
        let v = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(median_bandwidth(&v).unwrap(), 1.0);
    }

    #[test]
    fn statistic_preconditions() {
        let a = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert!(hsic_statistic(&a, &a[..4], 1.0, 1.0).is_err());
        assert!(hsic_statistic(&a, &a, 0.0, 1.0).is_err());
        assert!(hsic_statistic(&a[..4], &a[..4], 1.0, 1.0).is_err());
    }

    #[test]
    fn config_errors() {
        let a: Vec<f64> = (0..300).map(|i| (i as f64).sin()).collect();
        let few_perms = HsicConfig {
            permutations: 10,
            ..Default::default()
        };
        assert!(matches!(
            hsic_test_permutation(&a, &a, &few_perms),
            Err(Error::InvalidConfig(_))
        ));
        let few_features = HsicConfig {
            num_features: 5,
            ..Default::default()
        };
        assert!(matches!(
            hsic_test_large_scale(&a, &a, &few_features),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn auto_selection_by_size() {
        let cfg = HsicConfig::default();
        assert_eq!(cfg.resolve_method(1999), HsicMethod::Permutation);
        assert_eq!(cfg.resolve_method(2000), HsicMethod::LargeScale);
    }
}
