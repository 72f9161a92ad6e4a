//! Regression kernels: polynomial bases, least squares, and a bagged
//! regression forest used to residualize candidates on covariates.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::stats;

/// Designs whose (column-scaled) condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Columns `v, v^2, ..., v^k`. No constant column.
pub fn poly_basis(v: &[f64], degree: usize) -> Result<Vec<Vec<f64>>> {
    if degree == 0 {
        return Err(Error::InvalidConfig("polynomial degree must be at least 1".into()));
    }
    if v.is_empty() {
        return Err(Error::InvalidInput("polynomial basis of an empty vector".into()));
    }
    let mut cols = Vec::with_capacity(degree);
    cols.push(v.to_vec());
    for j in 1..degree {
        let next: Vec<f64> = cols[j - 1].iter().zip(v).map(|(p, x)| p * x).collect();
        cols.push(next);
    }
    Ok(cols)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub column_labels: Vec<String>,
}

impl LinearFit {
    pub fn predict(&self, design: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.predict_rows(design, design.first().map_or(0, Vec::len))
    }

    /// Like `predict`, with the row count given explicitly so that an
    /// intercept-only model (no columns) still yields `n` values.
    fn predict_rows(&self, design: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
        if design.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                what: "design width",
                expected: self.coefficients.len(),
                got: design.len(),
            });
        }
        let mut out = vec![self.intercept; n];
        for (col, b) in design.iter().zip(&self.coefficients) {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "design column length",
                    expected: n,
                    got: col.len(),
                });
            }
            for (o, x) in out.iter_mut().zip(col) {
                *o += b * x;
            }
        }
        Ok(out)
    }

    pub fn residuals(&self, design: &[Vec<f64>], target: &[f64]) -> Result<Vec<f64>> {
        let fitted = self.predict_rows(design, target.len())?;
        Ok(target.iter().zip(fitted).map(|(y, f)| y - f).collect())
    }
}

/// Least squares with an implicit intercept.
///
/// Columns are centered (which absorbs the intercept) and scaled to unit
/// norm, then solved by Householder QR. The condition number of the scaled
/// design is read off the singular values of `R`.
pub fn ols_fit(design: &[Vec<f64>], target: &[f64]) -> Result<LinearFit> {
    let labels = (1..=design.len()).map(|j| format!("c{j}")).collect();
    ols_fit_labeled(design, target, labels)
}

pub fn ols_fit_labeled(design: &[Vec<f64>], target: &[f64], column_labels: Vec<String>) -> Result<LinearFit> {
    let n = target.len();
    let p = design.len();
    if column_labels.len() != p {
        return Err(Error::DimensionMismatch {
            what: "column labels",
            expected: p,
            got: column_labels.len(),
        });
    }
    if n <= p + 1 {
        return Err(Error::InvalidInput(format!(
            "least squares needs more than {} rows for {p} columns, got {n}",
            p + 1
        )));
    }
    for col in design {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                what: "design column length",
                expected: n,
                got: col.len(),
            });
        }
    }
    let y_mean = stats::mean(target);
    if p == 0 {
        return Ok(LinearFit {
            coefficients: vec![],
            intercept: y_mean,
            column_labels,
        });
    }

    let means: Vec<f64> = design.iter().map(|c| stats::mean(c)).collect();
    let mut scales = Vec::with_capacity(p);
    let mut a = DMatrix::<f64>::zeros(n, p);
    for (j, col) in design.iter().enumerate() {
        let norm = col.iter().map(|x| (x - means[j]).powi(2)).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::SingularDesign {
                condition: f64::INFINITY,
            });
        }
        scales.push(norm);
        for (i, x) in col.iter().enumerate() {
            a[(i, j)] = (x - means[j]) / norm;
        }
    }
    let b = DVector::from_iterator(n, target.iter().map(|y| y - y_mean));

    let qr = a.qr();
    let r = qr.r();
    let sv = r.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularDesign { condition });
    }
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    let rhs = qtb.rows(0, p).into_owned();
    let scaled = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::SingularDesign { condition })?;

    let coefficients: Vec<f64> = scaled.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let intercept = y_mean - coefficients.iter().zip(&means).map(|(c, m)| c * m).sum::<f64>();
    if coefficients.iter().any(|c| !c.is_finite()) || !intercept.is_finite() {
        return Err(Error::SingularDesign { condition });
    }
    Ok(LinearFit {
        coefficients,
        intercept,
        column_labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub num_trees: usize,
    pub min_leaf: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            num_trees: 200,
            min_leaf: 5,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<RegressionTree>,
    /// Per tree, whether each training row was drawn into its bootstrap sample.
    in_bag: Vec<Vec<bool>>,
    num_features: usize,
    params: ForestParams,
}

impl ForestModel {
    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Predictions for the training rows, each using only the trees whose
    /// bootstrap sample left that row out. Rows that are in every bag fall
    /// back to the full ensemble.
    pub fn oob_predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        let rows = to_rows(features, self.num_features)?;
        let n_train = self.in_bag.first().map_or(0, Vec::len);
        if rows.len() != n_train {
            return Err(Error::DimensionMismatch {
                what: "out-of-bag rows",
                expected: n_train,
                got: rows.len(),
            });
        }
        Ok(rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let (sum, count) = self
                    .trees
                    .iter()
                    .zip(&self.in_bag)
                    .filter(|(_, bag)| !bag[i])
                    .fold((0.0, 0usize), |(s, c), (t, _)| (s + t.predict_row(row), c + 1));
                if count > 0 {
                    sum / count as f64
                } else {
                    self.predict_row(row)
                }
            })
            .collect())
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

fn to_rows(features: &[Vec<f64>], expected_width: usize) -> Result<Vec<Vec<f64>>> {
    if features.len() != expected_width {
        return Err(Error::DimensionMismatch {
            what: "feature width",
            expected: expected_width,
            got: features.len(),
        });
    }
    let n = features.first().map_or(0, Vec::len);
    if features.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidInput("feature columns differ in length".into()));
    }
    Ok((0..n).map(|i| features.iter().map(|c| c[i]).collect()).collect())
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<f64>],
    target: &'a [f64],
    min_leaf: usize,
    max_depth: Option<usize>,
    mtry: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        let first = self.target[idx[0]];
        if idx.iter().all(|&i| self.target[i] == first) {
            first
        } else {
            idx.iter().map(|&i| self.target[i]).sum::<f64>() / idx.len() as f64
        }
    }

    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut Rng) -> usize {
        let node_id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let pure = idx.iter().all(|&i| self.target[i] == self.target[idx[0]]);
        let depth_ok = self.max_depth.is_none_or(|d| depth < d);
        let split = if !pure && depth_ok && idx.len() >= 2 * self.min_leaf {
            self.find_split(idx, rng)
        } else {
            None
        };
        let Some(split) = split else {
            self.nodes[node_id] = Node::Leaf {
                value: self.leaf_value(idx),
            };
            return node_id;
        };
        let mut boundary = 0;
        for k in 0..idx.len() {
            if self.rows[idx[k]][split.feature] <= split.threshold {
                idx.swap(k, boundary);
                boundary += 1;
            }
        }
        let (left_idx, right_idx) = idx.split_at_mut(boundary);
        let left = self.build(left_idx, depth + 1, rng);
        let right = self.build(right_idx, depth + 1, rng);
        self.nodes[node_id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        node_id
    }

    /// Evaluates `mtry` random features; keeps drawing further features
    /// while none of those examined admits a valid split.
    fn find_split(&self, idx: &[usize], rng: &mut Rng) -> Option<BestSplit> {
        let q = self.rows[0].len();
        let mut features: Vec<usize> = (0..q).collect();
        features.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for (examined, &f) in features.iter().enumerate() {
            if examined >= self.mtry && best.is_some() {
                break;
            }
            order.sort_unstable_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let total: f64 = order.iter().map(|&i| self.target[i]).sum();
            let m = order.len();
            let mut left_sum = 0.0;
            for k in 0..m - 1 {
                left_sum += self.target[order[k]];
                let nl = k + 1;
                let nr = m - nl;
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let lo = self.rows[order[k]][f];
                let hi = self.rows[order[k + 1]][f];
                if !(lo < hi) {
                    continue;
                }
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

/// Bagged regression trees with `ceil(sqrt(q))` candidate features per split.
/// Tree `t` draws from its own stream seeded with `seed ^ t`, so the fit is
/// identical however the trees are scheduled.
pub fn forest_fit(features: &[Vec<f64>], target: &[f64], params: ForestParams) -> Result<ForestModel> {
    let q = features.len();
    if q == 0 {
        return Err(Error::InvalidInput("forest needs at least one feature".into()));
    }
    if params.num_trees == 0 || params.min_leaf == 0 {
        return Err(Error::InvalidConfig(
            "forest needs num_trees >= 1 and min_leaf >= 1".into(),
        ));
    }
    let rows = to_rows(features, q)?;
    let n = rows.len();
    if n != target.len() {
        return Err(Error::DimensionMismatch {
            what: "target length",
            expected: n,
            got: target.len(),
        });
    }
    if n < 2 * params.min_leaf {
        return Err(Error::InvalidInput(format!(
            "forest needs at least {} rows for min_leaf {}, got {n}",
            2 * params.min_leaf,
            params.min_leaf
        )));
    }
    let mtry = (q as f64).sqrt().ceil() as usize;
    let fitted: Vec<(RegressionTree, Vec<bool>)> = (0..params.num_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(params.seed ^ t as u64);
            let mut in_bag = vec![false; n];
            let mut idx: Vec<usize> = if params.bootstrap {
                (0..n)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect()
            } else {
                in_bag.iter_mut().for_each(|b| *b = true);
                (0..n).collect()
            };
            let mut builder = TreeBuilder {
                rows: &rows,
                target,
                min_leaf: params.min_leaf,
                max_depth: params.max_depth,
                mtry,
                nodes: Vec::new(),
            };
            builder.build(&mut idx, 0, &mut rng);
            (RegressionTree { nodes: builder.nodes }, in_bag)
        })
        .collect();
    let (trees, in_bag) = fitted.into_iter().unzip();
    Ok(ForestModel {
        trees,
        in_bag,
        num_features: q,
        params,
    })
}

pub fn forest_predict(model: &ForestModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    let rows = to_rows(features, model.num_features)?;
    Ok(rows.iter().map(|r| model.predict_row(r)).collect())
}

/// Residual of `z` after removing its conditional mean given `w`.
///
/// With no covariates `z` is returned unchanged. Otherwise the conditional
/// mean is a forest fit, evaluated out-of-bag so that points are never
/// predicted by trees that saw them.
pub fn residualize(z: &[f64], w: &[Vec<f64>], params: ForestParams) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Ok(z.to_vec());
    }
    for col in w {
        if col.len() != z.len() {
            return Err(Error::DimensionMismatch {
                what: "covariate length",
                expected: z.len(),
                got: col.len(),
            });
        }
    }
    let model = forest_fit(w, z, params)?;
    let fitted = model.oob_predict(w)?;
    Ok(z.iter().zip(fitted).map(|(v, f)| v - f).collect())
}

/// Linear residualization, used for the instrument-relevance check.
pub fn linear_residualize(v: &[f64], w: &[Vec<f64>]) -> Result<Vec<f64>> {
    if w.is_empty() {
        let m = stats::mean(v);
        return Ok(v.iter().map(|x| x - m).collect());
    }
    ols_fit(w, v)?.residuals(w, v)
}

/// Seed for the forest used inside a larger procedure seeded with `seed`.
pub fn forest_seed(seed: u64) -> u64 {
    derive_seed(seed, 0x666f_7265_7374)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn poly_basis_examples() {
        assert_eq!(
            poly_basis(&[1.0, 2.0], 2).unwrap(),
            vec![vec![1.0, 2.0], vec![1.0, 4.0]]
        );
        let v = [0.5, -1.5, 3.0];
        assert_eq!(poly_basis(&v, 1).unwrap(), vec![v.to_vec()]);
        assert!(matches!(poly_basis(&v, 0), Err(Error::InvalidConfig(_))));
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    fn det(mut m: Vec<Vec<f64>>) -> f64 {
        let n = m.len();
        let mut d = 1.0;
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            if m[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                m.swap(p, c);
                d = -d;
            }
            d *= m[c][c];
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        d
    }

    #[test]
    fn poly_basis_has_full_rank_gram() {
        let v: Vec<f64> = (0..10).map(|i| -1.0 + 0.25 * i as f64).collect();
        let basis = poly_basis(&v, 3).unwrap();
        let gram: Vec<Vec<f64>> = basis
            .iter()
            .map(|a| {
                basis
                    .iter()
                    .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum())
                    .collect()
            })
            .collect();
        assert!(det(gram) > 0.0);
    }

    #[test]
    fn intercept_only_residuals_cover_every_row() {
        let y = [1.0, 2.0, 6.0];
        let fit = ols_fit(&[], &y).unwrap();
        assert_eq!(fit.residuals(&[], &y).unwrap(), [-2.0, -1.0, 3.0]);
    }

    #[test]
    fn ols_exact_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = ols_fit(&[x], &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
        assert!(fit.intercept.abs() < 1e-10);
    }

    /// Normal equations `(A^T A) b = A^T y` on the intercept-augmented design,
    /// solved by Gauss-Jordan elimination.
    fn normal_equations(design: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let mut cols = vec![vec![1.0; n]];
        cols.extend(design.iter().cloned());
        let p = cols.len();
        let mut aug: Vec<Vec<f64>> = (0..p)
            .map(|i| {
                let mut row: Vec<f64> = (0..p)
                    .map(|j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum())
                    .collect();
                row.push(cols[i].iter().zip(y).map(|(a, b)| a * b).sum());
                row
            })
            .collect();
        for c in 0..p {
            let piv = aug[c][c];
            for k in 0..=p {
                aug[c][k] /= piv;
            }
            for r in 0..p {
                if r != c {
                    let f = aug[r][c];
                    for k in 0..=p {
                        aug[r][k] -= f * aug[c][k];
                    }
                }
            }
        }
        aug.iter().map(|row| row[p]).collect()
    }

    #[test]
    fn ols_matches_normal_equations() {
        let mut rng = rng_from_seed(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        for _ in 0..20 {
            let design: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..5).map(|_| normal.sample(&mut rng)).collect())
                .collect();
            let y: Vec<f64> = (0..5).map(|_| normal.sample(&mut rng)).collect();
            let fit = ols_fit(&design, &y).unwrap();
            let oracle = normal_equations(&design, &y);
            assert!((fit.intercept - oracle[0]).abs() < 1e-8);
            assert!((fit.coefficients[0] - oracle[1]).abs() < 1e-8);
            assert!((fit.coefficients[1] - oracle[2]).abs() < 1e-8);
        }
    }

    #[test]
    fn ols_residuals_orthogonal_to_design() {
        let mut rng = rng_from_seed(5);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 300;
        let x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let design = poly_basis(&x, 3).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v.sin() + 0.1 * normal.sample(&mut rng)).collect();
        let fit = ols_fit(&design, &y).unwrap();
        let resid = fit.residuals(&design, &y).unwrap();
        assert!(resid.iter().sum::<f64>().abs() < 1e-8 * n as f64);
        for col in &design {
            let scale = col.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let dot: f64 = col.iter().zip(&resid).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-8 * n as f64 * scale);
        }
    }

    #[test]
    fn ols_rejects_duplicate_and_constant_columns() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = x.clone();
        assert!(matches!(
            ols_fit(&[x.clone(), x.clone()], &y),
            Err(Error::SingularDesign { .. })
        ));
        assert!(matches!(
            ols_fit(&[x.clone(), vec![1.0; 10]], &y),
            Err(Error::SingularDesign { .. })
        ));
        assert!(matches!(ols_fit(&vec![x.clone(); 9], &y), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn forest_constant_target() {
        let w: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let model = forest_fit(
            std::slice::from_ref(&w),
            &[3.0; 50],
            ForestParams {
                num_trees: 20,
                ..Default::default()
            },
        )
        .unwrap();
        let pred = forest_predict(&model, std::slice::from_ref(&w)).unwrap();
        assert!(pred.iter().all(|&p| p == 3.0));
        assert!(model.oob_predict(&[w]).unwrap().iter().all(|&p| p == 3.0));
    }

    #[test]
    fn single_unbagged_tree_memorizes() {
        let w: Vec<f64> = (0..40)
            .map(|i| (i as f64 * 0.7).cos() * 3.0 + i as f64 * 1e-3)
            .collect();
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).sin()).collect();
        let params = ForestParams {
            num_trees: 1,
            min_leaf: 1,
            max_depth: None,
            bootstrap: false,
            seed: 9,
        };
        let model = forest_fit(std::slice::from_ref(&w), &y, params).unwrap();
        assert_eq!(forest_predict(&model, &[w]).unwrap(), y);
    }

    #[test]
    fn forest_errors() {
        let params = ForestParams::default();
        assert!(forest_fit(&[], &[1.0; 20], params).is_err());
        assert!(forest_fit(&[vec![0.0; 9]], &[1.0; 9], params).is_err());
        let w: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let model = forest_fit(std::slice::from_ref(&w), &w, ForestParams { num_trees: 3, ..params }).unwrap();
        assert!(matches!(
            forest_predict(&model, &[w.clone(), w]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn forest_is_deterministic_and_respects_depth() {
        let mut rng = rng_from_seed(3);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let w: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..200).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        let y: Vec<f64> = (0..200).map(|i| w[0][i] * 2.0 - w[2][i]).collect();
        let params = ForestParams {
            num_trees: 10,
            max_depth: Some(3),
            seed: 42,
            ..Default::default()
        };
        let a = forest_fit(&w, &y, params).unwrap();
        let b = forest_fit(&w, &y, params).unwrap();
        assert_eq!(a, b);
        assert!(a.trees().iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn residualize_without_covariates_is_identity() {
        let z = vec![1.5, -2.0, 0.25];
        assert_eq!(residualize(&z, &[], ForestParams::default()).unwrap(), z);
    }

    #[test]
    fn residualize_constant_target() {
        let w: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let r = residualize(
            &[0.1; 100],
            &[w],
            ForestParams {
                num_trees: 30,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.iter().all(|v| v.abs() <= 1e-9));
    }
}
