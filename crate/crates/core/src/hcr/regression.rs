//! Direct conditional-density prediction: each moment `f_i(x)` of the target
//! is ridge-regressed on basis features of the conditioning variables, and
//! the predictions combine into `rho(x|y) = 1 + sum_i f_i(x) a_i(y)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::HcrBasis;
use super::calibrated::{CalibratedDensity1D, MIN_GRID};
use super::joint::raw_on_grid;
use crate::error::{Error, Result};
use crate::stats::CompensatedSum;
use crate::table::SampleTable;

pub const DEFAULT_RIDGE: f64 = 1e-6;
const CHUNK_ROWS: usize = 4096;
/// Features whose sample variance falls below this are dropped.
const MIN_FEATURE_VARIANCE: f64 = 1e-12;

/// One regression feature over the conditioning values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    /// `f_degree(y[column])`
    Basis { column: usize, degree: usize },
    /// `f_da(y[a]) * f_db(y[b])`
    Product {
        a: usize,
        da: usize,
        b: usize,
        db: usize,
    },
}

impl Feature {
    fn eval(&self, given_basis: &[Vec<f64>]) -> f64 {
        match *self {
            Feature::Basis { column, degree } => given_basis[column][degree],
            Feature::Product { a, da, b, db } => given_basis[a][da] * given_basis[b][db],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionOptions {
    pub ridge: f64,
    /// Adds `f_j(y_a) f_k(y_b)` cross features for every column pair.
    pub pairwise_products: bool,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        Self {
            ridge: DEFAULT_RIDGE,
            pairwise_products: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRegressionModel {
    degree: usize,
    given: Vec<String>,
    features: Vec<Feature>,
    /// `weights[i-1]` predicts moment `i`; entry 0 is the bias.
    weights: Vec<Vec<f64>>,
    ridge: f64,
    dropped: Vec<Feature>,
}

impl MomentRegressionModel {
    /// Fits on raw columns. `conditioning[c]` holds the values of `given[c]`.
    pub fn fit(
        target: &[f64],
        conditioning: &[&[f64]],
        given: Vec<String>,
        degree: usize,
        options: RegressionOptions,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::invalid("moment regression needs degree >= 1"));
        }
        if conditioning.len() != given.len() {
            return Err(Error::invalid("conditioning names and columns differ in count"));
        }
        if !(options.ridge >= 0.0 && options.ridge.is_finite()) {
            return Err(Error::invalid(format!("ridge must be >= 0, got {}", options.ridge)));
        }
        let n = target.len();
        if conditioning.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("conditioning columns differ in length from target"));
        }
        for (name, col) in std::iter::once(("target", target))
            .chain(given.iter().map(String::as_str).zip(conditioning.iter().copied()))
        {
            if let Some(v) = col.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::invalid(format!("column '{name}' value {v} outside [0,1]")));
            }
        }

        let candidates = candidate_features(given.len(), degree, options.pairwise_products);
        if n <= candidates.len() + 1 {
            return Err(Error::invalid(format!(
                "{n} rows is too few for {} regression features",
                candidates.len() + 1
            )));
        }
        let basis = HcrBasis::new(degree);

        // first pass: feature means and variances to find constant features
        let (sum1, sum2) = reduce_rows(n, candidates.len(), |row, acc1, acc2| {
            let gb = given_basis_row(&basis, conditioning, row);
            for (k, f) in candidates.iter().enumerate() {
                let v = f.eval(&gb);
                acc1[k].add(v);
                acc2[k].add(v * v);
            }
        });
        let nf = n as f64;
        #[allow(clippy::type_complexity)]
        let (features, dropped): (Vec<(usize, &Feature)>, Vec<(usize, &Feature)>) =
            candidates.iter().enumerate().partition(|(k, _)| {
                let m = sum1[*k] / nf;
                sum2[*k] / nf - m * m > MIN_FEATURE_VARIANCE
            });
        let features: Vec<Feature> = features.into_iter().map(|(_, f)| *f).collect();
        let dropped: Vec<Feature> = dropped.into_iter().map(|(_, f)| *f).collect();

        // second pass: normal equations with bias column 0
        let p = features.len() + 1;
        let (gram, rhs) = {
            let width = p * p + p * degree;
            let (acc, _) = reduce_rows(n, width, |row, acc, _| {
                let gb = given_basis_row(&basis, conditioning, row);
                let mut x = Vec::with_capacity(p);
                x.push(1.0);
                x.extend(features.iter().map(|f| f.eval(&gb)));
                for a in 0..p {
                    for b in a..p {
                        acc[a * p + b].add(x[a] * x[b]);
                    }
                }
                let fx = basis.eval_all(target[row]);
                for i in 1..=degree {
                    for a in 0..p {
                        acc[p * p + (i - 1) * p + a].add(x[a] * fx[i]);
                    }
                }
            });
            let mut gram = DMatrix::<f64>::zeros(p, p);
            for a in 0..p {
                for b in a..p {
                    let v = acc[a * p + b] / nf;
                    gram[(a, b)] = v;
                    gram[(b, a)] = v;
                }
            }
            for a in 1..p {
                gram[(a, a)] += options.ridge;
            }
            let rhs: Vec<DVector<f64>> = (1..=degree)
                .map(|i| DVector::from_iterator(p, (0..p).map(|a| acc[p * p + (i - 1) * p + a] / nf)))
                .collect();
            (gram, rhs)
        };

        let max_diag = (0..p).map(|a| gram[(a, a)]).fold(0.0, f64::max);
        let singular =
            || Error::NumericalFailure("moment regression normal equations are singular".into());
        let chol = gram.cholesky().ok_or_else(singular)?;
        let l = chol.l_dirty();
        if (0..p).any(|a| l[(a, a)] * l[(a, a)] <= 1e-13 * max_diag) {
            return Err(singular());
        }
        let weights: Vec<Vec<f64>> = rhs
            .iter()
            .map(|b| chol.solve(b).iter().copied().collect::<Vec<f64>>())
            .collect();
        if weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::NumericalFailure("non-finite regression weights".into()));
        }
        Ok(Self {
            degree,
            given,
            features,
            weights,
            ridge: options.ridge,
            dropped,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn given(&self) -> &[String] {
        &self.given
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn dropped(&self) -> &[Feature] {
        &self.dropped
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Predicted moments `a_1(y)..a_m(y)`.
    pub fn predict_moments(&self, given_row: &[f64]) -> Result<Vec<f64>> {
        if given_row.len() != self.given.len() {
            return Err(Error::invalid(format!(
                "model conditions on {} values, got {}",
                self.given.len(),
                given_row.len()
            )));
        }
        if let Some(v) = given_row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("conditioning value {v} outside [0,1]")));
        }
        let basis = HcrBasis::new(self.degree);
        let gb: Vec<Vec<f64>> = given_row.iter().map(|&y| basis.eval_all(y)).collect();
        let x: Vec<f64> = std::iter::once(1.0)
            .chain(self.features.iter().map(|f| f.eval(&gb)))
            .collect();
        Ok(self
            .weights
            .iter()
            .map(|w| w.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Slice coefficients `[1, a_1(y), .., a_m(y)]` in the target basis.
    pub fn slice_coeffs(&self, given_row: &[f64]) -> Result<Vec<f64>> {
        let mut c = Vec::with_capacity(self.degree + 1);
        c.push(1.0);
        c.extend(self.predict_moments(given_row)?);
        Ok(c)
    }

    pub fn predict_conditional(
        &self,
        given_row: &[f64],
        grid_size: usize,
        floor: f64,
    ) -> Result<CalibratedDensity1D> {
        if grid_size < MIN_GRID {
            return Err(Error::invalid(format!(
                "grid size {grid_size} below minimum {MIN_GRID}"
            )));
        }
        let c = self.slice_coeffs(given_row)?;
        let table = HcrBasis::new(self.degree).grid_table(grid_size);
        CalibratedDensity1D::from_raw(&raw_on_grid(&c, &table, grid_size), floor)
    }
}

/// Table-level wrapper: regress the moments of `target` on `given` columns.
pub fn fit_moment_regression(
    table: &SampleTable,
    target: &str,
    given: &[String],
    degree: usize,
    options: RegressionOptions,
) -> Result<MomentRegressionModel> {
    let t = table.column(target)?;
    let cond = given
        .iter()
        .map(|g| table.column(g))
        .collect::<Result<Vec<_>>>()?;
    MomentRegressionModel::fit(t, &cond, given.to_vec(), degree, options)
}

fn candidate_features(n_given: usize, degree: usize, pairwise: bool) -> Vec<Feature> {
    let mut out = Vec::new();
    for column in 0..n_given {
        for d in 1..=degree {
            out.push(Feature::Basis { column, degree: d });
        }
    }
    if pairwise {
        for a in 0..n_given {
            for b in a + 1..n_given {
                for da in 1..=degree {
                    for db in 1..=degree {
                        out.push(Feature::Product { a, da, b, db });
                    }
                }
            }
        }
    }
    out
}

fn given_basis_row(basis: &HcrBasis, conditioning: &[&[f64]], row: usize) -> Vec<Vec<f64>> {
    conditioning.iter().map(|c| basis.eval_all(c[row])).collect()
}

/// Deterministic chunked reduction over rows into two accumulator vectors of
/// width `width`; returns the totals.
fn reduce_rows<F>(n: usize, width: usize, body: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(usize, &mut [CompensatedSum], &mut [CompensatedSum]) + Sync,
{
    let chunks: Vec<(Vec<CompensatedSum>, Vec<CompensatedSum>)> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|chunk| {
            let mut a = vec![CompensatedSum::new(); width];
            let mut b = vec![CompensatedSum::new(); width];
            let start = chunk * CHUNK_ROWS;
            for row in start..(start + CHUNK_ROWS).min(n) {
                body(row, &mut a, &mut b);
            }
            (a, b)
        })
        .collect();
    let total = |second: bool| {
        (0..width)
            .map(|k| {
                chunks
                    .iter()
                    .map(|(a, b)| if second { b[k].value() } else { a[k].value() })
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect::<Vec<f64>>()
    };
    (total(false), total(true))
}
