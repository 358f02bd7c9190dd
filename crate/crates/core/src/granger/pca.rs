use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::profile::DelayCoefficientField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcaTarget {
    Rank(usize),
    /// Smallest rank whose components capture at least this fraction.
    Variance(f64),
}

impl Default for PcaTarget {
    fn default() -> Self {
        PcaTarget::Variance(0.9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayFeatureDecomposition {
    pub rank: usize,
    /// `(j, k)` index of each coordinate, both `>= 1`.
    pub index: Vec<(usize, usize)>,
    /// Top `rank` principal directions, unit length.
    pub directions: Vec<Vec<f64>>,
    /// `scores[i][d]`: projection of delay `d` on direction `i`.
    pub scores: Vec<Vec<f64>>,
    /// All eigenvalues, descending and clamped at 0.
    pub eigenvalues: Vec<f64>,
    pub variance_fraction: f64,
    /// Subtracted column means when centering was requested.
    pub mean: Option<Vec<f64>>,
}

impl DelayFeatureDecomposition {
    /// Rank-`rank` approximation of the `(j,k >= 1)` block, one row per delay.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let dims = self.index.len();
        let n_delays = self.scores.first().map_or(0, Vec::len);
        (0..n_delays)
            .map(|d| {
                (0..dims)
                    .map(|c| {
                        let base = self.mean.as_ref().map_or(0.0, |m| m[c]);
                        base + (0..self.rank)
                            .map(|i| self.scores[i][d] * self.directions[i][c])
                            .sum::<f64>()
                    })
                    .collect()
            })
            .collect()
    }
}

/// The `(j,k >= 1)` block of each delay's coefficient matrix as rows.
pub fn mixed_block(field: &DelayCoefficientField) -> (Vec<(usize, usize)>, Vec<Vec<f64>>) {
    let m = field.degree;
    let index: Vec<(usize, usize)> = (1..=m).flat_map(|j| (1..=m).map(move |k| (j, k))).collect();
    let rows = (0..field.delays.len())
        .map(|d| index.iter().map(|&(j, k)| field.coeff(d, j, k)).collect())
        .collect();
    (index, rows)
}

/// Eigendecomposition of the second-moment matrix of the mixed coefficient
/// block across delays (uncentered unless `center`).
pub fn pca_reduce(
    field: &DelayCoefficientField,
    target: PcaTarget,
    center: bool,
) -> Result<DelayFeatureDecomposition> {
    let n = field.delays.len();
    if n < 2 {
        return Err(Error::invalid(format!("PCA needs at least 2 delays, got {n}")));
    }
    if field.degree == 0 {
        return Err(Error::invalid("PCA needs degree >= 1"));
    }
    let (index, rows) = mixed_block(field);
    let dims = index.len();
    let max_rank = n.min(dims);
    let mut data = DMatrix::from_fn(n, dims, |d, c| rows[d][c]);
    let mean = center.then(|| {
        let means: Vec<f64> = (0..dims).map(|c| data.column(c).mean()).collect();
        for (c, m) in means.iter().enumerate() {
            data.column_mut(c).add_scalar_mut(-m);
        }
        means
    });
    let second = data.transpose() * &data / n as f64;
    let eig = SymmetricEigen::new(second);
    let mut order: Vec<usize> = (0..dims).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    let fraction = |r: usize| {
        if total > 0.0 {
            eigenvalues[..r].iter().sum::<f64>() / total
        } else {
            1.0
        }
    };
    let rank = match target {
        PcaTarget::Rank(r) => {
            if r == 0 || r > max_rank {
                return Err(Error::invalid(format!(
                    "PCA rank {r} outside 1..={max_rank}"
                )));
            }
            r
        }
        PcaTarget::Variance(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid(format!("variance target {f} outside (0,1]")));
            }
            (1..=max_rank).find(|&r| fraction(r) >= f).unwrap_or(max_rank)
        }
    };
    let directions: Vec<Vec<f64>> = order[..rank]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            // sign convention: largest-magnitude entry positive
            let lead = v[super::profile::argmax_abs(&v)];
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    let scores = directions
        .iter()
        .map(|v| {
            (0..n)
                .map(|d| data.row(d).iter().zip(v).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(DelayFeatureDecomposition {
        rank,
        index,
        directions,
        scores,
        variance_fraction: fraction(rank),
        eigenvalues,
        mean,
    })
}
