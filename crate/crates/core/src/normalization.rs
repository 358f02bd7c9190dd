//! Empirical quantile normalization of raw columns onto `[0,1]` and back.
//!
//! Each value is mapped to `(average_rank - 0.5) / n`; between distinct sample
//! values the map interpolates linearly, outside the sample hull it clamps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::SampleTable;

/// Fitted empirical CDF of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileMap {
    sorted_values: Vec<f64>,
    n: usize,
    /// `[start, end)` ranges of `sorted_values` sharing one value.
    tie_groups: Vec<(usize, usize)>,
    /// One knot per tie group: the group's value and its rank-grid position.
    #[serde(skip)]
    knots: Vec<f64>,
    #[serde(skip)]
    levels: Vec<f64>,
}

impl QuantileMap {
    pub fn fit(column: &[f64]) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::invalid("cannot fit a quantile map to an empty column"));
        }
        if let Some(row) = column.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at row {row}")));
        }
        let mut sorted_values = column.to_vec();
        sorted_values.sort_by(f64::total_cmp);
        let mut tie_groups = Vec::new();
        let mut start = 0;
        while start < sorted_values.len() {
            let mut end = start + 1;
            while end < sorted_values.len() && sorted_values[end] == sorted_values[start] {
                end += 1;
            }
            tie_groups.push((start, end));
            start = end;
        }
        Ok(Self::assemble(sorted_values, tie_groups))
    }

    fn assemble(sorted_values: Vec<f64>, tie_groups: Vec<(usize, usize)>) -> Self {
        let n = sorted_values.len();
        let nf = n as f64;
        let knots = tie_groups.iter().map(|&(s, _)| sorted_values[s]).collect();
        let levels = tie_groups
            .iter()
            .map(|&(s, e)| {
                // average of 1-based ranks s+1..=e
                let avg_rank = (s + 1 + e) as f64 / 2.0;
                (avg_rank - 0.5) / nf
            })
            .collect();
        Self {
            sorted_values,
            n,
            tie_groups,
            knots,
            levels,
        }
    }

    /// Rebuilds derived lookup tables after deserialization.
    pub fn rebuild(self) -> Result<Self> {
        let QuantileMap {
            sorted_values,
            n,
            tie_groups,
            ..
        } = self;
        if sorted_values.is_empty() || n != sorted_values.len() {
            return Err(Error::Format("quantile map: inconsistent sample count".into()));
        }
        if sorted_values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Format("quantile map: values not sorted".into()));
        }
        let covered = tie_groups.iter().map(|&(s, e)| e.saturating_sub(s)).sum::<usize>();
        if covered != n || tie_groups.iter().any(|&(s, e)| s >= e || e > n) {
            return Err(Error::Format("quantile map: malformed tie groups".into()));
        }
        Ok(Self::assemble(sorted_values, tie_groups))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted_values
    }

    pub fn tie_groups(&self) -> &[(usize, usize)] {
        &self.tie_groups
    }

    pub fn forward(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("non-finite input {x}")));
        }
        Ok(interpolate(&self.knots, &self.levels, x))
    }

    pub fn inverse(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!("quantile {u} outside [0,1]")));
        }
        Ok(interpolate(&self.levels, &self.knots, u))
    }

    pub fn forward_all(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.forward(x)).collect()
    }

    pub fn inverse_all(&self, us: &[f64]) -> Result<Vec<f64>> {
        us.iter().map(|&u| self.inverse(u)).collect()
    }
}

/// Piecewise-linear interpolation through strictly increasing `xs`, clamped
/// to the end values outside the range.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    // first index with xs[i] > x; 1 <= i <= last
    let i = xs.partition_point(|&k| k <= x);
    let (x0, x1) = (xs[i - 1], xs[i]);
    if x == x0 {
        return ys[i - 1];
    }
    let t = (x - x0) / (x1 - x0);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

pub fn fit_quantile_map(column: &[f64]) -> Result<QuantileMap> {
    QuantileMap::fit(column)
}

/// Quantile-normalizes every column; maps are returned in column order.
pub fn normalize_table(table: &SampleTable) -> Result<(SampleTable, Vec<QuantileMap>)> {
    let fitted: Vec<(QuantileMap, Vec<f64>)> = table
        .names()
        .par_iter()
        .zip(table.columns().par_iter())
        .map(|(name, col)| {
            let map = QuantileMap::fit(col).map_err(|e| e.context(format!("column '{name}'")))?;
            let out = map.forward_all(col)?;
            Ok((map, out))
        })
        .collect::<Result<_>>()?;
    let (maps, cols): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
    Ok((SampleTable::new(table.names().to_vec(), cols)?, maps))
}

/// Applies the inverse maps column by column.
pub fn denormalize_table(table: &SampleTable, maps: &[QuantileMap]) -> Result<SampleTable> {
    if maps.len() != table.n_cols() {
        return Err(Error::invalid(format!(
            "{} quantile maps for {} columns",
            maps.len(),
            table.n_cols()
        )));
    }
    let cols = table
        .columns()
        .iter()
        .zip(maps)
        .map(|(c, m)| m.inverse_all(c))
        .collect::<Result<Vec<_>>>()?;
    SampleTable::new(table.names().to_vec(), cols)
}
