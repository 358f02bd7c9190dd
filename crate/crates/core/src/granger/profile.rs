use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::residue::ResidueSeries;
use crate::error::{Error, Result};
use crate::hcr::{fit_joint_columns, DEFAULT_COEFF_CAP};
use crate::infoflow::mutual_information_binned;
use crate::stats::pearson;

/// Minimum number of aligned pairs at every delay.
pub const MIN_OVERLAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayProfile {
    pub delays: Vec<usize>,
    pub correlation: Vec<f64>,
    /// Binned MI in nats.
    pub mi: Vec<f64>,
    pub bins: usize,
    pub argmax_delay: usize,
}

impl DelayProfile {
    pub fn peak_abs_correlation(&self) -> f64 {
        self.correlation.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Index of the largest `|v|`; the first one wins ties.
pub(crate) fn argmax_abs(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.abs() > values[best].abs() {
            best = i;
        }
    }
    best
}

/// Aligned `(R_t, y_{t-dt})` pairs for `t >= max(start, dt)`.
fn aligned<'a>(r: &'a ResidueSeries, y: &'a [f64], dt: usize) -> (&'a [f64], &'a [f64]) {
    let t0 = r.start.max(dt);
    let big_t = r.series_len;
    (&r.values[t0 - r.start..], &y[t0 - dt..big_t - dt])
}

fn check_inputs(r: &ResidueSeries, y: &[f64], max_delay: usize) -> Result<()> {
    if y.len() != r.series_len {
        return Err(Error::invalid(format!(
            "source series has length {}, residues come from length {}",
            y.len(),
            r.series_len
        )));
    }
    if let Some(v) = y.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("source value {v} outside [0,1] (normalize first)")));
    }
    let overlap = r.series_len.saturating_sub(r.start.max(max_delay));
    if overlap < MIN_OVERLAP {
        return Err(Error::invalid(format!(
            "max delay {max_delay} leaves {overlap} aligned pairs, need at least {MIN_OVERLAP}"
        )));
    }
    Ok(())
}

/// Pearson correlation and binned MI between residues and the lagged source
/// for every delay `0..=max_delay`.
pub fn delay_profile(
    residues: &ResidueSeries,
    y: &[f64],
    max_delay: usize,
    bins: usize,
) -> Result<DelayProfile> {
    check_inputs(residues, y, max_delay)?;
    let delays: Vec<usize> = (0..=max_delay).collect();
    let stats = delays
        .par_iter()
        .map(|&dt| {
            let (r, s) = aligned(residues, y, dt);
            Ok((pearson(r, s), mutual_information_binned(r, s, bins)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let (correlation, mi): (Vec<f64>, Vec<f64>) = stats.into_iter().unzip();
    let argmax_delay = delays[argmax_abs(&correlation)];
    Ok(DelayProfile {
        delays,
        correlation,
        mi,
        bins,
        argmax_delay,
    })
}

/// Bivariate HCR coefficients `a_jk(dt)` of `(R_t, y_{t-dt})`; `j` indexes
/// the residue axis and `k` the source axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCoefficientField {
    pub degree: usize,
    pub delays: Vec<usize>,
    /// One row-major `(m+1) x (m+1)` matrix per delay.
    pub coeffs: Vec<Vec<f64>>,
}

impl DelayCoefficientField {
    pub fn coeff(&self, delay_index: usize, j: usize, k: usize) -> f64 {
        self.coeffs[delay_index][j * (self.degree + 1) + k]
    }

    /// The `a_jk(dt)` curve for one index pair.
    pub fn curve(&self, j: usize, k: usize) -> Vec<f64> {
        (0..self.delays.len()).map(|d| self.coeff(d, j, k)).collect()
    }
}

pub fn delay_coefficients(
    residues: &ResidueSeries,
    y: &[f64],
    max_delay: usize,
    degree: usize,
) -> Result<DelayCoefficientField> {
    check_inputs(residues, y, max_delay)?;
    let delays: Vec<usize> = (0..=max_delay).collect();
    let coeffs = delays
        .iter()
        .map(|&dt| {
            let (r, s) = aligned(residues, y, dt);
            Ok(fit_joint_columns(&[r, s], degree, DEFAULT_COEFF_CAP)?
                .coeffs()
                .to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DelayCoefficientField {
        degree,
        delays,
        coeffs,
    })
}
