use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{iterate_extraction, ExtractionConfig, ExtractionLayer, MethodChoice};
use crate::normalization::QuantileMap;
use crate::table::SampleTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidueMode {
    /// Conditional CDF of `x_t` given the lag features.
    #[default]
    Distribution,
    /// Linear prediction error, quantile-normalized.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueOptions {
    pub lags: usize,
    pub mode: ResidueMode,
    /// Successive extractions of the residue against the same lag features.
    pub iterations: usize,
    /// Degree, grid and floor of the underlying extraction; the method is
    /// always moment regression.
    pub extraction: ExtractionConfig,
}

impl Default for ResidueOptions {
    fn default() -> Self {
        Self {
            lags: 2,
            mode: ResidueMode::Distribution,
            iterations: 2,
            extraction: ExtractionConfig::default(),
        }
    }
}

/// Another series whose lags `1..=max_lag` are added to the conditioning.
#[derive(Debug, Clone, Copy)]
pub struct LagCovariate<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
    pub max_lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueSeries {
    /// `values[i]` is the residue at time `start + i`.
    pub values: Vec<f64>,
    pub start: usize,
    /// Length of the series the residues were computed from.
    pub series_len: usize,
    pub lag_order: usize,
    pub source: String,
    pub mode: ResidueMode,
    /// Names of the lag features conditioned on.
    pub conditioning: Vec<String>,
    /// Fitted extraction layers (distribution mode).
    pub layers: Vec<ExtractionLayer>,
    /// Intercept then one weight per conditioning feature (linear mode).
    pub linear_weights: Vec<f64>,
}

impl ResidueSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn lag_name(series: &str, lag: usize) -> String {
    format!("{series}[t-{lag}]")
}

fn check_unit(name: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|v| !(0.0..=1.0).contains(v)) {
        None => Ok(()),
        Some(i) => Err(Error::invalid(format!(
            "series '{name}' value {} at t={i} outside [0,1] (normalize first)",
            xs[i]
        ))),
    }
}

/// Residues of `x` with the information of its own `lags` past values (and
/// optional covariate lags) removed.
pub fn fit_residues(
    name: &str,
    x: &[f64],
    options: &ResidueOptions,
    covariates: &[LagCovariate<'_>],
) -> Result<ResidueSeries> {
    let p = options.lags;
    if p == 0 {
        return Err(Error::invalid("lag order must be at least 1"));
    }
    if options.iterations == 0 {
        return Err(Error::invalid("residue iterations must be at least 1"));
    }
    check_unit(name, x)?;
    let big_t = x.len();
    for c in covariates {
        check_unit(c.name, c.values)?;
        if c.values.len() != big_t {
            return Err(Error::invalid(format!(
                "series '{}' has length {}, expected {big_t}",
                c.name,
                c.values.len()
            )));
        }
        if c.max_lag == 0 {
            return Err(Error::invalid(format!("series '{}' needs max lag >= 1", c.name)));
        }
    }
    let start = covariates.iter().map(|c| c.max_lag).fold(p, usize::max);
    let n_features = p + covariates.iter().map(|c| c.max_lag).sum::<usize>();
    let feature_count = match options.mode {
        ResidueMode::Distribution => n_features * options.extraction.degree + 1,
        ResidueMode::Linear => n_features + 1,
    };
    if big_t <= start + feature_count {
        return Err(Error::invalid(format!(
            "series of length {big_t} is too short for lag order {p} with {feature_count} features"
        )));
    }

    let mut names = vec!["target".to_string()];
    let mut cols = vec![x[start..].to_vec()];
    let lagged = |values: &[f64], lag: usize| values[start - lag..big_t - lag].to_vec();
    for lag in 1..=p {
        names.push(lag_name(name, lag));
        cols.push(lagged(x, lag));
    }
    for c in covariates {
        for lag in 1..=c.max_lag {
            names.push(lag_name(c.name, lag));
            cols.push(lagged(c.values, lag));
        }
    }
    let conditioning: Vec<String> = names[1..].to_vec();

    let (values, layers, linear_weights) = match options.mode {
        ResidueMode::Distribution => {
            let table = SampleTable::new(names, cols)?;
            let config = ExtractionConfig {
                method: MethodChoice::MomentRegression,
                ..options.extraction
            };
            let (layers, out) =
                iterate_extraction(&table, "target", &conditioning, &config, options.iterations)?;
            (out.column("target")?.to_vec(), layers, Vec::new())
        }
        ResidueMode::Linear => {
            let rows = big_t - start;
            let design = DMatrix::from_fn(rows, cols.len(), |r, c| {
                if c == 0 {
                    1.0
                } else {
                    cols[c][r]
                }
            });
            let y = DVector::from_column_slice(&cols[0]);
            let w = design
                .clone()
                .svd(true, true)
                .solve(&y, 1e-12)
                .map_err(|e| Error::NumericalFailure(format!("linear residue fit: {e}")))?;
            let resid: Vec<f64> = (y - &design * &w).iter().copied().collect();
            let map = QuantileMap::fit(&resid)?;
            (map.forward_all(&resid)?, Vec::new(), w.iter().copied().collect())
        }
    };
    Ok(ResidueSeries {
        values,
        start,
        series_len: big_t,
        lag_order: p,
        source: name.to_string(),
        mode: options.mode,
        conditioning,
        layers,
        linear_weights,
    })
}
