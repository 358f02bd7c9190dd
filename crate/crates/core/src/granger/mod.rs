//! Multi-feature Granger analysis: residues with their own past removed,
//! delay-indexed dependence on a source series, HCR coefficient fields over
//! the delay, their PCA reduction and Fourier spectra.
//!
//! All series are expected on `[0,1]` (quantile-normalized); time runs down
//! the rows of a [`SampleTable`](crate::SampleTable).

mod pca;
mod profile;
mod residue;
mod spectrum;

pub use pca::{mixed_block, pca_reduce, DelayFeatureDecomposition, PcaTarget};
pub use profile::{
    delay_coefficients, delay_profile, DelayCoefficientField, DelayProfile, MIN_OVERLAP,
};
pub use residue::{fit_residues, LagCovariate, ResidueMode, ResidueOptions, ResidueSeries};
pub use spectrum::{delay_spectrum, spectrum, SpectrumPoint};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoupling::{decouple, DecoupleConfig};
use crate::error::{Error, Result};
use crate::hcr::DEFAULT_DEGREE;
use crate::infoflow::DEFAULT_BINS;
use crate::normalization::normalize_table;
use crate::table::SampleTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerConfig {
    pub residue: ResidueOptions,
    pub max_delay: usize,
    /// Degree of the per-delay coefficient fields.
    pub degree: usize,
    pub bins: usize,
    pub pca: PcaTarget,
    pub center_pca: bool,
    /// Decouple the panel contemporaneously first, and condition each
    /// target's residue on lags `1..=max_delay` of every series other than
    /// the source.
    pub decouple_first: bool,
    pub decouple: DecoupleConfig,
}

impl Default for GrangerConfig {
    fn default() -> Self {
        Self {
            residue: ResidueOptions::default(),
            max_delay: 10,
            degree: DEFAULT_DEGREE,
            bins: DEFAULT_BINS,
            pca: PcaTarget::default(),
            center_pca: false,
            decouple_first: true,
            decouple: DecoupleConfig::default(),
        }
    }
}

/// Everything computed for one ordered `(source, target)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub source: String,
    pub target: String,
    pub peak_abs_correlation: f64,
    pub profile: DelayProfile,
    pub field: DelayCoefficientField,
    pub decomposition: DelayFeatureDecomposition,
    pub spectrum: Vec<SpectrumPoint>,
}

/// Pairs ranked by peak `|correlation|`, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerReport {
    pub decoupled: bool,
    pub pairs: Vec<PairAnalysis>,
}

impl GrangerReport {
    pub fn pair(&self, source: &str, target: &str) -> Option<&PairAnalysis> {
        self.pairs
            .iter()
            .find(|p| p.source == source && p.target == target)
    }
}

/// Full analysis of one ordered pair on an already normalized panel.
pub fn analyze_pair(
    panel: &SampleTable,
    source: &str,
    target: &str,
    config: &GrangerConfig,
) -> Result<PairAnalysis> {
    if source == target {
        return Err(Error::invalid(format!("source and target are both '{source}'")));
    }
    let y = panel.column(source)?;
    let x = panel.column(target)?;
    let covariates: Vec<LagCovariate<'_>> = if config.decouple_first {
        panel
            .names()
            .iter()
            .filter(|n| *n != source && *n != target)
            .map(|n| {
                Ok(LagCovariate {
                    name: n,
                    values: panel.column(n)?,
                    max_lag: config.max_delay,
                })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let residues = fit_residues(target, x, &config.residue, &covariates)?;
    let profile = delay_profile(&residues, y, config.max_delay, config.bins)?;
    let field = delay_coefficients(&residues, y, config.max_delay, config.degree)?;
    let decomposition = pca_reduce(&field, config.pca, config.center_pca)?;
    let spectrum = delay_spectrum(&profile)?;
    Ok(PairAnalysis {
        source: source.to_string(),
        target: target.to_string(),
        peak_abs_correlation: profile.peak_abs_correlation(),
        profile,
        field,
        decomposition,
        spectrum,
    })
}

/// Normalizes the panel, optionally decouples it, and analyzes every ordered
/// pair of series.
pub fn multivariate_granger(panel: &SampleTable, config: &GrangerConfig) -> Result<GrangerReport> {
    if panel.n_cols() < 2 {
        return Err(Error::invalid("Granger analysis needs at least 2 series"));
    }
    let (mut data, _) = normalize_table(panel)?;
    if config.decouple_first {
        data = decouple(&data, &config.decouple)
            .map_err(|e| e.context("panel decoupling"))?
            .result;
    }
    let names = data.names().to_vec();
    let pairs: Vec<(String, String)> = names
        .iter()
        .flat_map(|s| {
            names
                .iter()
                .filter(move |t| *t != s)
                .map(move |t| (s.clone(), t.clone()))
        })
        .collect();
    let mut results = pairs
        .par_iter()
        .map(|(s, t)| {
            analyze_pair(&data, s, t, config).map_err(|e| e.context(format!("pair {s} -> {t}")))
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| {
        b.peak_abs_correlation
            .total_cmp(&a.peak_abs_correlation)
            .then_with(|| a.source.cmp(&b.source))
            .then_with(|| a.target.cmp(&b.target))
    });
    Ok(GrangerReport {
        decoupled: config.decouple_first,
        pairs: results,
    })
}

#[cfg(test)]
mod tests;
