//! Decoupling: chains of extractions that turn `(X_1..X_n)` into components
//! that are pairwise (nearly) independent yet jointly carry the same
//! information, since the chain can be unwound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{
    apply_layers, fit_extraction, invert_layers, ExtractionConfig, ExtractionLayer, LayerStack,
};
use crate::infoflow::{mutual_information_binned, DEFAULT_BINS};
use crate::stats::spearman;
use crate::table::SampleTable;

pub const DEFAULT_SWEEPS: usize = 2;

/// What each extraction within a sweep conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditioningMode {
    /// The other columns in their current, partially transformed state.
    /// Invertible.
    #[default]
    Current,
    /// Experimental: every column of a sweep conditions on the table as it
    /// was when the sweep started. Not invertible.
    SweepStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupleConfig {
    pub extraction: ExtractionConfig,
    pub sweeps: usize,
    /// Processing order; `None` means column order of the table.
    pub order: Option<Vec<String>>,
    pub conditioning: ConditioningMode,
    /// Bins for the per-sweep dependence history.
    pub bins: usize,
}

impl Default for DecoupleConfig {
    fn default() -> Self {
        Self {
            extraction: ExtractionConfig::default(),
            sweeps: DEFAULT_SWEEPS,
            order: None,
            conditioning: ConditioningMode::Current,
            bins: DEFAULT_BINS,
        }
    }
}

/// Summary of pairwise dependence after a sweep (sweep 0 is the input).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSnapshot {
    pub sweep: usize,
    pub max_abs_spearman: f64,
    pub max_mi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledDataset {
    pub layers: Vec<ExtractionLayer>,
    pub result: SampleTable,
    pub order_used: Vec<String>,
    pub sweeps: usize,
    pub history: Vec<SweepSnapshot>,
    pub invertible: bool,
}

impl DecoupledDataset {
    pub fn layer_stack(&self) -> LayerStack {
        LayerStack {
            normalization: None,
            layers: self.layers.clone(),
            invertible: self.invertible,
        }
    }

    /// Full report: pairwise dependence of the result, dependence of each
    /// decoupled column on every other original column, and the history.
    pub fn report(&self, original: &SampleTable, bins: usize) -> Result<DependenceReport> {
        let mut report = dependence_report(&self.result, bins)?;
        report.history = self.history.clone();
        report.invertible = self.invertible;
        report.cross_mi = Some(cross_dependence(&self.result, original, bins)?);
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossDependence {
    /// Entry `[i][j]`: MI between decoupled column `i` and original column
    /// `j`; the diagonal is left at 0.
    pub mi: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub columns: Vec<String>,
    pub bins: usize,
    /// `|Spearman|`, symmetric, zero diagonal.
    pub spearman: Vec<Vec<f64>>,
    /// Binned MI in nats, symmetric, zero diagonal.
    pub mi: Vec<Vec<f64>>,
    pub cross_mi: Option<CrossDependence>,
    pub history: Vec<SweepSnapshot>,
    pub invertible: bool,
}

impl DependenceReport {
    pub fn max_abs_spearman(&self) -> f64 {
        max_off_diagonal(&self.spearman)
    }

    pub fn max_mi(&self) -> f64 {
        max_off_diagonal(&self.mi)
    }
}

fn max_off_diagonal(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max)
}

/// Pairwise `|Spearman|` and binned MI over all column pairs.
pub fn dependence_report(table: &SampleTable, bins: usize) -> Result<DependenceReport> {
    let n = table.n_cols();
    if n < 2 {
        return Err(Error::invalid("dependence report needs at least 2 columns"));
    }
    if bins < 4 {
        return Err(Error::invalid(format!("dependence report needs at least 4 bins, got {bins}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (table.column_at(i), table.column_at(j));
            let mi = mutual_information_binned(a, b, bins)?.value;
            Ok((spearman(a, b).abs(), mi))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sp = vec![vec![0.0; n]; n];
    let mut mi = vec![vec![0.0; n]; n];
    for (&(i, j), &(s, m)) in pairs.iter().zip(&values) {
        sp[i][j] = s;
        sp[j][i] = s;
        mi[i][j] = m;
        mi[j][i] = m;
    }
    Ok(DependenceReport {
        columns: table.names().to_vec(),
        bins,
        spearman: sp,
        mi,
        cross_mi: None,
        history: Vec::new(),
        invertible: true,
    })
}

/// MI of each decoupled column with every other original column.
pub fn cross_dependence(
    decoupled: &SampleTable,
    original: &SampleTable,
    bins: usize,
) -> Result<CrossDependence> {
    let names = decoupled.names();
    let mut mi = vec![vec![0.0; names.len()]; names.len()];
    for (i, a) in names.iter().enumerate() {
        for (j, b) in names.iter().enumerate() {
            if i != j {
                mi[i][j] =
                    mutual_information_binned(decoupled.column(a)?, original.column(b)?, bins)?
                        .value;
            }
        }
    }
    Ok(CrossDependence { mi })
}

fn snapshot(table: &SampleTable, sweep: usize, bins: usize) -> Result<SweepSnapshot> {
    let r = dependence_report(table, bins)?;
    Ok(SweepSnapshot {
        sweep,
        max_abs_spearman: r.max_abs_spearman(),
        max_mi: r.max_mi(),
    })
}

fn resolve_order(table: &SampleTable, order: &Option<Vec<String>>) -> Result<Vec<String>> {
    match order {
        None => Ok(table.names().to_vec()),
        Some(o) => {
            let mut sorted = o.clone();
            sorted.sort();
            let mut names = table.names().to_vec();
            names.sort();
            if sorted != names {
                return Err(Error::invalid(format!(
                    "order {o:?} is not a permutation of the table columns"
                )));
            }
            Ok(o.clone())
        }
    }
}

/// Runs `sweeps` passes; in each, every column (in order) is extracted
/// against all other columns.
pub fn decouple(table: &SampleTable, config: &DecoupleConfig) -> Result<DecoupledDataset> {
    if table.n_cols() < 2 {
        return Err(Error::invalid("decoupling needs at least 2 columns"));
    }
    if config.sweeps == 0 {
        return Err(Error::invalid("decoupling needs at least one sweep"));
    }
    table.ensure_unit_interval()?;
    let order = resolve_order(table, &config.order)?;
    let mut current = table.clone();
    let mut layers = Vec::with_capacity(config.sweeps * order.len());
    let mut history = vec![snapshot(&current, 0, config.bins)?];
    for sweep in 1..=config.sweeps {
        match config.conditioning {
            ConditioningMode::Current => {
                for col in &order {
                    let given: Vec<String> = order.iter().filter(|c| *c != col).cloned().collect();
                    let layer = fit_extraction(&current, col, &given, &config.extraction)
                        .map_err(|e| e.context(format!("sweep {sweep}, column '{col}'")))?;
                    current = layer.apply(&current)?;
                    layers.push(layer);
                }
            }
            ConditioningMode::SweepStart => {
                let step = symmetric_extract(&current, &config.extraction)
                    .map_err(|e| e.context(format!("sweep {sweep}")))?;
                current = step.result;
                layers.extend(step.layers);
            }
        }
        history.push(snapshot(&current, sweep, config.bins)?);
    }
    Ok(DecoupledDataset {
        layers,
        result: current,
        order_used: order,
        sweeps: config.sweeps,
        history,
        invertible: config.conditioning == ConditioningMode::Current,
    })
}

/// Unwinds the layer stack back to the normalized input table.
pub fn reconstruct(decoupled: &DecoupledDataset) -> Result<SampleTable> {
    if !decoupled.invertible {
        return Err(Error::Unsupported(
            "dataset was decoupled with sweep-start conditioning, which is not invertible".into(),
        ));
    }
    invert_layers(&decoupled.layers, &decoupled.result)
}

/// Replays the stored layers on a table.
pub fn replay(decoupled: &DecoupledDataset, table: &SampleTable) -> Result<SampleTable> {
    apply_layers(&decoupled.layers, table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricExtraction {
    pub result: SampleTable,
    /// One layer per column, each fitted on the untouched input.
    pub layers: Vec<ExtractionLayer>,
}

impl SymmetricExtraction {
    pub fn invertible(&self) -> bool {
        false
    }
}

/// Extracts every column against all other original columns at once. The
/// output does not depend on column order and cannot be inverted.
pub fn symmetric_extract(
    table: &SampleTable,
    config: &ExtractionConfig,
) -> Result<SymmetricExtraction> {
    if table.n_cols() < 2 {
        return Err(Error::invalid("symmetric extraction needs at least 2 columns"));
    }
    table.ensure_unit_interval()?;
    let names = table.names().to_vec();
    let fitted = names
        .par_iter()
        .map(|col| {
            // sorted so the fit does not depend on column order
            let mut given: Vec<String> = names.iter().filter(|c| *c != col).cloned().collect();
            given.sort();
            let layer = fit_extraction(table, col, &given, config)
                .map_err(|e| e.context(format!("column '{col}'")))?;
            let out = layer.apply(table)?;
            Ok((layer, out.column(col)?.to_vec()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (layers, cols): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
    Ok(SymmetricExtraction {
        result: SampleTable::new(names, cols)?,
        layers,
    })
}
