//! Conditional-CDF extraction: `(x, y) -> (CDF_{X|Y=y}(x), y)` and its
//! inverse `(u, y) -> (CDF^{-1}_{X|Y=y}(u), y)`.
//!
//! The transformed target is close to `U[0,1]` for every value of the
//! conditioning columns, so it no longer carries information about them,
//! while the pair (transformed target, conditioning columns) still determines
//! the original target exactly. An [`ExtractionLayer`] stores only the fitted
//! conditional model; it keeps no rows.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::to_json_string;
use crate::hcr::{
    fit_joint_columns, raw_on_grid, CalibratedDensity1D, HcrBasis, JointDensityModel,
    MomentRegressionModel, RegressionOptions, DEFAULT_COEFF_CAP, DEFAULT_DEGREE, DEFAULT_FLOOR,
    DEFAULT_GRID, MIN_GRID,
};
use crate::normalization::QuantileMap;
use crate::table::SampleTable;

/// How the conditional density is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    JointSlice,
    MomentRegression,
}

/// Method selection; `Auto` uses moment regression for more than two
/// conditioning columns and joint slicing otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    #[default]
    Auto,
    JointSlice,
    MomentRegression,
}

impl MethodChoice {
    pub fn resolve(self, n_given: usize) -> Method {
        match self {
            MethodChoice::JointSlice => Method::JointSlice,
            MethodChoice::MomentRegression => Method::MomentRegression,
            MethodChoice::Auto if n_given > 2 => Method::MomentRegression,
            MethodChoice::Auto => Method::JointSlice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub method: MethodChoice,
    pub degree: usize,
    pub grid_size: usize,
    pub floor: f64,
    pub regression: RegressionOptions,
    pub coeff_cap: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            method: MethodChoice::Auto,
            degree: DEFAULT_DEGREE,
            grid_size: DEFAULT_GRID,
            floor: DEFAULT_FLOOR,
            regression: RegressionOptions::default(),
            coeff_cap: DEFAULT_COEFF_CAP,
        }
    }
}

impl ExtractionConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_size < MIN_GRID {
            return Err(Error::invalid(format!(
                "grid size {} below minimum {MIN_GRID}",
                self.grid_size
            )));
        }
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(Error::invalid(format!("floor must be positive, got {}", self.floor)));
        }
        Ok(())
    }
}

/// Fitted conditional model behind a layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ConditionalModel {
    /// Joint model over `[target, given...]`; the target is axis 0.
    JointSlice { model: JointDensityModel },
    MomentRegression { model: MomentRegressionModel },
}

impl ConditionalModel {
    pub fn method(&self) -> Method {
        match self {
            ConditionalModel::JointSlice { .. } => Method::JointSlice,
            ConditionalModel::MomentRegression { .. } => Method::MomentRegression,
        }
    }

    fn degree(&self) -> usize {
        match self {
            ConditionalModel::JointSlice { model } => model.degree(),
            ConditionalModel::MomentRegression { model } => model.degree(),
        }
    }

    fn slice_coeffs(&self, given: &[f64]) -> Result<Vec<f64>> {
        match self {
            ConditionalModel::JointSlice { model } => model.slice_coeffs(0, given),
            ConditionalModel::MomentRegression { model } => model.slice_coeffs(given),
        }
    }
}

/// One invertible extraction of `target` given `given`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionLayer {
    target: String,
    given: Vec<String>,
    grid_size: usize,
    floor: f64,
    model: ConditionalModel,
}

/// Per-call cache of basis values on the layer's grid.
struct Evaluator<'a> {
    layer: &'a ExtractionLayer,
    grid_table: Vec<f64>,
}

impl Evaluator<'_> {
    fn density(&self, given: &[f64]) -> Result<CalibratedDensity1D> {
        let c = self.layer.model.slice_coeffs(given)?;
        let g = self.layer.grid_size;
        CalibratedDensity1D::from_raw(&raw_on_grid(&c, &self.grid_table, g), self.layer.floor)
    }
}

impl ExtractionLayer {
    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn given(&self) -> &[String] {
        &self.given
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn model(&self) -> &ConditionalModel {
        &self.model
    }

    pub fn method(&self) -> Method {
        self.model.method()
    }

    fn evaluator(&self) -> Evaluator<'_> {
        Evaluator {
            layer: self,
            grid_table: HcrBasis::new(self.model.degree()).grid_table(self.grid_size),
        }
    }

    /// Calibrated conditional density of the target at the given values.
    pub fn conditional_density(&self, given: &[f64]) -> Result<CalibratedDensity1D> {
        self.check_given_len(given)?;
        self.evaluator().density(given)
    }

    pub fn forward_value(&self, x: f64, given: &[f64]) -> Result<f64> {
        check_unit(x, &self.target)?;
        Ok(self.conditional_density(given)?.cdf(x))
    }

    pub fn inverse_value(&self, u: f64, given: &[f64]) -> Result<f64> {
        check_unit(u, &self.target)?;
        Ok(self.conditional_density(given)?.inverse_cdf(u))
    }

    fn check_given_len(&self, given: &[f64]) -> Result<()> {
        if given.len() != self.given.len() {
            return Err(Error::invalid(format!(
                "layer for '{}' conditions on {} columns, got {} values",
                self.target,
                self.given.len(),
                given.len()
            )));
        }
        Ok(())
    }

    /// Replaces the target column by its conditional CDF values.
    pub fn apply(&self, table: &SampleTable) -> Result<SampleTable> {
        self.map_target(table, |d, x| d.cdf(x))
    }

    /// Recovers the target column from transformed values; the conditioning
    /// columns must hold the values they had when the layer was applied.
    pub fn invert(&self, table: &SampleTable) -> Result<SampleTable> {
        self.map_target(table, |d, u| d.inverse_cdf(u))
    }

    fn map_target<F>(&self, table: &SampleTable, f: F) -> Result<SampleTable>
    where
        F: Fn(&CalibratedDensity1D, f64) -> f64 + Sync,
    {
        let target = table.column(&self.target)?;
        let given = self
            .given
            .iter()
            .map(|g| table.column(g))
            .collect::<Result<Vec<_>>>()?;
        check_unit_column(target, &self.target)?;
        for (name, col) in self.given.iter().zip(&given) {
            check_unit_column(col, name)?;
        }
        let eval = self.evaluator();
        let out = (0..table.n_rows())
            .into_par_iter()
            .map(|row| {
                let row_given: Vec<f64> = given.iter().map(|c| c[row]).collect();
                let d = eval.density(&row_given)?;
                Ok(f(&d, target[row]))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut result = table.clone();
        result.set_column(&self.target, out)?;
        Ok(result)
    }
}

fn check_unit(v: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(format!("value {v} for '{name}' outside [0,1]")))
    }
}

fn check_unit_column(col: &[f64], name: &str) -> Result<()> {
    match col.iter().position(|v| !(0.0..=1.0).contains(v)) {
        None => Ok(()),
        Some(row) => Err(Error::invalid(format!(
            "column '{name}' row {row} value {} outside [0,1] (normalize first)",
            col[row]
        ))),
    }
}

/// Fits the conditional model of `target` given `given` on a normalized table.
pub fn fit_extraction(
    table: &SampleTable,
    target: &str,
    given: &[String],
    config: &ExtractionConfig,
) -> Result<ExtractionLayer> {
    config.validate()?;
    if given.iter().any(|g| g == target) {
        return Err(Error::invalid(format!(
            "target '{target}' also appears among conditioning columns"
        )));
    }
    for (i, g) in given.iter().enumerate() {
        if given[..i].contains(g) {
            return Err(Error::invalid(format!("conditioning column '{g}' listed twice")));
        }
    }
    let t = table.column(target)?;
    let cond = given
        .iter()
        .map(|g| table.column(g))
        .collect::<Result<Vec<_>>>()?;
    check_unit_column(t, target)?;
    for (name, col) in given.iter().zip(&cond) {
        check_unit_column(col, name)?;
    }
    let model = match config.method.resolve(given.len()) {
        Method::JointSlice => {
            let mut cols = Vec::with_capacity(given.len() + 1);
            cols.push(t);
            cols.extend(cond.iter().copied());
            ConditionalModel::JointSlice {
                model: fit_joint_columns(&cols, config.degree, config.coeff_cap)?,
            }
        }
        Method::MomentRegression => ConditionalModel::MomentRegression {
            model: MomentRegressionModel::fit(
                t,
                &cond,
                given.to_vec(),
                config.degree,
                config.regression,
            )?,
        },
    };
    Ok(ExtractionLayer {
        target: target.to_string(),
        given: given.to_vec(),
        grid_size: config.grid_size,
        floor: config.floor,
        model,
    })
}

/// Fits and applies `k` successive extractions of the same target, each on
/// the output of the previous one. Returns the layers in application order
/// together with the final table.
pub fn iterate_extraction(
    table: &SampleTable,
    target: &str,
    given: &[String],
    config: &ExtractionConfig,
    k: usize,
) -> Result<(Vec<ExtractionLayer>, SampleTable)> {
    if k == 0 {
        return Err(Error::invalid("iteration count must be at least 1"));
    }
    let mut current = table.clone();
    let mut layers = Vec::with_capacity(k);
    for it in 0..k {
        let layer = fit_extraction(&current, target, given, config)
            .map_err(|e| e.context(format!("iteration {}", it + 1)))?;
        current = layer.apply(&current)?;
        layers.push(layer);
    }
    Ok((layers, current))
}

pub fn apply_layers(layers: &[ExtractionLayer], table: &SampleTable) -> Result<SampleTable> {
    layers.iter().try_fold(table.clone(), |t, l| l.apply(&t))
}

/// Unwinds layers in reverse application order.
pub fn invert_layers(layers: &[ExtractionLayer], table: &SampleTable) -> Result<SampleTable> {
    layers.iter().rev().try_fold(table.clone(), |t, l| l.invert(&t))
}

/// Quantile maps used to bring raw columns onto `[0,1]` before extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub columns: Vec<String>,
    pub maps: Vec<QuantileMap>,
}

/// Serializable bundle of layers in application order, optionally with the
/// normalization that preceded them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub normalization: Option<NormalizationRecord>,
    pub layers: Vec<ExtractionLayer>,
    /// False when the layers were fitted in a way that cannot be unwound.
    #[serde(default = "default_true")]
    pub invertible: bool,
}

fn default_true() -> bool {
    true
}

impl LayerStack {
    pub fn new(layers: Vec<ExtractionLayer>) -> Self {
        Self {
            normalization: None,
            layers,
            invertible: true,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut stack: LayerStack =
            serde_json::from_str(s).map_err(|e| Error::Format(format!("layer stack: {e}")))?;
        if let Some(norm) = stack.normalization.take() {
            if norm.columns.len() != norm.maps.len() {
                return Err(Error::Format("layer stack: normalization columns/maps mismatch".into()));
            }
            let maps = norm
                .maps
                .into_iter()
                .map(QuantileMap::rebuild)
                .collect::<Result<Vec<_>>>()?;
            stack.normalization = Some(NormalizationRecord {
                columns: norm.columns,
                maps,
            });
        }
        Ok(stack)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::datasets::write_text(path, &self.to_json()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&crate::datasets::read_text(path)?)
    }

    pub fn apply(&self, table: &SampleTable) -> Result<SampleTable> {
        apply_layers(&self.layers, table)
    }

    pub fn invert(&self, table: &SampleTable) -> Result<SampleTable> {
        if !self.invertible {
            return Err(Error::Unsupported(
                "layer stack was fitted without reversibility and cannot be inverted".into(),
            ));
        }
        invert_layers(&self.layers, table)
    }
}
