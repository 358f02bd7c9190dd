//! Mutual information estimators and direct mutual information.
//!
//! Direct mutual information of `X` and `Y` given candidate intermediates `Z`
//! is the mutual information between `X` and `Y` after each has had the
//! information contained in `Z` extracted. All values are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{fit_extraction, ExtractionConfig};
use crate::hcr::{fit_joint_columns, HcrBasis, JointDensityModel, DEFAULT_COEFF_CAP, DEFAULT_FLOOR};
use crate::table::SampleTable;

pub const DEFAULT_BINS: usize = 16;
/// Bins per axis for the conditional reference, which histograms up to four
/// variables jointly and needs coarser cells than pairwise estimates.
pub const DEFAULT_REFERENCE_BINS: usize = 8;
/// Cells per axis of the grid used by the HCR plug-in estimator.
pub const HCR_PLUGIN_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiMethod {
    Binned,
    HcrQuadratic,
    HcrPlugin,
    ConditionalReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Nats, clamped at 0.
    pub value: f64,
    pub method: MiMethod,
    pub bins: Option<usize>,
    pub degree: Option<usize>,
    pub n: usize,
}

fn bin_of(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

fn check_unit(col: &[f64], what: &str) -> Result<()> {
    match col.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        None => Ok(()),
        Some(v) => Err(Error::invalid(format!("{what} value {v} outside [0,1]"))),
    }
}

/// Cell ids of the joint binning of several `[0,1]` columns.
fn joint_cells(cols: &[&[f64]], bins: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|row| cols.iter().fold(0, |acc, c| acc * bins + bin_of(c[row], bins)))
        .collect()
}

/// Plug-in MI from paired cell ids with Miller–Madow correction.
fn mi_from_cells(a: &[usize], b: &[usize], a_cells: usize, b_cells: usize) -> f64 {
    use std::collections::HashMap;
    let n = a.len();
    let mut ca = vec![0usize; a_cells];
    let mut cb = vec![0usize; b_cells];
    let mut cab: HashMap<(usize, usize), usize> = HashMap::new();
    for (&i, &j) in a.iter().zip(b) {
        ca[i] += 1;
        cb[j] += 1;
        *cab.entry((i, j)).or_default() += 1;
    }
    let nf = n as f64;
    let mut terms: Vec<f64> = cab
        .iter()
        .map(|(&(i, j), &c)| {
            let c = c as f64;
            c * (c * nf / (ca[i] as f64 * cb[j] as f64)).ln()
        })
        .collect();
    // summation order must not depend on which argument came first
    terms.sort_by(f64::total_cmp);
    let plugin = terms.iter().sum::<f64>() / nf;
    let ka = ca.iter().filter(|&&c| c > 0).count() as f64;
    let kb = cb.iter().filter(|&&c| c > 0).count() as f64;
    let kab = cab.len() as f64;
    plugin - (kab - ka - kb + 1.0) / (2.0 * nf)
}

/// Histogram estimate on a `bins x bins` grid over `[0,1]^2`, natural log,
/// Miller–Madow corrected, clamped at 0.
pub fn mutual_information_binned(u: &[f64], v: &[f64], bins: usize) -> Result<MiEstimate> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "columns differ in length ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::invalid("mutual information of empty columns"));
    }
    if bins < 2 {
        return Err(Error::invalid(format!("need at least 2 bins, got {bins}")));
    }
    check_unit(u, "first column")?;
    check_unit(v, "second column")?;
    let n = u.len();
    let a: Vec<usize> = u.iter().map(|&x| bin_of(x, bins)).collect();
    let b: Vec<usize> = v.iter().map(|&x| bin_of(x, bins)).collect();
    Ok(MiEstimate {
        value: mi_from_cells(&a, &b, bins, bins).max(0.0),
        method: MiMethod::Binned,
        bins: Some(bins),
        degree: None,
        n,
    })
}

/// Both HCR-based estimates from one fitted bivariate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcrMi {
    /// Grid plug-in of the calibrated density; the primary value.
    pub plugin: MiEstimate,
    /// `1/2 sum_{j,k>=1} a_jk^2`, the second-order expansion around independence.
    pub quadratic: MiEstimate,
}

pub fn mutual_information_hcr(u: &[f64], v: &[f64], degree: usize) -> Result<HcrMi> {
    if u.len() != v.len() {
        return Err(Error::invalid("columns differ in length"));
    }
    check_unit(u, "first column")?;
    check_unit(v, "second column")?;
    let model = fit_joint_columns(&[u, v], degree, DEFAULT_COEFF_CAP)?;
    let mut out = hcr_mi_of_model(&model)?;
    out.plugin.n = u.len();
    out.quadratic.n = u.len();
    Ok(out)
}

/// HCR MI values of an explicit bivariate model (`n` is reported as 0).
pub fn hcr_mi_of_model(model: &JointDensityModel) -> Result<HcrMi> {
    if model.dims() != 2 {
        return Err(Error::invalid("HCR mutual information needs a bivariate model"));
    }
    let m = model.degree();
    let base = m + 1;
    let quad = 0.5
        * (1..base)
            .flat_map(|j| (1..base).map(move |k| (j, k)))
            .map(|(j, k)| model.coeffs()[j * base + k].powi(2))
            .sum::<f64>();

    let g = HCR_PLUGIN_GRID;
    let basis = HcrBasis::new(m);
    let fvals: Vec<Vec<f64>> = (0..g)
        .map(|i| basis.eval_all((i as f64 + 0.5) / g as f64))
        .collect();
    let mut rho = vec![0.0; g * g];
    for i in 0..g {
        for j in 0..g {
            let mut r = 0.0;
            for a in 0..base {
                for b in 0..base {
                    r += model.coeffs()[a * base + b] * fvals[i][a] * fvals[j][b];
                }
            }
            rho[i * g + j] = r.max(DEFAULT_FLOOR);
        }
    }
    let total: f64 = rho.iter().sum();
    let p: Vec<f64> = rho.iter().map(|r| r / total).collect();
    let px: Vec<f64> = (0..g).map(|i| p[i * g..(i + 1) * g].iter().sum()).collect();
    let py: Vec<f64> = (0..g).map(|j| (0..g).map(|i| p[i * g + j]).sum()).collect();
    let mut plugin = 0.0;
    for i in 0..g {
        for j in 0..g {
            let pij = p[i * g + j];
            plugin += pij * (pij / (px[i] * py[j])).ln();
        }
    }
    let est = |value: f64, method| MiEstimate {
        value: value.max(0.0),
        method,
        bins: None,
        degree: Some(m),
        n: 0,
    };
    Ok(HcrMi {
        plugin: est(plugin, MiMethod::HcrPlugin),
        quadratic: est(quad, MiMethod::HcrQuadratic),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectMiConfig {
    pub extraction: ExtractionConfig,
    pub bins: usize,
}

impl Default for DirectMiConfig {
    fn default() -> Self {
        Self {
            extraction: ExtractionConfig::default(),
            bins: DEFAULT_BINS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectMi {
    pub x: String,
    pub y: String,
    pub z: Vec<String>,
    /// Plain `I(X;Y)` on the input table.
    pub mutual_information: MiEstimate,
    /// `I(X|Z extracted ; Y|Z extracted)`.
    pub direct: MiEstimate,
}

/// Extracts `X|Z` and `Y|Z` (each conditioned on `Z` only) from a normalized
/// table and measures their binned mutual information.
pub fn direct_mutual_information(
    table: &SampleTable,
    x: &str,
    y: &str,
    z: &[String],
    config: &DirectMiConfig,
) -> Result<DirectMi> {
    if x == y {
        return Err(Error::invalid("x and y must be different columns"));
    }
    if z.iter().any(|c| c == x || c == y) {
        return Err(Error::invalid("x and y must not appear among the z columns"));
    }
    let xs = table.column(x)?;
    let ys = table.column(y)?;
    let raw = mutual_information_binned(xs, ys, config.bins)?;
    let lx = fit_extraction(table, x, z, &config.extraction).map_err(|e| e.context(x))?;
    let ly = fit_extraction(table, y, z, &config.extraction).map_err(|e| e.context(y))?;
    let xt = lx.apply(table)?;
    let yt = ly.apply(table)?;
    let direct = mutual_information_binned(xt.column(x)?, yt.column(y)?, config.bins)?;
    Ok(DirectMi {
        x: x.to_string(),
        y: y.to_string(),
        z: z.to_vec(),
        mutual_information: raw,
        direct,
    })
}

/// Binned `I(X;Y,Z) - I(X;Z)` for at most two conditioning columns.
pub fn conditional_mi_reference(
    table: &SampleTable,
    x: &str,
    y: &str,
    z: &[String],
    bins: usize,
) -> Result<MiEstimate> {
    if z.len() > 2 {
        return Err(Error::Unsupported(format!(
            "binned conditional MI reference supports at most 2 conditioning columns, got {}",
            z.len()
        )));
    }
    if bins < 2 {
        return Err(Error::invalid(format!("need at least 2 bins, got {bins}")));
    }
    let xs = table.column(x)?;
    let ys = table.column(y)?;
    let zs = z
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<Vec<_>>>()?;
    check_unit(xs, x)?;
    check_unit(ys, y)?;
    for (name, c) in z.iter().zip(&zs) {
        check_unit(c, name)?;
    }
    let n = table.n_rows();
    let xa = joint_cells(&[xs], bins, n);
    let mut yz_cols = vec![ys];
    yz_cols.extend(zs.iter().copied());
    let yz = joint_cells(&yz_cols, bins, n);
    let with_y = mi_from_cells(&xa, &yz, bins, bins.pow(yz_cols.len() as u32));
    let without_y = if zs.is_empty() {
        0.0
    } else {
        let zc = joint_cells(&zs, bins, n);
        mi_from_cells(&xa, &zc, bins, bins.pow(zs.len() as u32))
    };
    Ok(MiEstimate {
        value: (with_y - without_y).max(0.0),
        method: MiMethod::ConditionalReference,
        bins: Some(bins),
        degree: None,
        n,
    })
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate, GeneratorSpec};
    use crate::normalization::normalize_table;
    use proptest::prelude::*;

    fn copula(rho: f64, n: usize, seed: u64) -> SampleTable {
        let raw = generate(&GeneratorSpec::GaussianCopula {
            rho,
            n,
            dims: 2,
            seed,
        })
        .unwrap();
        normalize_table(&raw).unwrap().0
    }

    fn gaussian_mi(rho: f64) -> f64 {
        -0.5 * (1.0 - rho * rho).ln()
    }

    fn chain(n: usize, seed: u64) -> SampleTable {
        let raw = generate(&GeneratorSpec::MarkovChain {
            n,
            alpha: 1.0,
            beta: 1.0,
            noise_z: 1.0,
            noise_y: 1.0,
            seed,
        })
        .unwrap();
        normalize_table(&raw).unwrap().0
    }

    #[test]
    fn identical_columns() {
        let t = copula(0.0, 10_000, 1);
        let x = t.column("x").unwrap();
        let mi = mutual_information_binned(x, x, 16).unwrap();
        assert!((mi.value - 16f64.ln()).abs() <= 0.1);
    }

    #[test]
    fn independent_columns() {
        let t = copula(0.0, 10_000, 2);
        let mi = mutual_information_binned(t.column("x").unwrap(), t.column("y").unwrap(), 16)
            .unwrap();
        assert!(mi.value <= 0.02, "{}", mi.value);
    }

    #[test]
    fn copula_matches_analytic() {
        let t = copula(0.7, 10_000, 3);
        let mi = mutual_information_binned(t.column("x").unwrap(), t.column("y").unwrap(), 16)
            .unwrap();
        assert!((mi.value - gaussian_mi(0.7)).abs() <= 0.08, "{}", mi.value);
    }

    #[test]
    fn binned_errors() {
        assert!(mutual_information_binned(&[0.1, 0.2], &[0.1], 4).is_err());
        assert!(mutual_information_binned(&[0.1], &[0.1], 1).is_err());
        assert!(mutual_information_binned(&[1.1], &[0.1], 4).is_err());
    }

    #[test]
    fn hcr_trivial_models() {
        let indep = JointDensityModel::independent(2, 4).unwrap();
        let mi = hcr_mi_of_model(&indep).unwrap();
        assert_eq!(mi.plugin.value, 0.0);
        assert_eq!(mi.quadratic.value, 0.0);
        let mut c = vec![0.0; 4];
        c[3] = 0.2;
        let single = JointDensityModel::from_coeffs(2, 1, c).unwrap();
        let mi = hcr_mi_of_model(&single).unwrap();
        assert!((mi.quadratic.value - 0.02).abs() < 1e-15);
    }

    #[test]
    fn hcr_plugin_on_copula() {
        let t = copula(0.5, 100_000, 4);
        let mi = mutual_information_hcr(t.column("x").unwrap(), t.column("y").unwrap(), 4).unwrap();
        assert!((mi.plugin.value - gaussian_mi(0.5)).abs() <= 0.05, "{:?}", mi);
        assert_eq!(mi.plugin.n, 100_000);
    }

    #[test]
    fn direct_mi_with_empty_z_matches_plain() {
        let t = copula(0.6, 10_000, 5);
        let d = direct_mutual_information(&t, "x", "y", &[], &Default::default()).unwrap();
        assert!((d.direct.value - d.mutual_information.value).abs() <= 0.02);
    }

    #[test]
    fn markov_chain_direct_mi_vanishes() {
        let t = chain(10_000, 6);
        let z = vec!["z".to_string()];
        let d = direct_mutual_information(&t, "x", "y", &z, &Default::default()).unwrap();
        assert!(d.mutual_information.value >= 0.1);
        assert!(d.direct.value <= 0.02, "I_d = {}", d.direct.value);
        let r = conditional_mi_reference(&t, "x", "y", &z, 8).unwrap();
        assert!(r.value <= 0.05, "reference {}", r.value);
    }

    #[test]
    fn collider_keeps_direct_mi() {
        // X and Y independent, Z = X + Y: conditioning on Z couples them
        let raw = generate(&GeneratorSpec::Independent {
            n: 10_000,
            dims: 2,
            seed: 7,
        })
        .unwrap();
        let x = raw.column("x").unwrap().to_vec();
        let y = raw.column("y").unwrap().to_vec();
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let t = normalize_table(&SampleTable::from_pairs(vec![("x", x), ("y", y), ("z", z)]).unwrap())
            .unwrap()
            .0;
        let d = direct_mutual_information(&t, "x", "y", &["z".to_string()], &Default::default())
            .unwrap();
        assert!(d.direct.value > 0.05, "I_d = {}", d.direct.value);
        assert!(d.mutual_information.value < 0.02);
    }

    #[test]
    fn reference_reduces_to_plain_mi() {
        let t = copula(0.5, 5_000, 8);
        let r = conditional_mi_reference(&t, "x", "y", &[], 16).unwrap();
        let p = mutual_information_binned(t.column("x").unwrap(), t.column("y").unwrap(), 16).unwrap();
        assert!((r.value - p.value).abs() < 1e-12);
    }

    #[test]
    fn reference_on_independent_triple() {
        let raw = generate(&GeneratorSpec::Independent {
            n: 10_000,
            dims: 3,
            seed: 9,
        })
        .unwrap();
        let t = normalize_table(&raw).unwrap().0;
        let z = vec!["z".to_string()];
        let r = conditional_mi_reference(&t, "x", "y", &z, 8).unwrap();
        let d = direct_mutual_information(&t, "x", "y", &z, &Default::default()).unwrap();
        assert!(r.value <= 0.03 && d.direct.value <= 0.03, "{} {}", r.value, d.direct.value);
    }

    #[test]
    fn reference_rejects_wide_z() {
        let raw = generate(&GeneratorSpec::Independent {
            n: 100,
            dims: 5,
            seed: 0,
        })
        .unwrap();
        let t = normalize_table(&raw).unwrap().0;
        let z: Vec<String> = ["x3", "x4", "x5"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            conditional_mi_reference(&t, "x1", "x2", &z, 4),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn monotone_reparameterization_invariance() {
        let raw = generate(&GeneratorSpec::MarkovChain {
            n: 10_000,
            alpha: 1.0,
            beta: 1.0,
            noise_z: 1.0,
            noise_y: 1.0,
            seed: 10,
        })
        .unwrap();
        let base = normalize_table(&raw).unwrap().0;
        let (names, mut cols) = raw.clone().into_parts();
        cols[0] = cols[0].iter().map(|v| v.exp()).collect();
        cols[1] = cols[1].iter().map(|v| v * v * v + 2.0).collect();
        let warped = normalize_table(&SampleTable::new(names, cols).unwrap()).unwrap().0;
        let z = vec!["z".to_string()];
        let a = direct_mutual_information(&base, "x", "y", &z, &Default::default()).unwrap();
        let b = direct_mutual_information(&warped, "x", "y", &z, &Default::default()).unwrap();
        assert!((a.direct.value - b.direct.value).abs() <= 0.02);
    }

    #[test]
    fn quadratic_and_plugin_agree_for_weak_dependence() {
        let mut c = vec![0.0; 25];
        c[5 + 1] = 0.1;
        c[2 * 5 + 2] = -0.08;
        c[5 + 3] = 0.05;
        let m = JointDensityModel::from_coeffs(2, 4, c).unwrap();
        let mi = hcr_mi_of_model(&m).unwrap();
        let rel = (mi.plugin.value - mi.quadratic.value).abs() / mi.quadratic.value;
        assert!(rel <= 0.2, "{mi:?}");
    }

    proptest! {
        #[test]
        fn binned_mi_is_symmetric(pairs in prop::collection::vec((0f64..=1.0, 0f64..=1.0), 1..300), bins in 2usize..20) {
            let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let a = mutual_information_binned(&u, &v, bins).unwrap();
            let b = mutual_information_binned(&v, &u, bins).unwrap();
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
            prop_assert!(a.value >= 0.0 && a.value.is_finite());
        }
    }
}
