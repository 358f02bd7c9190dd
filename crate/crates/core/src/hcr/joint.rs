use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::HcrBasis;
use super::calibrated::{CalibratedDensity1D, MIN_GRID};
use crate::error::{Error, Result};
use crate::stats::CompensatedSum;
use crate::table::SampleTable;

/// Default cap on the number of tensor entries `(m+1)^d`.
pub const DEFAULT_COEFF_CAP: usize = 10_000_000;

/// Rows per reduction chunk. Fixed so that results do not depend on the
/// number of worker threads.
const CHUNK_ROWS: usize = 4096;

/// Joint density `rho(x) = sum_i a_i prod_k f_{i_k}(x_k)` on `[0,1]^d`.
///
/// Coefficients are stored flat in lexicographic multi-index order, first
/// axis most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDensityModel {
    dims: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl JointDensityModel {
    /// Builds a model from explicit coefficients. The constant coefficient is
    /// forced to exactly 1.
    pub fn from_coeffs(dims: usize, degree: usize, mut coeffs: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::invalid("joint model needs at least one dimension"));
        }
        let expected = tensor_len(dims, degree, usize::MAX)?;
        if coeffs.len() != expected {
            return Err(Error::invalid(format!(
                "expected {expected} coefficients for d={dims}, m={degree}, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite coefficient"));
        }
        coeffs[0] = 1.0;
        Ok(Self {
            dims,
            degree,
            coeffs,
        })
    }

    pub fn independent(dims: usize, degree: usize) -> Result<Self> {
        let len = tensor_len(dims, degree, usize::MAX)?;
        Self::from_coeffs(dims, degree, vec![0.0; len])
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> HcrBasis {
        HcrBasis::new(self.degree)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Flat position of a multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.dims {
            return Err(Error::invalid(format!(
                "multi-index has {} entries, model has {} dims",
                multi.len(),
                self.dims
            )));
        }
        let base = self.degree + 1;
        multi.iter().try_fold(0usize, |acc, &i| {
            if i > self.degree {
                Err(Error::invalid(format!("index {i} exceeds degree {}", self.degree)))
            } else {
                Ok(acc * base + i)
            }
        })
    }

    pub fn coeff(&self, multi: &[usize]) -> Result<f64> {
        Ok(self.coeffs[self.flat_index(multi)?])
    }

    /// `sum a * prod f` at a point. May be negative.
    pub fn eval_raw(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dims {
            return Err(Error::invalid(format!(
                "point has {} coordinates, model has {} dims",
                point.len(),
                self.dims
            )));
        }
        if let Some(v) = point.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("coordinate {v} outside [0,1]")));
        }
        let basis = self.basis();
        let base = basis.len();
        let mut values = self.coeffs.clone();
        let mut fv = vec![0.0; base];
        // contract the fastest-varying (last) axis first
        for &x in point.iter().rev() {
            basis.eval_all_into(x, &mut fv);
            values = values
                .chunks_exact(base)
                .map(|blk| blk.iter().zip(&fv).map(|(a, f)| a * f).sum())
                .collect();
        }
        Ok(values[0])
    }

    /// Contracts every axis except `target_axis` against the basis values of
    /// `given` (one value per remaining axis, in axis order), leaving the
    /// `m + 1` coefficients of the 1-D slice along the target axis.
    pub fn slice_coeffs(&self, target_axis: usize, given: &[f64]) -> Result<Vec<f64>> {
        if target_axis >= self.dims {
            return Err(Error::invalid(format!(
                "target axis {target_axis} out of range for {} dims",
                self.dims
            )));
        }
        if given.len() + 1 != self.dims {
            return Err(Error::invalid(format!(
                "slice needs {} conditioning values, got {}",
                self.dims - 1,
                given.len()
            )));
        }
        if let Some(v) = given.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("conditioning value {v} outside [0,1]")));
        }
        let basis = self.basis();
        let base = basis.len();
        let given_basis: Vec<Vec<f64>> = given.iter().map(|&g| basis.eval_all(g)).collect();
        let mut out = vec![0.0; base];
        let mut multi = vec![0usize; self.dims];
        for &a in &self.coeffs {
            if a != 0.0 {
                let mut w = a;
                let mut gi = 0;
                for (axis, &i) in multi.iter().enumerate() {
                    if axis != target_axis {
                        w *= given_basis[gi][i];
                        gi += 1;
                    }
                }
                out[multi[target_axis]] += w;
            }
            // advance lexicographic counter
            for digit in multi.iter_mut().rev() {
                *digit += 1;
                if *digit < base {
                    break;
                }
                *digit = 0;
            }
        }
        Ok(out)
    }

    /// Calibrated conditional density along `target_axis` given the other
    /// coordinates, evaluated on `grid_size` uniform points.
    pub fn conditional_slice(
        &self,
        target_axis: usize,
        given: &[f64],
        grid_size: usize,
        floor: f64,
    ) -> Result<CalibratedDensity1D> {
        if grid_size < MIN_GRID {
            return Err(Error::invalid(format!(
                "grid size {grid_size} below minimum {MIN_GRID}"
            )));
        }
        let c = self.slice_coeffs(target_axis, given)?;
        let table = self.basis().grid_table(grid_size);
        CalibratedDensity1D::from_raw(&raw_on_grid(&c, &table, grid_size), floor)
    }
}

/// `sum_j c_j f_j(x_k)` for every grid point, given a precomputed grid table.
pub(crate) fn raw_on_grid(c: &[f64], grid_table: &[f64], g: usize) -> Vec<f64> {
    let mut raw = vec![0.0; g];
    for (j, &cj) in c.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        for (r, &f) in raw.iter_mut().zip(&grid_table[j * g..(j + 1) * g]) {
            *r += cj * f;
        }
    }
    raw
}

/// `(m+1)^d` with overflow and cap checks.
pub fn tensor_len(dims: usize, degree: usize, cap: usize) -> Result<usize> {
    let requested = ((degree + 1) as u128).checked_pow(dims as u32).unwrap_or(u128::MAX);
    if requested > cap as u128 {
        return Err(Error::CapacityExceeded {
            what: format!("coefficient tensor for d={dims}, m={degree}"),
            requested,
            cap,
        });
    }
    Ok(requested as usize)
}

/// Coefficients as sample means of basis products over the rows of a table
/// whose entries lie in `[0,1]`.
pub fn fit_joint(table: &SampleTable, degree: usize) -> Result<JointDensityModel> {
    fit_joint_with_cap(table, degree, DEFAULT_COEFF_CAP)
}

pub fn fit_joint_with_cap(
    table: &SampleTable,
    degree: usize,
    cap: usize,
) -> Result<JointDensityModel> {
    table.ensure_unit_interval()?;
    let cols: Vec<&[f64]> = table.columns().iter().map(Vec::as_slice).collect();
    fit_joint_columns(&cols, degree, cap)
}

/// Column-slice form of [`fit_joint`]. Columns must have equal length and
/// lie in `[0,1]`; the caller validates.
pub(crate) fn fit_joint_columns(
    cols: &[&[f64]],
    degree: usize,
    cap: usize,
) -> Result<JointDensityModel> {
    let dims = cols.len();
    if dims == 0 {
        return Err(Error::invalid("joint fit needs at least one column"));
    }
    let n = cols[0].len();
    if n == 0 {
        return Err(Error::invalid("joint fit needs at least one row"));
    }
    if cols.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("joint fit columns differ in length"));
    }
    let len = tensor_len(dims, degree, cap)?;
    let basis = HcrBasis::new(degree);
    let base = basis.len();

    let chunk_sums: Vec<Vec<CompensatedSum>> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_ROWS;
            let end = (start + CHUNK_ROWS).min(n);
            let mut sums = vec![CompensatedSum::new(); len];
            let mut fvals = vec![0.0; dims * base];
            let mut prod = vec![0.0; len];
            for row in start..end {
                for (k, col) in cols.iter().enumerate() {
                    basis.eval_all_into(col[row], &mut fvals[k * base..(k + 1) * base]);
                }
                outer_products(&fvals, dims, base, &mut prod);
                for (s, p) in sums.iter_mut().zip(&prod) {
                    s.add(*p);
                }
            }
            sums
        })
        .collect();

    let mut coeffs = vec![0.0; len];
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let total: CompensatedSum = chunk_sums.iter().map(|s| s[idx].value()).collect();
        *c = total.value() / n as f64;
    }
    JointDensityModel::from_coeffs(dims, degree, coeffs)
}

/// Tensor product of per-axis basis vectors in lexicographic order.
fn outer_products(fvals: &[f64], dims: usize, base: usize, out: &mut [f64]) {
    out[0] = 1.0;
    let mut filled = 1;
    for k in 0..dims {
        let f = &fvals[k * base..(k + 1) * base];
        // expand in place from the back so earlier entries stay intact
        for idx in (0..filled).rev() {
            let v = out[idx];
            for (j, fj) in f.iter().enumerate().rev() {
                out[idx * base + j] = v * fj;
            }
        }
        filled *= base;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::rng::SeededRng;
    use crate::hcr::calibrated::DEFAULT_GRID;
    use proptest::prelude::*;

    /// Term-by-term evaluation, independent of the contraction path.
    fn naive_eval(model: &JointDensityModel, point: &[f64]) -> f64 {
        let b = model.basis();
        let base = b.len();
        let mut total = 0.0;
        for (flat, &a) in model.coeffs().iter().enumerate() {
            let mut rem = flat;
            let mut idx = vec![0; model.dims()];
            for k in (0..model.dims()).rev() {
                idx[k] = rem % base;
                rem /= base;
            }
            let mut term = a;
            for (k, &i) in idx.iter().enumerate() {
                term *= b.eval(i, point[k]).unwrap();
            }
            total += term;
        }
        total
    }

    #[test]
    fn two_row_example() {
        let t = SampleTable::from_pairs(vec![("x", vec![0.25, 0.75]), ("y", vec![0.25, 0.75])])
            .unwrap();
        let m = fit_joint(&t, 1).unwrap();
        assert_eq!(m.coeff(&[0, 0]).unwrap(), 1.0);
        assert!((m.coeff(&[1, 1]).unwrap() - 0.75).abs() < 1e-14);
        assert!(m.coeff(&[1, 0]).unwrap().abs() < 1e-15);
        let rho = m.eval_raw(&[0.25, 0.25]).unwrap();
        assert!((rho - 1.5625).abs() < 1e-14);
    }

    #[test]
    fn constant_coefficient_is_exactly_one() {
        let mut rng = SeededRng::new(3);
        let xs: Vec<f64> = (0..777).map(|_| rng.uniform()).collect();
        let t = SampleTable::from_pairs(vec![("x", xs)]).unwrap();
        assert_eq!(fit_joint(&t, 5).unwrap().coeffs()[0], 1.0);
    }

    #[test]
    fn independent_uniforms_have_small_moments() {
        let mut rng = SeededRng::new(4);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let t = SampleTable::from_pairs(vec![("x", xs), ("y", ys)]).unwrap();
        let m = fit_joint(&t, 4).unwrap();
        for (i, a) in m.coeffs().iter().enumerate().skip(1) {
            assert!(a.abs() <= 0.02, "coefficient {i} = {a}");
        }
    }

    #[test]
    fn errors() {
        let t = SampleTable::from_pairs(vec![("x", vec![0.5, 1.5])]).unwrap();
        assert!(matches!(fit_joint(&t, 2), Err(Error::InvalidInput(_))));
        let cols: Vec<Vec<f64>> = (0..8).map(|_| vec![0.5]).collect();
        let names = (0..8).map(|i| format!("c{i}")).collect();
        let wide = SampleTable::new(names, cols).unwrap();
        assert!(matches!(
            fit_joint(&wide, 9),
            Err(Error::CapacityExceeded { .. })
        ));
        let m = JointDensityModel::independent(2, 2).unwrap();
        assert!(m.eval_raw(&[0.5]).is_err());
        assert!(m.conditional_slice(0, &[0.5, 0.5], DEFAULT_GRID, 0.1).is_err());
        assert!(m.conditional_slice(0, &[0.5], 16, 0.1).is_err());
    }

    #[test]
    fn independence_slice_is_uniform() {
        let m = JointDensityModel::independent(3, 3).unwrap();
        let g = 1024;
        let d = m.conditional_slice(1, &[0.2, 0.9], g, 0.1).unwrap();
        for k in 0..g {
            assert!((d.density()[k] - 1.0).abs() < 1e-12);
            assert!((d.cumulative()[k] - k as f64 / (g - 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_slice_is_floored() {
        // a_10 = -0.7: raw slice 1 - 0.7 sqrt(3)(2x-1) reaches about -0.21 at x = 1
        let mut c = vec![0.0; 4];
        c[2] = -0.7;
        let m = JointDensityModel::from_coeffs(2, 1, c).unwrap();
        assert!(m.eval_raw(&[1.0, 0.3]).unwrap() < -0.2);
        let d = m.conditional_slice(0, &[0.3], 1024, 0.1).unwrap();
        let min = d.density().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min - 0.1 / d.z()).abs() < 1e-15);
        assert!((d.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn slice_matches_pointwise_evaluation() {
        let mut rng = SeededRng::new(9);
        let coeffs: Vec<f64> = (0..27).map(|_| 0.1 * (rng.uniform() - 0.5)).collect();
        let m = JointDensityModel::from_coeffs(3, 2, coeffs).unwrap();
        let c = m.slice_coeffs(1, &[0.3, 0.8]).unwrap();
        let b = m.basis();
        for x in [0.0, 0.25, 0.6, 1.0] {
            let via_slice: f64 = c.iter().zip(b.eval_all(x)).map(|(a, f)| a * f).sum();
            let direct = m.eval_raw(&[0.3, x, 0.8]).unwrap();
            assert!((via_slice - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn chunking_does_not_change_result() {
        let mut rng = SeededRng::new(21);
        let n = 3 * CHUNK_ROWS + 17;
        let xs: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let a = fit_joint_columns(&[&xs, &ys], 3, DEFAULT_COEFF_CAP).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| fit_joint_columns(&[&xs, &ys], 3, DEFAULT_COEFF_CAP).unwrap());
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn eval_matches_naive(
            dims in 1usize..=3,
            degree in 0usize..=4,
            seed in any::<u64>(),
            p in prop::collection::vec(0f64..=1.0, 3),
        ) {
            let mut rng = SeededRng::new(seed);
            let len = (degree + 1).pow(dims as u32);
            let coeffs: Vec<f64> = (0..len).map(|_| rng.uniform() - 0.5).collect();
            let m = JointDensityModel::from_coeffs(dims, degree, coeffs).unwrap();
            let point = &p[..dims];
            let fast = m.eval_raw(point).unwrap();
            let slow = naive_eval(&m, point);
            prop_assert!((fast - slow).abs() < 1e-12, "{} vs {}", fast, slow);
        }

        #[test]
        fn fitted_coefficients_are_bounded(seed in any::<u64>(), n in 1usize..200) {
            let mut rng = SeededRng::new(seed);
            let xs: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let m = fit_joint_columns(&[&xs, &ys], 3, DEFAULT_COEFF_CAP).unwrap();
            let bound = HcrBasis::sup_norm(3).powi(2);
            prop_assert!(m.coeffs().iter().all(|a| a.abs() <= bound));
        }
    }
}
