use crate::error::{Error, Result};

/// Default lower clip applied to raw densities before normalization.
pub const DEFAULT_FLOOR: f64 = 0.1;
/// Default number of grid points for calibrated 1-D densities.
pub const DEFAULT_GRID: usize = 1024;
/// Smallest grid accepted for calibrated densities.
pub const MIN_GRID: usize = 64;

/// A positive density on the uniform grid `k / (G-1)` of `[0,1]`, normalized
/// with the trapezoid rule, together with its cumulative distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedDensity1D {
    density: Vec<f64>,
    z: f64,
    cumulative: Vec<f64>,
}

impl CalibratedDensity1D {
    /// Applies `max(raw, floor)`, divides by the trapezoid integral `Z` and
    /// accumulates the CDF on the grid.
    pub fn from_raw(raw: &[f64], floor: f64) -> Result<Self> {
        let g = raw.len();
        if g < 2 {
            return Err(Error::invalid("calibration grid needs at least 2 points"));
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::invalid(format!("density floor must be positive, got {floor}")));
        }
        let clipped: Vec<f64> = raw.iter().map(|&r| if r > floor { r } else { floor }).collect();
        if clipped.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite raw density".into()));
        }
        let h = 1.0 / (g - 1) as f64;
        let mut cumulative = Vec::with_capacity(g);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in clipped.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        let z = acc;
        for c in cumulative.iter_mut() {
            *c /= z;
        }
        cumulative[g - 1] = 1.0;
        let density = clipped.into_iter().map(|v| v / z).collect();
        Ok(Self {
            density,
            z,
            cumulative,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.density.len()
    }

    pub fn grid_point(&self, k: usize) -> f64 {
        k as f64 / (self.grid_size() - 1) as f64
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Normalization constant of the clipped raw density.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Linearly interpolated CDF at `x`, clamped to `[0,1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let g = self.grid_size();
        let pos = x.clamp(0.0, 1.0) * (g - 1) as f64;
        let k = (pos.floor() as usize).min(g - 2);
        let t = pos - k as f64;
        let c = &self.cumulative;
        (c[k] + t * (c[k + 1] - c[k])).clamp(0.0, 1.0)
    }

    /// Exact inverse of [`cdf`](Self::cdf): binary search for the grid cell,
    /// then linear interpolation inside it.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let g = self.grid_size();
        let c = &self.cumulative;
        let u = u.clamp(0.0, 1.0);
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        // first k with c[k] > u, in 1..g
        let k = c.partition_point(|&v| v <= u).clamp(1, g - 1);
        let (c0, c1) = (c[k - 1], c[k]);
        let t = (u - c0) / (c1 - c0);
        (((k - 1) as f64 + t) / (g - 1) as f64).clamp(0.0, 1.0)
    }

    /// Trapezoid integral of the stored density over `[0,1]`.
    pub fn integral(&self) -> f64 {
        let h = 1.0 / (self.grid_size() - 1) as f64;
        self.density.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum()
    }
}
