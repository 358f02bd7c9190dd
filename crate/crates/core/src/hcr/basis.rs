use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthonormal shifted Legendre polynomials `f_0..f_m` on `[0,1]`.
///
/// `f_i(x) = sqrt(2i+1) P_i(2x-1)` with `P_i` from the three-term recurrence,
/// so `f_0 = 1`, `f_1 = sqrt(3)(2x-1)`, `f_2 = sqrt(5)(6x^2-6x+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HcrBasis {
    degree: usize,
}

impl HcrBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of functions, `m + 1`.
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        if i > self.degree {
            return Err(Error::invalid(format!(
                "basis index {i} exceeds degree {}",
                self.degree
            )));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!("basis argument {x} outside [0,1]")));
        }
        let mut out = vec![0.0; i + 1];
        fill(i, x, &mut out);
        Ok(out[i])
    }

    /// Writes `f_0(x)..f_m(x)` into `out` (length `m + 1`). No range checks.
    pub fn eval_all_into(&self, x: f64, out: &mut [f64]) {
        fill(self.degree, x, out);
    }

    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_all_into(x, &mut out);
        out
    }

    /// `sup |f_i|` over `[0,1]`, attained at the endpoints.
    pub fn sup_norm(i: usize) -> f64 {
        ((2 * i + 1) as f64).sqrt()
    }

    /// Basis values on the uniform grid `k / (g - 1)`, row-major by function:
    /// entry `[i * g + k]` is `f_i(k / (g - 1))`.
    pub fn grid_table(&self, g: usize) -> Vec<f64> {
        let mut table = vec![0.0; self.len() * g];
        let mut buf = vec![0.0; self.len()];
        for k in 0..g {
            let x = k as f64 / (g - 1) as f64;
            self.eval_all_into(x, &mut buf);
            for (i, v) in buf.iter().enumerate() {
                table[i * g + k] = *v;
            }
        }
        table
    }
}

fn fill(degree: usize, x: f64, out: &mut [f64]) {
    let t = 2.0 * x - 1.0;
    let mut p_prev = 1.0;
    out[0] = 1.0;
    if degree == 0 {
        return;
    }
    let mut p = t;
    out[1] = 3f64.sqrt() * t;
    for k in 1..degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
        out[k + 1] = ((2 * k + 3) as f64).sqrt() * p;
    }
}
