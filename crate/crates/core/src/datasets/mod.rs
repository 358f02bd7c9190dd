//! CSV ingestion/emission and seeded synthetic generators.
//!
//! Generators emit raw (unnormalized) data. The same spec and seed always
//! produce a bit-identical table; see [`rng`] for the stream definition.

mod csv_io;
pub mod rng;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::to_json_string;
use crate::table::SampleTable;
pub use csv_io::{format_csv, load_csv, parse_csv, read_text, write_csv, write_text, CsvOptions};
use rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Normals with pairwise latent correlation `rho`.
    GaussianCopula {
        rho: f64,
        n: usize,
        dims: usize,
        seed: u64,
    },
    /// `X ~ N(0,1)`, `Z = alpha X + noise_z e`, `Y = beta Z + noise_y e`;
    /// columns `x, y, z`. `X` and `Y` are independent given `Z`.
    MarkovChain {
        n: usize,
        alpha: f64,
        beta: f64,
        noise_z: f64,
        noise_y: f64,
        seed: u64,
    },
    /// White-noise `y`, `x_t = coupling * y_{t-delay} + noise * e_t`;
    /// columns `x, y`.
    LaggedPair {
        t: usize,
        delay: usize,
        coupling: f64,
        noise: f64,
        seed: u64,
    },
    /// White-noise `x`, `y_t = c x_{t-delay_xy} + noise e`,
    /// `z_t = c y_{t-delay_yz} + noise e`; columns `x, y, z`.
    LaggedChain {
        t: usize,
        delay_xy: usize,
        delay_yz: usize,
        coupling: f64,
        noise: f64,
        seed: u64,
    },
    /// I.i.d. standard normal columns.
    Independent { n: usize, dims: usize, seed: u64 },
}

impl GeneratorSpec {
    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("generator spec: {e}")))
    }
}

/// Column names: `x, y, z` for up to three columns, `x1..xd` beyond.
pub fn default_names(dims: usize) -> Vec<String> {
    if dims <= 3 {
        ["x", "y", "z"][..dims].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=dims).map(|i| format!("x{i}")).collect()
    }
}

/// Unit-variance noise scale for a given coupling.
pub fn complementary_noise(coupling: f64) -> f64 {
    (1.0 - coupling * coupling).max(0.0).sqrt()
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::invalid(format!("parameter '{name}' must be at least 1")))
    } else {
        Ok(())
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("parameter '{name}' must be finite")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("parameter '{name}' must be >= 0")))
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<SampleTable> {
    match *spec {
        GeneratorSpec::GaussianCopula { rho, n, dims, seed } => {
            positive("n", n)?;
            if dims < 2 {
                return Err(Error::invalid("parameter 'dims' must be at least 2"));
            }
            if !(rho.is_finite() && rho.abs() < 1.0) {
                return Err(Error::invalid("parameter 'rho' must satisfy |rho| < 1"));
            }
            let corr = DMatrix::from_fn(dims, dims, |i, j| if i == j { 1.0 } else { rho });
            let chol = corr.cholesky().ok_or_else(|| {
                Error::invalid(format!(
                    "parameter 'rho' = {rho} gives no valid {dims}-dimensional correlation"
                ))
            })?;
            let l = chol.l();
            let mut rng = SeededRng::new(seed);
            let mut cols = vec![Vec::with_capacity(n); dims];
            let mut z = vec![0.0; dims];
            for _ in 0..n {
                for v in z.iter_mut() {
                    *v = rng.normal();
                }
                for (i, col) in cols.iter_mut().enumerate() {
                    col.push((0..=i).map(|j| l[(i, j)] * z[j]).sum());
                }
            }
            SampleTable::new(default_names(dims), cols)
        }
        GeneratorSpec::MarkovChain {
            n,
            alpha,
            beta,
            noise_z,
            noise_y,
            seed,
        } => {
            positive("n", n)?;
            finite("alpha", alpha)?;
            finite("beta", beta)?;
            non_negative("noise_z", noise_z)?;
            non_negative("noise_y", noise_y)?;
            let mut rng = SeededRng::new(seed);
            let (mut xs, mut ys, mut zs) = (
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            );
            for _ in 0..n {
                let x = rng.normal();
                let z = alpha * x + noise_z * rng.normal();
                let y = beta * z + noise_y * rng.normal();
                xs.push(x);
                ys.push(y);
                zs.push(z);
            }
            SampleTable::from_pairs(vec![("x", xs), ("y", ys), ("z", zs)])
        }
        GeneratorSpec::LaggedPair {
            t,
            delay,
            coupling,
            noise,
            seed,
        } => {
            positive("t", t)?;
            finite("coupling", coupling)?;
            non_negative("noise", noise)?;
            let mut rng = SeededRng::new(seed);
            let y_full: Vec<f64> = (0..t + delay).map(|_| rng.normal()).collect();
            let x: Vec<f64> = (0..t)
                .map(|i| coupling * y_full[i] + noise * rng.normal())
                .collect();
            let y = y_full[delay..].to_vec();
            SampleTable::from_pairs(vec![("x", x), ("y", y)])
        }
        GeneratorSpec::LaggedChain {
            t,
            delay_xy,
            delay_yz,
            coupling,
            noise,
            seed,
        } => {
            positive("t", t)?;
            finite("coupling", coupling)?;
            non_negative("noise", noise)?;
            let burn = delay_xy + delay_yz;
            let total = t + burn;
            let mut rng = SeededRng::new(seed);
            let x: Vec<f64> = (0..total).map(|_| rng.normal()).collect();
            // y_s defined for s >= delay_xy, z_s for s >= burn
            let y: Vec<f64> = (0..total)
                .map(|s| {
                    if s >= delay_xy {
                        coupling * x[s - delay_xy] + noise * rng.normal()
                    } else {
                        0.0
                    }
                })
                .collect();
            let z: Vec<f64> = (burn..total)
                .map(|s| coupling * y[s - delay_yz] + noise * rng.normal())
                .collect();
            SampleTable::from_pairs(vec![
                ("x", x[burn..].to_vec()),
                ("y", y[burn..].to_vec()),
                ("z", z),
            ])
        }
        GeneratorSpec::Independent { n, dims, seed } => {
            positive("n", n)?;
            positive("dims", dims)?;
            let mut rng = SeededRng::new(seed);
            let mut cols = vec![Vec::with_capacity(n); dims];
            for _ in 0..n {
                for c in cols.iter_mut() {
                    c.push(rng.normal());
                }
            }
            SampleTable::new(default_names(dims), cols)
        }
    }
}
