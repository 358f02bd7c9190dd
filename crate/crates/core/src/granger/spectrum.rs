use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::profile::DelayProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// Cycles per time step.
    pub frequency: f64,
    pub magnitude: f64,
}

/// DFT magnitudes of a mean-removed sequence at `k/N`, `k = 0..=N/2`.
pub fn spectrum(values: &[f64]) -> Result<Vec<SpectrumPoint>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::invalid(format!("spectrum needs at least 4 points, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok((0..=n / 2)
        .map(|k| SpectrumPoint {
            frequency: k as f64 / n as f64,
            magnitude: buf[k].norm(),
        })
        .collect())
}

/// Spectrum of the correlation-versus-delay curve.
pub fn delay_spectrum(profile: &DelayProfile) -> Result<Vec<SpectrumPoint>> {
    spectrum(&profile.correlation)
}
