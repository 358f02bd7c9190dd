//! Hierarchical correlation reconstruction: densities on `[0,1]^d` expanded
//! in an orthonormal polynomial basis, with coefficients estimated as sample
//! means of basis products.
//!
//! Two routes to a conditional density are provided. [`JointDensityModel`]
//! fits the full coefficient tensor and slices it at the conditioning
//! values; [`MomentRegressionModel`] regresses each target moment on features
//! of the conditioning variables directly, which scales to many variables.
//! Both feed the same clip-and-normalize step that yields a
//! [`CalibratedDensity1D`].

mod basis;
mod calibrated;
mod joint;
mod regression;

pub use basis::HcrBasis;
pub use calibrated::{CalibratedDensity1D, DEFAULT_FLOOR, DEFAULT_GRID, MIN_GRID};
pub use joint::{
    fit_joint, fit_joint_with_cap, tensor_len, JointDensityModel, DEFAULT_COEFF_CAP,
};
pub use regression::{
    fit_moment_regression, Feature, MomentRegressionModel, RegressionOptions, DEFAULT_RIDGE,
};

pub(crate) use joint::{fit_joint_columns, raw_on_grid};

/// Default polynomial degree per axis.
pub const DEFAULT_DEGREE: usize = 4;
