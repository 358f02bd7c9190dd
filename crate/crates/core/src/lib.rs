//! Information extraction and decoupling on copula-normalized data using
//! hierarchical correlation reconstruction (HCR) density models.
//!
//! Pipeline: [`normalization`] maps raw columns to `[0,1]`, [`hcr`] fits
//! polynomial densities, [`extraction`] turns conditional densities into
//! invertible transforms, [`decoupling`] chains them, [`infoflow`] measures
//! information and [`granger`] studies lagged dependence.

pub mod datasets;
pub mod decoupling;
pub mod error;
pub mod extraction;
pub mod format;
pub mod granger;
pub mod hcr;
pub mod infoflow;
pub mod normalization;
pub mod stats;
pub mod table;

pub use error::{Error, Result};
pub use table::SampleTable;
