//! Named real-valued columns of equal length.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Column-major table of finite reals. Every column has the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl SampleTable {
    /// Builds a validated table: at least one column, unique non-empty names,
    /// equal lengths, at least one row, finite entries.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::invalid(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::invalid("table has no columns"));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::invalid("empty column name"));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate column name '{name}'")));
            }
        }
        let n_rows = columns[0].len();
        if n_rows == 0 {
            return Err(Error::invalid("table has no rows"));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::invalid(format!(
                    "column '{name}' has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "non-finite value in column '{name}' at row {row}"
                )));
            }
        }
        Ok(Self { names, columns })
    }

    /// Convenience constructor from `(name, values)` pairs.
    pub fn from_pairs<S: Into<String>>(pairs: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let (names, columns) = pairs.into_iter().map(|(n, c)| (n.into(), c)).unzip();
        Self::new(names, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::invalid(format!("missing column '{name}'")))
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn column_at(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    /// Replaces a column's values. Length and finiteness are checked.
    pub fn set_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        let idx = self.index_of(name)?;
        if values.len() != self.n_rows() {
            return Err(Error::invalid(format!(
                "replacement for '{name}' has {} rows, expected {}",
                values.len(),
                self.n_rows()
            )));
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value for '{name}' at row {row}"
            )));
        }
        self.columns[idx] = values;
        Ok(())
    }

    /// New table holding only the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<SampleTable> {
        let cols = names
            .iter()
            .map(|n| self.column(n).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        SampleTable::new(names.to_vec(), cols)
    }

    /// Fails unless every entry lies in `[0, 1]`.
    pub fn ensure_unit_interval(&self) -> Result<()> {
        for (name, col) in self.names.iter().zip(&self.columns) {
            if let Some(row) = col.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::invalid(format!(
                    "column '{name}' row {row} value {} outside [0,1]",
                    col[row]
                )));
            }
        }
        Ok(())
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<Vec<f64>>) {
        (self.names, self.columns)
    }
}
