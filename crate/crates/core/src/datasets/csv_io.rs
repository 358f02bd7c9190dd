use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::format::g17;
use crate::table::SampleTable;

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Skip rows with empty cells instead of failing.
    pub drop_missing: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            drop_missing: false,
        }
    }
}

pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<SampleTable> {
    let text = read_text(path)?;
    parse_csv(&text, options)
}

/// Parses CSV text with a header row; line numbers in errors are 1-based and
/// count the header.
pub fn parse_csv(text: &str, options: &CsvOptions) -> Result<SampleTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Format(format!("reading header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || (names.len() == 1 && names[0].is_empty()) {
        return Err(Error::invalid("CSV has no header"));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    'rows: for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if record.len() != names.len() {
            return Err(Error::Format(format!(
                "line {line} has {} fields, header has {}",
                record.len(),
                names.len()
            )));
        }
        let mut row = Vec::with_capacity(names.len());
        for (cell, name) in record.iter().zip(&names) {
            if cell.is_empty() {
                if options.drop_missing {
                    continue 'rows;
                }
                return Err(Error::Parse {
                    line,
                    column: name.clone(),
                    message: "missing value (use --drop-missing to skip such rows)".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                column: name.clone(),
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: name.clone(),
                    message: format!("'{cell}' is not finite"),
                });
            }
            row.push(v);
        }
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::invalid("CSV has a header but no data rows"));
    }
    SampleTable::new(names, columns)
}

/// Header plus rows, reals with 17 significant digits.
pub fn format_csv(table: &SampleTable) -> Result<String> {
    if let Some(bad) = table.names().iter().find(|n| n.is_empty()) {
        return Err(Error::invalid(format!("invalid column name '{bad}'")));
    }
    let mut out = String::new();
    out.push_str(&table.names().join(","));
    out.push('\n');
    for row in 0..table.n_rows() {
        let cells: Vec<String> = table.columns().iter().map(|c| g17(c[row])).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(table: &SampleTable, path: &Path, force: bool) -> Result<()> {
    let text = format_csv(table)?;
    if !force && path.exists() {
        return Err(Error::RefusedOverwrite(path.to_path_buf()));
    }
    write_text(path, &text)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
