//! Numeric CSV ingestion with row-level missing-value handling.

use crate::error::{HarnessError, Result};
use std::io::Read;
use std::path::Path;

/// Selected columns of a CSV file, with rows containing missing values removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    /// Rows skipped because a selected column was missing.
    pub dropped: usize,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

fn is_missing(s: &str) -> bool {
    matches!(s, "" | "NA" | "na" | "N/A" | "NaN" | "nan" | "." | "null" | "NULL")
}

pub fn read_csv(path: &Path, columns: &[String]) -> Result<Table> {
    let file = std::fs::File::open(path)
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    read_csv_from(file, columns)
}

/// Reads the named columns (all columns when `columns` is empty).
pub fn read_csv_from<R: Read>(reader: R, columns: &[String]) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| HarnessError::Parse { line: 1, msg: e.to_string() })?
        .clone();
    let names: Vec<String> = if columns.is_empty() {
        header.iter().map(str::to_string).collect()
    } else {
        columns.to_vec()
    };
    let idx = names
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| HarnessError::MissingColumn(name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new(); names.len()];
    let mut dropped = 0;
    let mut row = Vec::with_capacity(idx.len());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        row.clear();
        let mut missing = false;
        for (&i, name) in idx.iter().zip(&names) {
            let field = rec.get(i).unwrap_or("");
            if is_missing(field) {
                missing = true;
                break;
            }
            let v: f64 = field.parse().map_err(|_| HarnessError::Parse {
                line,
                msg: format!("column `{name}`: `{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Parse { line, msg: format!("column `{name}`: non-finite value") });
            }
            row.push(v);
        }
        if missing {
            dropped += 1;
            continue;
        }
        for (col, &v) in out.iter_mut().zip(&row) {
            col.push(v);
        }
    }
    if dropped > 0 {
        log::info!("dropped {dropped} row(s) with missing values");
    }
    Ok(Table { names, columns: out, dropped })
}
