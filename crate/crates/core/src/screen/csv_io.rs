//! CSV ingestion with a missing-data mask.
//!
//! First row is the header. Empty fields, `NA`, and `NaN` are missing; any
//! other non-numeric cell is an error that names every offending cell.

use std::path::Path;

use super::Dataset;
use crate::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    /// Column to use as row ids (excluded from the numeric data). Without
    /// it rows are numbered from 1.
    pub row_id_column: Option<String>,
}

pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.into(), detail: e.to_string() })?;

    let headers: Vec<String> =
        reader.headers().map_err(|e| Error::Csv { path: path.into(), detail: e.to_string() })?
            .iter()
            .map(|h| h.to_string())
            .collect();

    let id_col = match &options.row_id_column {
        Some(name) => Some(
            headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
                path: path.into(),
                detail: format!("row id column '{name}' not found in header"),
            })?,
        ),
        None => None,
    };
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(c, _)| Some(*c) != id_col)
        .map(|(_, h)| h.clone())
        .collect();
    {
        let mut seen = std::collections::BTreeSet::new();
        for name in &names {
            if !seen.insert(name) {
                return Err(Error::Csv {
                    path: path.into(),
                    detail: format!("duplicate header: {name}"),
                });
            }
        }
    }

    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut row_ids: Vec<String> = Vec::new();
    let mut offending: Vec<String> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.into(),
            detail: format!("row {}: {e}", r + 2),
        })?;
        let mut row = Vec::with_capacity(names.len());
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == id_col {
                continue;
            }
            match parse_cell(cell) {
                Ok(v) => row.push(v),
                Err(()) => offending.push(format!(
                    "row {} column '{}': '{}'",
                    r + 2,
                    headers[c],
                    cell
                )),
            }
        }
        row_ids.push(match id_col {
            Some(c) => record.get(c).unwrap_or_default().to_string(),
            None => (r + 1).to_string(),
        });
        rows.push(row);
    }
    if !offending.is_empty() {
        return Err(Error::Csv {
            path: path.into(),
            detail: format!("non-numeric cells: {}", offending.join("; ")),
        });
    }
    Dataset::from_rows(names, row_ids, &rows)
}

fn parse_cell(cell: &str) -> std::result::Result<Option<f64>, ()> {
    let trimmed = cell.trim();
    if trimmed.is_empty() || trimmed == "NA" || trimmed == "NaN" {
        return Ok(None);
    }
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(()),
    }
}

/// Writes the dataset back out; missing cells are empty fields. Values use
/// the shortest representation that parses back to the same double.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&dataset.names().join(","));
    out.push('\n');
    for r in 0..dataset.n_rows() {
        let cells: Vec<String> = (0..dataset.n_vars())
            .map(|c| match dataset.get(r, c) {
                Some(v) => format!("{v}"),
                None => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
