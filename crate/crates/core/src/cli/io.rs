use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Dataset;

/// Reads a comma-separated numeric table with a header row and splits off
/// the `target` column as the response.
pub fn read_csv(path: &Path, target: &str) -> Result<Dataset> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    read_csv_from(file, target)
}

pub fn read_csv_from<R: Read>(reader: R, target: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "missing header row".into(),
        });
    }
    let t = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::Config(format!("target column '{target}' not found in header")))?;

    let mut values: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                return Err(Error::Parse {
                    line,
                    column: col + 1,
                    message: format!("missing value in column '{}'", headers[col]),
                });
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: col + 1,
                message: format!("'{field}' is not a number (column '{}')", headers[col]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: col + 1,
                    message: format!("non-finite value '{field}'"),
                });
            }
            row.push(v);
        }
        values.push(row);
    }
    if values.is_empty() {
        return Err(Error::InvalidData("the table has no data rows".into()));
    }
    let n = values.len();
    let predictors: Vec<usize> = (0..headers.len()).filter(|&j| j != t).collect();
    let x = DMatrix::from_fn(n, predictors.len(), |i, j| values[i][predictors[j]]);
    let y = DVector::from_fn(n, |i, _| values[i][t]);
    let names = predictors.iter().map(|&j| headers[j].clone()).collect();
    Dataset::new(x, y, names)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            line,
            column: (*len as usize).min(*expected_len as usize) + 1,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            line,
            column: err.field() + 1,
            message: "invalid UTF-8".into(),
        },
        _ => Error::Parse {
            line,
            column: 0,
            message: e.to_string(),
        },
    }
}

/// Serializes rows of `(header, values)` as CSV text.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
