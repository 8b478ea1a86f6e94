//! File formats: quadric JSON (`{"A": [[..]], "b": [..], "c": ..}`) and point
//! lists as JSON arrays of arrays or CSV rows.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::quadric::Quadric;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid quadric: {0}")]
    Quadric(#[from] Error),
}

/// On-disk quadric: `A` row-major, `b`, `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadricFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl QuadricFile {
    pub fn into_quadric(self) -> Result<Quadric, IoError> {
        let n = self.a.len();
        if n == 0 {
            return Err(IoError::Parse("\"A\" must be a non-empty square matrix".into()));
        }
        if let Some(row) = self.a.iter().find(|r| r.len() != n) {
            return Err(IoError::Parse(format!(
                "\"A\" must be {n}x{n}; found a row of length {}",
                row.len()
            )));
        }
        if self.b.len() != n {
            return Err(IoError::Parse(format!(
                "\"b\" must have length {n}, found {}",
                self.b.len()
            )));
        }
        let a = DMatrix::from_row_iterator(n, n, self.a.into_iter().flatten());
        Ok(Quadric::new(a, DVector::from_vec(self.b), self.c)?)
    }

    pub fn from_quadric(q: &Quadric) -> Self {
        let n = q.dim();
        Self {
            a: (0..n).map(|i| q.a().row(i).iter().copied().collect()).collect(),
            b: q.b().iter().copied().collect(),
            c: q.c(),
        }
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_quadric(text: &str) -> Result<Quadric, IoError> {
    let file: QuadricFile =
        serde_json::from_str(text).map_err(|e| IoError::Parse(format!("quadric JSON: {e}")))?;
    file.into_quadric()
}

pub fn read_quadric(path: &Path) -> Result<Quadric, IoError> {
    parse_quadric(&read(path)?)
}

/// JSON array of arrays.
pub fn parse_points_json(text: &str) -> Result<Vec<DVector<f64>>, IoError> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(text).map_err(|e| IoError::Parse(format!("points JSON: {e}")))?;
    Ok(rows.into_iter().map(DVector::from_vec).collect())
}

/// One point per row. A first row that does not parse as numbers is taken as
/// a header.
pub fn parse_points_csv(text: &str) -> Result<Vec<DVector<f64>>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IoError::Parse(format!("points CSV: {e}")))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => out.push(DVector::from_vec(row)),
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(IoError::Parse(format!("points CSV row {}: {e}", i + 1)));
            }
        }
    }
    Ok(out)
}

/// Picks the parser from the extension: `.csv` is CSV, anything else JSON.
pub fn read_points(path: &Path) -> Result<Vec<DVector<f64>>, IoError> {
    let text = read(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_points_csv(&text)
    } else {
        parse_points_json(&text)
    }
}
