use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::ProductVector;

/// Recorded demands, one row per period and one column per product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvDataset {
    rows: Vec<ProductVector>,
}

impl CsvDataset {
    pub fn from_rows(rows: Vec<ProductVector>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Ingestion {
                row: 0,
                message: "no periods".into(),
            });
        };
        let n = first.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Ingestion {
                    row: i + 1,
                    message: format!("expected {n} columns, found {}", r.len()),
                });
            }
            if !r.is_nonnegative() || !r.is_finite() {
                return Err(Error::Ingestion {
                    row: i + 1,
                    message: "demands must be finite and nonnegative".into(),
                });
            }
        }
        Ok(CsvDataset { rows })
    }

    pub fn rows(&self) -> &[ProductVector] {
        &self.rows
    }

    pub fn periods(&self) -> usize {
        self.rows.len()
    }

    pub fn products(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Average demand per product.
    pub fn mean(&self) -> ProductVector {
        let mut acc = ProductVector::zeros(self.products());
        for r in &self.rows {
            acc.add_assign(r);
        }
        acc.map(|v| v / self.rows.len() as f64)
    }

    /// Per-product empirical quantile (lower, order-statistic based).
    pub fn quantile(&self, q: f64) -> ProductVector {
        let t = self.rows.len();
        (0..self.products())
            .map(|i| {
                let mut col: Vec<f64> = self.rows.iter().map(|r| r[i]).collect();
                col.sort_by(f64::total_cmp);
                let idx = ((q * t as f64).ceil() as usize).clamp(1, t) - 1;
                col[idx]
            })
            .collect()
    }
}

/// Reads a demand CSV from disk.
pub fn load_csv(path: impl AsRef<Path>) -> Result<CsvDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Ingestion {
        row: 0,
        message: format!("cannot open {}: {e}", path.display()),
    })?;
    parse_csv(file)
}

/// Parses comma-separated demands. A first row whose first cell is not a
/// number is treated as a header. Row numbers in errors are 1-based file lines.
pub fn parse_csv<R: Read>(reader: R) -> Result<CsvDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows: Vec<ProductVector> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Ingestion {
            row: line,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 && record.get(0).is_some_and(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let values = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| Error::Ingestion {
                    row: line,
                    message: format!("not a number: {cell:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(&w) = width.as_ref() {
            if values.len() != w {
                return Err(Error::Ingestion {
                    row: line,
                    message: format!("expected {w} columns, found {}", values.len()),
                });
            }
        } else {
            width = Some(values.len());
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Ingestion {
                row: line,
                message: format!("negative or non-finite demand {bad}"),
            });
        }
        rows.push(values.into());
    }
    if rows.is_empty() {
        return Err(Error::Ingestion {
            row: 0,
            message: "no periods".into(),
        });
    }
    Ok(CsvDataset { rows })
}
