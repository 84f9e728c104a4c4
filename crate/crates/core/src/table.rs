//! Column-oriented numeric tables written as CSV.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScanTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Dimension(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Comma-separated, header row, LF endings, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// `per_decade` log-spaced points per decade from `lo` to `hi`, both included.
pub fn log_space(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || per_decade == 0 {
        return Err(Error::Domain(format!("invalid log range [{lo}, {hi}]")));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let steps = ((b - a) * per_decade as f64).round().max(1.0) as usize;
    if lo == hi {
        return Ok(vec![lo]);
    }
    Ok(log_points(lo, hi, steps + 1))
}

/// `count` log-spaced points from `lo` to `hi`, both included.
pub fn log_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|k| match k {
            0 => lo,
            _ if k + 1 == count => hi,
            _ => 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = ScanTable::new(["x", "y"]);
        t.push(vec![1.0, 0.1]).unwrap();
        assert!(t.push(vec![1.0]).is_err());
        assert_eq!(t.to_csv(), "x,y\n1.0000000000000000e0,1.0000000000000001e-1\n");
        assert_eq!(t.column("y"), Some(vec![0.1]));
    }

    #[test]
    fn decades() {
        let v = log_space(1e-4, 1.0, 25).unwrap();
        assert_eq!(v.len(), 101);
        assert_eq!(v[0], 1e-4);
        assert_eq!(v[100], 1.0);
        assert!((v[25] / 1e-3 - 1.0).abs() < 1e-13);
        assert!(log_space(0.0, 1.0, 25).is_err());
    }
}
