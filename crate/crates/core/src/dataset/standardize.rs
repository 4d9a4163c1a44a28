use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns whose population standard deviation falls below this are passed
/// through after centering.
pub const MIN_SCALE: f64 = 1e-12;

/// Per-column z-score parameters for rows of `d + 2` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        apply_standardizer(self, row)
    }
}

pub fn fit_standardizer<R: AsRef<[f64]>>(rows: &[R]) -> Result<Standardizer> {
    let first = rows
        .first()
        .ok_or(Error::Empty("no rows to fit a standardizer"))?;
    let width = first.as_ref().len();
    let n = rows.len() as f64;

    let mut mean = vec![0.0; width];
    for row in rows {
        let row = row.as_ref();
        if row.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: row.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    // two-pass variance
    let mut var = vec![0.0; width];
    for row in rows {
        for ((s, v), m) in var.iter_mut().zip(row.as_ref()).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    let scale = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd < MIN_SCALE {
                1.0
            } else {
                sd
            }
        })
        .collect();
    Ok(Standardizer { mean, scale })
}

pub fn apply_standardizer(std: &Standardizer, row: &[f64]) -> Result<Vec<f64>> {
    if row.len() != std.len() {
        return Err(Error::DimensionMismatch {
            expected: std.len(),
            actual: row.len(),
        });
    }
    Ok(row
        .iter()
        .zip(&std.mean)
        .zip(&std.scale)
        .map(|((v, m), s)| (v - m) / s)
        .collect())
}
