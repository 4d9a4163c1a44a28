use std::collections::HashMap;
use std::rc::Rc;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian (RBF) kernel width, `K(x, y) = exp(-gamma · ‖x − y‖²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma: f64,
}

impl KernelParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(KernelParams { gamma })
    }
}

#[inline]
pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

#[inline]
pub(crate) fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(x, y)).exp()
}

pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    KernelParams::new(gamma)?;
    Ok(rbf(x, y, gamma))
}

/// Rows of the training kernel matrix, computed on demand and kept in a
/// least-recently-used cache bounded by a byte budget.
///
/// A row is always produced by the same arithmetic whether it comes from the
/// cache or is recomputed, so the cache never changes results.
pub(crate) struct KernelRows<'a> {
    rows: ArrayView2<'a, f64>,
    gamma: f64,
    capacity: usize,
    tick: u64,
    cache: HashMap<usize, (Rc<[f64]>, u64)>,
}

impl<'a> KernelRows<'a> {
    pub fn new(rows: ArrayView2<'a, f64>, gamma: f64, cache_bytes: usize) -> Self {
        let row_bytes = (rows.nrows() * std::mem::size_of::<f64>()).max(1);
        KernelRows {
            rows,
            gamma,
            capacity: cache_bytes / row_bytes,
            tick: 0,
            cache: HashMap::new(),
        }
    }

    fn compute(&self, i: usize) -> Rc<[f64]> {
        let xi = self.rows.row(i);
        let xi = xi.as_slice().expect("standard layout rows");
        self.rows
            .outer_iter()
            .map(|xj| rbf(xi, xj.as_slice().expect("standard layout rows"), self.gamma))
            .collect()
    }

    pub fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.tick += 1;
        let tick = self.tick;
        if let Some((row, used)) = self.cache.get_mut(&i) {
            *used = tick;
            return Rc::clone(row);
        }
        let row = self.compute(i);
        if self.capacity > 0 {
            if self.cache.len() >= self.capacity {
                let oldest = self
                    .cache
                    .iter()
                    .min_by_key(|(_, (_, used))| *used)
                    .map(|(&k, _)| k)
                    .expect("cache is non-empty when full");
                self.cache.remove(&oldest);
            }
            self.cache.insert(i, (Rc::clone(&row), tick));
        }
        row
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.rows
            .outer_iter()
            .map(|x| {
                let x = x.as_slice().expect("standard layout rows");
                rbf(x, x, self.gamma)
            })
            .collect()
    }

    #[cfg(test)]
    pub fn cached_rows(&self) -> usize {
        self.cache.len()
    }
}
