use ndarray::ArrayView2;

use super::kernel::{rbf, KernelParams};
use crate::error::{Error, Result};

/// Dual objective `W(α) = Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij`.
pub fn dual_objective(
    alphas: &[f64],
    rows: ArrayView2<f64>,
    y: &[f64],
    kernel: KernelParams,
) -> Result<f64> {
    let n = rows.nrows();
    for len in [alphas.len(), y.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let row = |i: usize| rows.row(i).to_vec();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        let xi = row(i);
        for j in 0..n {
            if alphas[j] == 0.0 {
                continue;
            }
            quad += alphas[i] * alphas[j] * y[i] * y[j] * rbf(&xi, &row(j), kernel.gamma);
        }
    }
    Ok(alphas.iter().sum::<f64>() - 0.5 * quad)
}
