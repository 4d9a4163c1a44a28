//! Sequential minimal optimization for the soft-margin dual
//!
//! ```text
//! max  W(α) = Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij
//! s.t. 0 ≤ α_i ≤ C_i,  Σ α_i y_i = 0
//! ```
//!
//! Internally the solver minimises `f(α) = ½ αᵀQα − eᵀα` with
//! `Q_ij = y_i y_j K_ij` and tracks the gradient `G = Qα − e`. Each step picks
//! the maximal violating pair
//!
//! ```text
//! i = argmax { −y_t G_t : t ∈ I_up },   j = argmin { −y_t G_t : t ∈ I_low }
//! ```
//!
//! and solves the two-variable subproblem analytically with per-sample upper
//! bounds. Training stops when the violation `max − min` drops to the KKT
//! tolerance.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelParams, KernelRows};
use super::model::BinarySvmModel;
use crate::error::{Error, Result};

/// Curvature floor for the two-variable subproblem.
const TAU: f64 = 1e-12;

pub const DEFAULT_KKT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_CACHE_BYTES: usize = 128 << 20;
const MAX_DEFAULT_ITERATIONS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kkt_tolerance: f64,
    /// Pair-update cap. `None` means `1000 · n`, capped at ten million.
    pub max_iterations: Option<usize>,
    pub kernel_cache_bytes: usize,
    /// Recorded for reproducibility; the solver makes no random choices.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            kkt_tolerance: DEFAULT_KKT_TOLERANCE,
            max_iterations: None,
            kernel_cache_bytes: DEFAULT_CACHE_BYTES,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (1000 * n).min(MAX_DEFAULT_ITERATIONS))
    }

    fn validate(&self) -> Result<()> {
        if !(self.kkt_tolerance.is_finite() && self.kkt_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kkt tolerance must be positive, got {}",
                self.kkt_tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidArgument("max iterations must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Full dual solution over all training samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal KKT violation `max_{I_up} −yG − min_{I_low} −yG`.
    pub max_violation: f64,
}

fn check_inputs(rows: &ArrayView2<f64>, y: &[f64], costs: &[f64]) -> Result<()> {
    let n = rows.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    for len in [y.len(), costs.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument(format!(
            "labels must be ±1, got {bad}"
        )));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    if let Some(bad) = costs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "per-sample cost must be positive, got {bad}"
        )));
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "training rows contain non-finite values".into(),
        ));
    }
    Ok(())
}

struct Solver<'a> {
    y: &'a [f64],
    caps: &'a [f64],
    alpha: Vec<f64>,
    grad: Vec<f64>,
    diag: Vec<f64>,
    kernel: KernelRows<'a>,
}

impl Solver<'_> {
    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.caps[t]
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.caps[t]
        }
    }

    /// Maximal violating pair and its violation; ties go to the lower index.
    fn select(&self) -> (Option<usize>, Option<usize>, f64, f64) {
        let (mut i, mut j) = (None, None);
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        for t in 0..self.alpha.len() {
            let v = -self.y[t] * self.grad[t];
            if self.in_up(t) && v > gmax {
                gmax = v;
                i = Some(t);
            }
            if self.in_low(t) && v < gmin {
                gmin = v;
                j = Some(t);
            }
        }
        (i, j, gmax, gmin)
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let ki = self.kernel.row(i);
        let kj = self.kernel.row(j);
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ci, cj) = (self.caps[i], self.caps[j]);
        let q_ij = yi * yj * ki[j];
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let quad = (self.diag[i] + self.diag[j] + 2.0 * q_ij).max(TAU);
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let quad = (self.diag[i] + self.diag[j] - 2.0 * q_ij).max(TAU);
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }

        // rounding in the clipped branches can leave a hair outside the box
        ai = ai.clamp(0.0, ci);
        aj = aj.clamp(0.0, cj);
        self.alpha[i] = ai;
        self.alpha[j] = aj;

        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..self.grad.len() {
            self.grad[t] += self.y[t] * (yi * ki[t] * di + yj * kj[t] * dj);
        }
    }

    /// Average residual over free support vectors, or the midpoint of the
    /// feasible interval when every multiplier sits at a bound.
    fn bias(&self, gmax: f64, gmin: f64) -> f64 {
        let (sum, count) = (0..self.alpha.len())
            .filter(|&t| self.alpha[t] > 0.0 && self.alpha[t] < self.caps[t])
            .fold((0.0, 0usize), |(s, c), t| {
                (s - self.y[t] * self.grad[t], c + 1)
            });
        if count > 0 {
            sum / count as f64
        } else {
            let (lo, hi) = (
                if gmax.is_finite() { gmax } else { gmin },
                if gmin.is_finite() { gmin } else { gmax },
            );
            0.5 * (lo + hi)
        }
    }
}

/// Solves the dual and returns every multiplier, for callers (and tests) that
/// need the dense solution rather than a compact model.
pub fn smo_solve(
    rows: ArrayView2<f64>,
    y: &[f64],
    per_sample_cost: &[f64],
    kernel: KernelParams,
    cfg: &TrainConfig,
) -> Result<DualSolution> {
    check_inputs(&rows, y, per_sample_cost)?;
    KernelParams::new(kernel.gamma)?;
    cfg.validate()?;
    if !rows.is_standard_layout() {
        return Err(Error::InvalidArgument(
            "training rows must be row-major".into(),
        ));
    }

    let n = rows.nrows();
    let kernel_rows = KernelRows::new(rows, kernel.gamma, cfg.kernel_cache_bytes);
    let mut solver = Solver {
        y,
        caps: per_sample_cost,
        alpha: vec![0.0; n],
        grad: vec![-1.0; n],
        diag: kernel_rows.diagonal(),
        kernel: kernel_rows,
    };

    let cap = cfg.iteration_cap(n);
    let mut iterations = 0;
    loop {
        let (i, j, gmax, gmin) = solver.select();
        let violation = gmax - gmin;
        let done = match (i, j) {
            (Some(_), Some(_)) => violation <= cfg.kkt_tolerance,
            _ => true,
        };
        if done || iterations >= cap {
            return Ok(DualSolution {
                bias: solver.bias(gmax, gmin),
                alphas: solver.alpha,
                iterations,
                converged: done,
                max_violation: violation.max(0.0),
            });
        }
        solver.update_pair(i.unwrap(), j.unwrap());
        iterations += 1;
    }
}

/// Trains a binary model; non-convergence is reported through
/// [`BinarySvmModel::converged`] rather than as an error.
pub fn smo_train(
    rows: ArrayView2<f64>,
    y: &[f64],
    per_sample_cost: &[f64],
    kernel: KernelParams,
    cfg: &TrainConfig,
) -> Result<BinarySvmModel> {
    let solution = smo_solve(rows, y, per_sample_cost, kernel, cfg)?;
    Ok(BinarySvmModel::from_solution(
        rows,
        y,
        per_sample_cost,
        kernel,
        &solution,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::dual_objective;
    use ndarray::{array, Array2};

    fn tight() -> TrainConfig {
        TrainConfig {
            kkt_tolerance: 1e-9,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn symmetric_pair_has_zero_decision_at_midpoint() {
        let x = array![[-1.0], [1.0]];
        let y = [-1.0, 1.0];
        let model = smo_train(
            x.view(),
            &y,
            &[1.0, 1.0],
            KernelParams { gamma: 0.5 },
            &tight(),
        )
        .unwrap();
        assert!(model.converged());
        assert!(model.decision_value(&[0.0]).unwrap().abs() < 1e-6);
        assert!(model.decision_value(&[1.0]).unwrap() > 0.0);
    }

    #[test]
    fn rejects_single_class_and_bad_costs() {
        let x = array![[0.0], [1.0]];
        let k = KernelParams { gamma: 1.0 };
        assert!(matches!(
            smo_train(
                x.view(),
                &[1.0, 1.0],
                &[1.0, 1.0],
                k,
                &TrainConfig::default()
            ),
            Err(Error::SingleClass)
        ));
        assert!(smo_train(
            x.view(),
            &[1.0, -1.0],
            &[1.0, 0.0],
            k,
            &TrainConfig::default()
        )
        .is_err());
        assert!(smo_train(
            x.view(),
            &[1.0, 0.5],
            &[1.0, 1.0],
            k,
            &TrainConfig::default()
        )
        .is_err());
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let x = Array2::from_shape_fn((12, 2), |(i, j)| ((i * 7 + j * 3) % 5) as f64 * 0.3);
        let y: Vec<f64> = (0..12)
            .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let cfg = TrainConfig {
            max_iterations: Some(1),
            kkt_tolerance: 1e-12,
            ..TrainConfig::default()
        };
        let model =
            smo_train(x.view(), &y, &[10.0; 12], KernelParams { gamma: 1.0 }, &cfg).unwrap();
        assert!(!model.converged());
        assert_eq!(model.iterations(), 1);
    }

    #[test]
    fn cache_setting_does_not_change_result() {
        let x = Array2::from_shape_fn((30, 3), |(i, j)| {
            (((i * 31 + j * 17) % 23) as f64 - 11.0) / 5.0
        });
        let y: Vec<f64> = (0..30)
            .map(|i| if (i * 13) % 5 < 2 { 1.0 } else { -1.0 })
            .collect();
        let costs: Vec<f64> = (0..30).map(|i| 0.5 + (i % 4) as f64).collect();
        let k = KernelParams { gamma: 0.7 };
        let with = smo_solve(x.view(), &y, &costs, k, &TrainConfig::default()).unwrap();
        let without = smo_solve(
            x.view(),
            &y,
            &costs,
            k,
            &TrainConfig {
                kernel_cache_bytes: 0,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let tiny = smo_solve(
            x.view(),
            &y,
            &costs,
            k,
            &TrainConfig {
                kernel_cache_bytes: 3 * 30 * 8,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(with, without);
        assert_eq!(with, tiny);
    }

    #[test]
    fn solution_is_feasible_and_improves_on_zero() {
        let x = Array2::from_shape_fn((20, 2), |(i, j)| ((i * 11 + j * 5) % 9) as f64 / 3.0);
        let y: Vec<f64> = (0..20)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let costs: Vec<f64> = (0..20).map(|i| 0.1 + i as f64 * 0.2).collect();
        let k = KernelParams { gamma: 2.0 };
        let sol = smo_solve(x.view(), &y, &costs, k, &TrainConfig::default()).unwrap();
        assert!(sol.converged);
        for (a, c) in sol.alphas.iter().zip(&costs) {
            assert!(*a >= 0.0 && a <= c);
        }
        let balance: f64 = sol.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() <= 1e-3);
        assert!(dual_objective(&sol.alphas, x.view(), &y, k).unwrap() > 0.0);
    }
}
