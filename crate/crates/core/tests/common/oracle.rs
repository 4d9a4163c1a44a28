//! Reference implementations used as test oracles. Nothing here calls into
//! the library: every quantity is recomputed from first principles.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// A small binary SVM dual problem.
#[derive(Debug, Clone)]
pub struct QpInstance {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub caps: Vec<f64>,
    pub gamma: f64,
}

impl QpInstance {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.x
            .iter()
            .map(|a| self.x.iter().map(|b| rbf(a, b, self.gamma)).collect())
            .collect()
    }

    /// `Σ α − ½ Σ α_i α_j y_i y_j K_ij`.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        let k = self.gram();
        let mut quad = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                quad += alpha[i] * alpha[j] * self.y[i] * self.y[j] * k[i][j];
            }
        }
        alpha.iter().sum::<f64>() - 0.5 * quad
    }

    pub fn flat_rows(&self) -> Vec<f64> {
        self.x.iter().flatten().copied().collect()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }
}

/// Random instance with `2 ≤ n ≤ 8` points in the plane. Even seeds get
/// linearly separable labels, odd seeds random ones; both classes always occur.
pub fn random_instance(seed: u64) -> QpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=8usize);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let separable = seed.is_multiple_of(2);
    let (w0, w1, b) = (
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-0.5..0.5),
    );
    let mut y: Vec<f64> = x
        .iter()
        .map(|p| {
            let s = if separable {
                w0 * p[0] + w1 * p[1] + b
            } else {
                rng.random_range(-1.0..1.0)
            };
            if s >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    if y.iter().all(|&v| v == y[0]) {
        y[n - 1] = -y[0];
    }
    let caps = (0..n)
        .map(|_| 10f64.powf(rng.random_range(-1.0..1.3)))
        .collect();
    let gamma = 10f64.powf(rng.random_range(-1.0..0.5));
    QpInstance { x, y, caps, gamma }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

impl QpSolution {
    pub fn decision(&self, inst: &QpInstance, p: &[f64]) -> f64 {
        inst.x
            .iter()
            .zip(&self.alpha)
            .zip(&inst.y)
            .map(|((xi, a), yi)| a * yi * rbf(xi, p, inst.gamma))
            .sum::<f64>()
            + self.bias
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (r, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exact dual optimum by enumerating every assignment of each multiplier to
/// {0, C_i, free}. For a free set F the stationarity conditions
/// `y_i f(x_i) = 1 (i ∈ F)` and `Σ α_i y_i = 0` form a linear system in
/// (α_F, b); the best feasible candidate is the optimum of the concave QP.
pub fn brute_force_qp(inst: &QpInstance) -> QpSolution {
    let n = inst.n();
    assert!(n <= 10, "enumeration is exponential");
    let k = inst.gram();
    let tol = 1e-10;
    let mut best: Option<(f64, Vec<f64>, Option<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = (0..n)
            .map(|i| if state[i] == 1 { inst.caps[i] } else { 0.0 })
            .collect();
        let mut bias = None;
        if free.is_empty() {
            let eq: f64 = alpha.iter().zip(&inst.y).map(|(a, y)| a * y).sum();
            if eq.abs() > 1e-9 {
                continue;
            }
        } else {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    a[r][c] = inst.y[i] * inst.y[j] * k[i][j];
                }
                a[r][m] = inst.y[i];
                let bound: f64 = (0..n)
                    .filter(|&j| state[j] == 1)
                    .map(|j| inst.y[i] * inst.y[j] * k[i][j] * inst.caps[j])
                    .sum();
                rhs[r] = 1.0 - bound;
            }
            for (c, &j) in free.iter().enumerate() {
                a[m][c] = inst.y[j];
            }
            rhs[m] = -(0..n)
                .filter(|&j| state[j] == 1)
                .map(|j| inst.y[j] * inst.caps[j])
                .sum::<f64>();
            let Some(sol) = solve_linear(a, rhs) else {
                continue;
            };
            if free
                .iter()
                .zip(&sol)
                .any(|(&i, &v)| v < -tol || v > inst.caps[i] + tol)
            {
                continue;
            }
            for (&i, &v) in free.iter().zip(&sol) {
                alpha[i] = v.clamp(0.0, inst.caps[i]);
            }
            bias = Some(sol[m]);
        }
        let w = inst.objective(&alpha);
        if best.as_ref().is_none_or(|(bw, _, _)| w > *bw) {
            best = Some((w, alpha, bias));
        }
    }
    let (objective, alpha, bias) = best.expect("α = 0 is always feasible");
    let bias = bias.unwrap_or_else(|| bound_only_bias(inst, &k, &alpha));
    QpSolution {
        alpha,
        bias,
        objective,
    }
}

/// With no free multiplier the bias is only bracketed by the bound ones;
/// take the midpoint of the feasible interval.
fn bound_only_bias(inst: &QpInstance, k: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let n = inst.n();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let g: f64 = (0..n).map(|j| alpha[j] * inst.y[j] * k[i][j]).sum();
        // y_i (g + b) ≥ 1 when α_i = 0, ≤ 1 when α_i = C_i
        let at_zero = alpha[i] == 0.0;
        let limit = inst.y[i] - g;
        if (inst.y[i] > 0.0) == at_zero {
            lo = lo.max(limit);
        } else {
            hi = hi.min(limit);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

/// Per-class (tp, fn, fp, tn) by direct counting, in schema order.
pub fn count_confusions(truth: &[&str], pred: &[&str], schema: &[&str]) -> Vec<[u64; 4]> {
    schema
        .iter()
        .map(|&c| {
            let mut cell = [0u64; 4];
            for (t, p) in truth.iter().zip(pred) {
                let idx = match (*t == c, *p == c) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                cell[idx] += 1;
            }
            cell
        })
        .collect()
}

/// Leave-one-out accuracy of the nearest class centroid in raw feature space.
pub fn nearest_centroid_loo_accuracy(points: &[Vec<f64>], labels: &[&str]) -> f64 {
    let mut correct = 0;
    for held in 0..points.len() {
        let mut sums: HashMap<&str, (Vec<f64>, f64)> = HashMap::new();
        for (i, (p, &l)) in points.iter().zip(labels).enumerate() {
            if i == held {
                continue;
            }
            let e = sums.entry(l).or_insert_with(|| (vec![0.0; p.len()], 0.0));
            for (s, v) in e.0.iter_mut().zip(p) {
                *s += v;
            }
            e.1 += 1.0;
        }
        let q = &points[held];
        let best = sums
            .iter()
            .map(|(l, (s, n))| {
                let d: f64 = s.iter().zip(q).map(|(a, b)| (a / n - b).powi(2)).sum();
                (d, *l)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one class remains")
            .1;
        if best == labels[held] {
            correct += 1;
        }
    }
    correct as f64 / points.len() as f64
}
