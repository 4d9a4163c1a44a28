use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::kernel::{rbf, KernelParams};
use super::smo::DualSolution;
use crate::error::{Error, Result};
use crate::util::write_atomic;

/// A trained binary RBF classifier in support-vector form:
/// `f(x) = Σ coef_s · K(sv_s, x) + bias` with `coef_s = α_s · y_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmModel {
    support_vectors: Array2<f64>,
    coefficients: Vec<f64>,
    caps: Vec<f64>,
    support_indices: Vec<usize>,
    bias: f64,
    kernel: KernelParams,
    n_train: usize,
    converged: bool,
    iterations: usize,
    max_violation: f64,
}

impl BinarySvmModel {
    pub(crate) fn from_solution(
        rows: ArrayView2<f64>,
        y: &[f64],
        caps: &[f64],
        kernel: KernelParams,
        solution: &DualSolution,
    ) -> Self {
        let support_indices: Vec<usize> = solution
            .alphas
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, _)| i)
            .collect();
        let dim = rows.ncols();
        let mut support_vectors = Array2::zeros((support_indices.len(), dim));
        for (s, &i) in support_indices.iter().enumerate() {
            support_vectors.row_mut(s).assign(&rows.row(i));
        }
        BinarySvmModel {
            support_vectors,
            coefficients: support_indices
                .iter()
                .map(|&i| solution.alphas[i] * y[i])
                .collect(),
            caps: support_indices.iter().map(|&i| caps[i]).collect(),
            support_indices,
            bias: solution.bias,
            kernel,
            n_train: rows.nrows(),
            converged: solution.converged,
            iterations: solution.iterations,
            max_violation: solution.max_violation,
        }
    }

    /// A model with no support vectors: `f(x) = bias` everywhere.
    pub fn constant(dim: usize, bias: f64, kernel: KernelParams) -> Self {
        BinarySvmModel {
            support_vectors: Array2::zeros((0, dim)),
            coefficients: Vec::new(),
            caps: Vec::new(),
            support_indices: Vec::new(),
            bias,
            kernel,
            n_train: 0,
            converged: true,
            iterations: 0,
            max_violation: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.support_vectors.ncols()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn kernel(&self) -> KernelParams {
        self.kernel
    }

    pub fn support_vectors(&self) -> ArrayView2<'_, f64> {
        self.support_vectors.view()
    }

    /// Signed multipliers `α_s · y_s`, one per support vector.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Upper bounds `C_s` the support vectors were trained with.
    pub fn caps(&self) -> &[f64] {
        &self.caps
    }

    /// Positions of the support vectors in the training rows.
    pub fn support_indices(&self) -> &[usize] {
        &self.support_indices
    }

    pub fn n_support(&self) -> usize {
        self.coefficients.len()
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn max_violation(&self) -> f64 {
        self.max_violation
    }

    /// Dense multipliers over the training set (zero for non-support samples).
    pub fn dual_alphas(&self) -> Vec<f64> {
        let mut alphas = vec![0.0; self.n_train];
        for (&i, c) in self.support_indices.iter().zip(&self.coefficients) {
            alphas[i] = c.abs();
        }
        alphas
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(self.decision_unchecked(x))
    }

    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .outer_iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| {
                c * rbf(
                    sv.as_slice().expect("owned rows are contiguous"),
                    x,
                    self.kernel.gamma,
                )
            })
            .sum::<f64>()
            + self.bias
    }

    /// `+1` or `−1`; a zero decision value counts as `+1`.
    pub fn predict_sign(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.decision_value(x)? >= 0.0 {
            1.0
        } else {
            -1.0
        })
    }

    /// Writes a JSON header and a little-endian binary32 block holding, in
    /// order, the support-vector rows, the coefficients and the caps.
    pub fn save(&self, header_path: &Path, data_path: &Path) -> Result<()> {
        let data_file = data_path
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| {
                Error::InvalidArgument(format!("bad data path {}", data_path.display()))
            })?
            .to_string();
        let header = ModelHeader {
            version: MODEL_VERSION,
            kernel: "rbf".into(),
            gamma: self.kernel.gamma,
            bias: self.bias,
            n_support: self.n_support(),
            dim: self.dim(),
            n_train: self.n_train,
            converged: self.converged,
            iterations: self.iterations,
            max_violation: self.max_violation,
            support_indices: self.support_indices.clone(),
            data_file,
        };
        let mut block = Vec::with_capacity(4 * self.n_support() * (self.dim() + 2));
        let values = self
            .support_vectors
            .iter()
            .chain(&self.coefficients)
            .chain(&self.caps);
        for v in values {
            block.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        let mut json =
            serde_json::to_vec_pretty(&header).map_err(|e| Error::json(header_path, e))?;
        json.push(b'\n');
        write_atomic(data_path, &block)?;
        write_atomic(header_path, &json)
    }

    pub fn load(header_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
        let header: ModelHeader =
            serde_json::from_str(&text).map_err(|e| Error::json(header_path, e))?;
        if header.version != MODEL_VERSION || header.kernel != "rbf" {
            return Err(Error::Format(format!(
                "{}: unsupported model version {} / kernel {}",
                header_path.display(),
                header.version,
                header.kernel
            )));
        }
        let kernel = KernelParams::new(header.gamma)?;
        let data_path = header_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&header.data_file);
        let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
        let (n_sv, dim) = (header.n_support, header.dim);
        let expected = 4 * n_sv as u64 * (dim as u64 + 2);
        if bytes.len() as u64 != expected {
            return Err(Error::ShortPayload {
                path: data_path,
                expected,
                actual: bytes.len() as u64,
            });
        }
        if header.support_indices.len() != n_sv {
            return Err(Error::Format(
                "support index count disagrees with n_support".into(),
            ));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
            .collect();
        let (svs, rest) = values.split_at(n_sv * dim);
        let (coefficients, caps) = rest.split_at(n_sv);
        Ok(BinarySvmModel {
            support_vectors: Array2::from_shape_vec((n_sv, dim), svs.to_vec())
                .expect("length checked above"),
            coefficients: coefficients.to_vec(),
            caps: caps.to_vec(),
            support_indices: header.support_indices,
            bias: header.bias,
            kernel,
            n_train: header.n_train,
            converged: header.converged,
            iterations: header.iterations,
            max_violation: header.max_violation,
        })
    }

    /// The same model with every stored array value rounded to binary32, i.e.
    /// what [`save`](Self::save) followed by [`load`](Self::load) yields.
    pub fn rounded_to_f32(&self) -> Self {
        let round = |v: &f64| f64::from(*v as f32);
        BinarySvmModel {
            support_vectors: self.support_vectors.map(round),
            coefficients: self.coefficients.iter().map(round).collect(),
            caps: self.caps.iter().map(round).collect(),
            ..self.clone()
        }
    }
}

const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    version: u32,
    kernel: String,
    gamma: f64,
    bias: f64,
    n_support: usize,
    dim: usize,
    n_train: usize,
    converged: bool,
    iterations: usize,
    max_violation: f64,
    support_indices: Vec<usize>,
    data_file: String,
}
