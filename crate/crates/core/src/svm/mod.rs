//! Binary soft-margin SVM with an RBF kernel and per-sample costs.

mod dual;
mod kernel;
mod model;
mod smo;

pub use dual::dual_objective;
pub use kernel::{rbf_kernel, KernelParams};
pub use model::BinarySvmModel;
pub use smo::{
    smo_solve, smo_train, DualSolution, TrainConfig, DEFAULT_CACHE_BYTES, DEFAULT_KKT_TOLERANCE,
};
