//! Staging classifier for pretrained-network feature vectors with sex and age
//! demographics.
//!
//! The pipeline: load a feature table ([`dataset`]), append demographics and
//! standardize, train one class-weighted RBF SVM per class ([`svm`],
//! [`multiclass`]), and evaluate with leave-one-out, repeated hold-out or
//! learning curves ([`harness`]) reported through per-class metrics
//! ([`metrics`]).

pub mod dataset;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod multiclass;
pub mod svm;
pub mod synthetic;
pub mod util;

pub use dataset::{Dataset, FeatureRecord, Sex};
pub use error::{Error, Result};
pub use metrics::{ClassMetrics, MetricsReport};
pub use multiclass::{HyperParams, MulticlassModel};
pub use svm::{BinarySvmModel, KernelParams, TrainConfig};
