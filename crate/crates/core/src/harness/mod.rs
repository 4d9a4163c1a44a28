//! Evaluation protocols: leave-one-out, repeated hold-out and learning
//! curves, each with a per-unit random hyperparameter search.
//!
//! Units (folds, repetitions, curve points) run in parallel on the current
//! rayon pool. Every unit derives its seed from the master seed and its index
//! and results are collected in unit order, so reports do not depend on the
//! number of threads.

mod protocols;
mod search;

pub use protocols::{
    learning_curve, run_loo, run_repeated_holdout, CurvePoint, CurveReport, DatasetSummary,
    EvaluationReport, PredictionRecord, Protocol, ToolInfo, UnitRecord, CURVE_TEST_FRACTION,
    DEFAULT_CURVE_FRACTIONS, DEFAULT_REPETITIONS, DEFAULT_TRAIN_FRACTION,
};
pub use search::{random_search, validation_size, SearchOutcome, SearchSpace, VALIDATION_FRACTION};
