use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{random_search, SearchSpace};
use crate::dataset::{loo_folds, nested_subsets, stratified_split, Dataset, Fold};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::multiclass::{train_multiclass, HyperParams, MulticlassModel};
use crate::util::sub_seed;

pub const DEFAULT_REPETITIONS: usize = 50;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;
pub const DEFAULT_CURVE_FRACTIONS: [f64; 7] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
/// Share of the data held out once and reused by every learning-curve point.
pub const CURVE_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    LeaveOneOut,
    HoldOut {
        repetitions: usize,
        train_fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(rename = "true")]
    pub truth: String,
    pub predicted: String,
}

/// One fold or repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub unit: usize,
    pub seed: u64,
    pub hyper_params: HyperParams,
    pub validation_score: f64,
    pub configurations_evaluated: usize,
    pub converged: bool,
    /// Every id seen by the search and by retraining.
    pub train_ids: Vec<String>,
    pub validation_ids: Vec<String>,
    pub predictions: Vec<PredictionRecord>,
    /// Metrics over this unit's test records (hold-out only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub d: usize,
    pub schema: Vec<String>,
    pub class_counts: Vec<usize>,
}

impl DatasetSummary {
    pub fn of(dataset: &Dataset) -> Self {
        DatasetSummary {
            n: dataset.len(),
            d: dataset.dim(),
            schema: dataset.schema().to_vec(),
            class_counts: dataset.class_counts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "stagesvm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub tool: ToolInfo,
    pub protocol: Protocol,
    pub master_seed: u64,
    pub search: SearchSpace,
    pub dataset: DatasetSummary,
    pub units: Vec<UnitRecord>,
    pub aggregate: MetricsReport,
}

impl EvaluationReport {
    /// All pooled `(truth, predicted)` pairs in unit order.
    pub fn pooled_predictions(&self) -> impl Iterator<Item = &PredictionRecord> {
        self.units.iter().flat_map(|u| u.predictions.iter())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Every class needs two records so that no training partition loses it.
fn require_two_per_class(dataset: &Dataset) -> Result<()> {
    for (class, &count) in dataset.schema().iter().zip(&dataset.class_counts()) {
        match count {
            0 => {
                return Err(Error::AbsentClass {
                    class: class.clone(),
                    context: " (evaluation dataset)".into(),
                })
            }
            1 => {
                return Err(Error::SingletonClass {
                    class: class.clone(),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

struct Fitted {
    model: MulticlassModel,
    hyper_params: HyperParams,
    score: f64,
    evaluated: usize,
    validation_ids: Vec<String>,
}

fn search_and_fit(train: &Dataset, space: &SearchSpace, seed: u64) -> Result<Fitted> {
    let outcome = random_search(train, space, seed)?;
    let model = train_multiclass(train, outcome.hyper_params, seed)?;
    Ok(Fitted {
        model,
        hyper_params: outcome.hyper_params,
        score: outcome.score,
        evaluated: outcome.evaluated,
        validation_ids: outcome.validation_ids,
    })
}

fn predict_all(model: &MulticlassModel, test: &Dataset) -> Result<Vec<PredictionRecord>> {
    test.records()
        .iter()
        .map(|r| {
            Ok(PredictionRecord {
                id: r.id.clone(),
                truth: r.label.clone(),
                predicted: model.predict(r)?.to_string(),
            })
        })
        .collect()
}

fn owned_ids(ds: &Dataset) -> Vec<String> {
    ds.ids().into_iter().map(String::from).collect()
}

/// Leave-one-out with a fresh search per fold; metrics come from the pooled
/// predictions of all folds.
pub fn run_loo(dataset: &Dataset, space: &SearchSpace, seed: u64) -> Result<EvaluationReport> {
    space.validate()?;
    require_two_per_class(dataset)?;
    let folds: Vec<Fold> = loo_folds(dataset)?.collect();

    let units = folds
        .par_iter()
        .map(|fold| {
            let unit_seed = sub_seed(seed, fold.index);
            let (train, test) = fold.materialize(dataset);
            let fitted = search_and_fit(&train, space, unit_seed)?;
            let predicted = fitted.model.predict(test)?.to_string();
            Ok(UnitRecord {
                unit: fold.index,
                seed: unit_seed,
                hyper_params: fitted.hyper_params,
                validation_score: fitted.score,
                configurations_evaluated: fitted.evaluated,
                converged: fitted.model.all_converged(),
                train_ids: owned_ids(&train),
                validation_ids: fitted.validation_ids,
                predictions: vec![PredictionRecord {
                    id: test.id.clone(),
                    truth: test.label.clone(),
                    predicted,
                }],
                metrics: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let truth: Vec<&str> = units
        .iter()
        .map(|u| u.predictions[0].truth.as_str())
        .collect();
    let predicted: Vec<&str> = units
        .iter()
        .map(|u| u.predictions[0].predicted.as_str())
        .collect();
    let aggregate = MetricsReport::from_predictions(&truth, &predicted, dataset.schema())?;

    Ok(EvaluationReport {
        tool: ToolInfo::default(),
        protocol: Protocol::LeaveOneOut,
        master_seed: seed,
        search: space.clone(),
        dataset: DatasetSummary::of(dataset),
        units,
        aggregate,
    })
}

/// Repeated stratified hold-out; the aggregate is the field-wise mean of the
/// per-repetition reports.
pub fn run_repeated_holdout(
    dataset: &Dataset,
    repetitions: usize,
    train_fraction: f64,
    space: &SearchSpace,
    seed: u64,
) -> Result<EvaluationReport> {
    space.validate()?;
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be ≥ 1".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    require_two_per_class(dataset)?;

    let units = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let unit_seed = sub_seed(seed, r);
            let (train, test) = stratified_split(dataset, 1.0 - train_fraction, unit_seed)?;
            train.require_all_classes(&format!("training split of repetition {r}"))?;
            let fitted = search_and_fit(&train, space, unit_seed)?;
            let predictions = predict_all(&fitted.model, &test)?;
            let truth: Vec<&str> = predictions.iter().map(|p| p.truth.as_str()).collect();
            let predicted: Vec<&str> = predictions.iter().map(|p| p.predicted.as_str()).collect();
            let metrics = MetricsReport::from_predictions(&truth, &predicted, dataset.schema())?;
            Ok(UnitRecord {
                unit: r,
                seed: unit_seed,
                hyper_params: fitted.hyper_params,
                validation_score: fitted.score,
                configurations_evaluated: fitted.evaluated,
                converged: fitted.model.all_converged(),
                train_ids: owned_ids(&train),
                validation_ids: fitted.validation_ids,
                predictions,
                metrics: Some(metrics),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let per_unit: Vec<MetricsReport> = units
        .iter()
        .map(|u| u.metrics.clone().expect("hold-out units carry metrics"))
        .collect();
    let aggregate = MetricsReport::mean_of(&per_unit)?;

    Ok(EvaluationReport {
        tool: ToolInfo::default(),
        protocol: Protocol::HoldOut {
            repetitions,
            train_fraction,
        },
        master_seed: seed,
        search: space.clone(),
        dataset: DatasetSummary::of(dataset),
        units,
        aggregate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub train_size: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub hyper_params: HyperParams,
    pub validation_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub tool: ToolInfo,
    pub master_seed: u64,
    pub search: SearchSpace,
    pub dataset: DatasetSummary,
    pub test_fraction: f64,
    pub test_ids: Vec<String>,
    pub points: Vec<CurvePoint>,
}

impl CurveReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `fraction,train_accuracy,test_accuracy` with one row per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,train_accuracy,test_accuracy\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.fraction, p.train_accuracy, p.test_accuracy
            ));
        }
        out
    }
}

fn accuracy(model: &MulticlassModel, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Empty("no records to score"));
    }
    let mut correct = 0usize;
    for r in ds.records() {
        if model.predict(r)? == r.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Accuracy as the training set grows through nested subsets of the data
/// left after a fixed stratified test carve-out.
pub fn learning_curve(
    dataset: &Dataset,
    fractions: &[f64],
    space: &SearchSpace,
    seed: u64,
) -> Result<CurveReport> {
    space.validate()?;
    for &f in fractions {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "curve fraction {f} must lie in (0, 1)"
            )));
        }
    }
    let (pool, test) = stratified_split(dataset, CURVE_TEST_FRACTION, seed)?;
    let subsets = nested_subsets(&pool, fractions, seed)?;
    for (subset, f) in subsets.iter().zip(fractions) {
        subset.require_all_classes(&format!("learning-curve fraction {f}"))?;
    }

    let points = subsets
        .par_iter()
        .zip(fractions.par_iter())
        .enumerate()
        .map(|(k, (subset, &fraction))| {
            let fitted = search_and_fit(subset, space, sub_seed(seed, k))?;
            Ok(CurvePoint {
                fraction,
                train_size: subset.len(),
                train_accuracy: accuracy(&fitted.model, subset)?,
                test_accuracy: accuracy(&fitted.model, &test)?,
                hyper_params: fitted.hyper_params,
                validation_score: fitted.score,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CurveReport {
        tool: ToolInfo::default(),
        master_seed: seed,
        search: space.clone(),
        dataset: DatasetSummary::of(dataset),
        test_fraction: CURVE_TEST_FRACTION,
        test_ids: owned_ids(&test),
        points,
    })
}
