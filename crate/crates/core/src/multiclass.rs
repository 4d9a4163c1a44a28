//! One-vs-rest staging classifier.
//!
//! Each class gets a binary RBF model trained with that class as `+1` and all
//! others as `−1`. Sample costs are `C · weight(original class)`, so the
//! balancing weights act on the true classes rather than on the collapsed
//! binary split. Prediction is the argmax of the per-class decision values,
//! with ties going to the earliest class in the schema.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    apply_standardizer, class_weights, concat_demographics, fit_standardizer, ClassWeights,
    Dataset, FeatureRecord, Standardizer,
};
use crate::error::{Error, Result};
use crate::svm::{smo_train, BinarySvmModel, KernelParams, TrainConfig};
use crate::util::{sub_seed, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
}

impl HyperParams {
    pub fn new(c: f64, gamma: f64) -> Result<Self> {
        let hp = HyperParams { c, gamma };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        KernelParams::new(self.gamma).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `N / (K · count(c))` per class.
    Balanced,
    /// Every sample costs `C`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassOptions {
    pub weighting: Weighting,
    pub solver: TrainConfig,
}

impl Default for MulticlassOptions {
    fn default() -> Self {
        MulticlassOptions {
            weighting: Weighting::Balanced,
            solver: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassModel {
    schema: Vec<String>,
    models: Vec<BinarySvmModel>,
    standardizer: Standardizer,
    hyper: HyperParams,
}

/// One row of batch output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: String,
    pub decision_values: Vec<f64>,
}

/// Standardized `d + 2` rows for `records`.
fn design_rows(records: &[FeatureRecord], std: &Standardizer) -> Result<Array2<f64>> {
    let width = std.len();
    let mut data = Vec::with_capacity(records.len() * width);
    for r in records {
        data.extend(apply_standardizer(std, &concat_demographics(r))?);
    }
    Ok(Array2::from_shape_vec((records.len(), width), data).expect("rows have standardizer width"))
}

pub fn train_multiclass(train: &Dataset, hp: HyperParams, seed: u64) -> Result<MulticlassModel> {
    train_multiclass_with(train, hp, seed, &MulticlassOptions::default())
}

pub fn train_multiclass_with(
    train: &Dataset,
    hp: HyperParams,
    seed: u64,
    options: &MulticlassOptions,
) -> Result<MulticlassModel> {
    hp.validate()?;
    let labels = train.labels();
    let weights = match options.weighting {
        Weighting::Balanced => class_weights(&labels, train.schema())?,
        Weighting::Uniform => {
            train.require_all_classes("training set")?;
            ClassWeights::uniform(train.schema())
        }
    };
    if train.len() < 2 {
        return Err(Error::SingleClass);
    }

    let raw: Vec<Vec<f64>> = train.records().iter().map(concat_demographics).collect();
    let standardizer = fit_standardizer(&raw)?;
    let rows = design_rows(train.records(), &standardizer)?;
    let costs: Vec<f64> = labels
        .iter()
        .map(|l| hp.c * weights.get(l).expect("weights cover the schema"))
        .collect();
    let kernel = KernelParams::new(hp.gamma)?;

    let models = train
        .schema()
        .par_iter()
        .enumerate()
        .map(|(k, class)| {
            let y: Vec<f64> = labels
                .iter()
                .map(|l| if l == class { 1.0 } else { -1.0 })
                .collect();
            let cfg = TrainConfig {
                seed: sub_seed(seed, k),
                ..options.solver.clone()
            };
            smo_train(rows.view(), &y, &costs, kernel, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MulticlassModel {
        schema: train.schema().to_vec(),
        models,
        standardizer,
        hyper: hp,
    })
}

impl MulticlassModel {
    /// Assembles a model from parts; every binary model must accept the
    /// standardizer's row width.
    pub fn from_parts(
        schema: Vec<String>,
        models: Vec<BinarySvmModel>,
        standardizer: Standardizer,
        hyper: HyperParams,
    ) -> Result<Self> {
        crate::dataset::validate_schema(&schema)?;
        if models.len() != schema.len() {
            return Err(Error::InvalidArgument(format!(
                "{} binary models for {} classes",
                models.len(),
                schema.len()
            )));
        }
        if standardizer.mean.len() != standardizer.scale.len() || standardizer.len() < 3 {
            return Err(Error::InvalidArgument("malformed standardizer".into()));
        }
        for m in &models {
            if m.dim() != standardizer.len() {
                return Err(Error::DimensionMismatch {
                    expected: standardizer.len(),
                    actual: m.dim(),
                });
            }
        }
        Ok(MulticlassModel {
            schema,
            models,
            standardizer,
            hyper,
        })
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn binary_models(&self) -> &[BinarySvmModel] {
        &self.models
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn hyper_params(&self) -> HyperParams {
        self.hyper
    }

    /// Feature dimension `d` expected from records (without demographics).
    pub fn feature_dim(&self) -> usize {
        self.standardizer.len() - 2
    }

    pub fn all_converged(&self) -> bool {
        self.models.iter().all(BinarySvmModel::converged)
    }

    pub fn decision_values(&self, record: &FeatureRecord) -> Result<Vec<f64>> {
        if record.features.len() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim(),
                actual: record.features.len(),
            });
        }
        let x = apply_standardizer(&self.standardizer, &concat_demographics(record))?;
        Ok(self
            .models
            .iter()
            .map(|m| m.decision_unchecked(&x))
            .collect())
    }

    pub fn predict(&self, record: &FeatureRecord) -> Result<&str> {
        let values = self.decision_values(record)?;
        Ok(&self.schema[argmax(&values)])
    }

    pub fn predict_batch(&self, dataset: &Dataset) -> Result<Vec<Prediction>> {
        dataset
            .records()
            .iter()
            .map(|r| {
                let values = self.decision_values(r).map_err(|e| Error::InvalidRecord {
                    id: r.id.clone(),
                    reason: e.to_string(),
                })?;
                Ok(Prediction {
                    id: r.id.clone(),
                    label: self.schema[argmax(&values)].clone(),
                    decision_values: values,
                })
            })
            .collect()
    }

    /// Writes `index.json` plus one header/data pair per class into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut entries = Vec::with_capacity(self.models.len());
        for (k, (class, model)) in self.schema.iter().zip(&self.models).enumerate() {
            let header = format!("class_{k}.json");
            let data = format!("class_{k}.f32");
            model.save(&dir.join(&header), &dir.join(&data))?;
            entries.push(BundleEntry {
                class: class.clone(),
                model: header,
            });
        }
        let index = BundleIndex {
            version: BUNDLE_VERSION,
            schema: self.schema.clone(),
            hyper_params: self.hyper,
            standardizer: self.standardizer.clone(),
            models: entries,
        };
        let path = dir.join("index.json");
        let mut json = serde_json::to_vec_pretty(&index).map_err(|e| Error::json(&path, e))?;
        json.push(b'\n');
        write_atomic(&path, &json)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("index.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let index: BundleIndex = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
        if index.version != BUNDLE_VERSION {
            return Err(Error::Format(format!("bundle version {}", index.version)));
        }
        if index
            .models
            .iter()
            .map(|e| &e.class)
            .ne(index.schema.iter())
        {
            return Err(Error::Format(
                "bundle models are not in schema order".into(),
            ));
        }
        let models = index
            .models
            .iter()
            .map(|e| BinarySvmModel::load(&dir.join(&e.model)))
            .collect::<Result<Vec<_>>>()?;
        index.hyper_params.validate()?;
        MulticlassModel::from_parts(index.schema, models, index.standardizer, index.hyper_params)
    }
}

/// Index of the largest value; the earliest wins ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct BundleEntry {
    class: String,
    model: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleIndex {
    version: u32,
    schema: Vec<String>,
    hyper_params: HyperParams,
    standardizer: Standardizer,
    models: Vec<BundleEntry>,
}
