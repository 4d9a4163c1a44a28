//! Feature tables: subject records, class schemas, and everything that turns
//! them into training inputs (demographic encoding, scaling, class weights,
//! and the splits used by the evaluation protocols).

mod format;
mod split;
mod standardize;
mod weights;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{load_dataset, read_csv, write_csv, write_dataset, Manifest, ManifestRecord};
pub use split::{
    apportion, loo_folds, nested_subset_indices, nested_subsets, stratified_split,
    stratified_split_indices, Fold,
};
pub use standardize::{apply_standardizer, fit_standardizer, Standardizer};
pub use weights::{class_weights, ClassWeights};

/// Oldest age accepted for a subject, in years.
pub const MAX_AGE: f64 = 130.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
}

impl Sex {
    /// Numeric code appended to the feature vector: F is 0, M is 1.
    pub fn code(self) -> f64 {
        match self {
            Sex::Female => 0.0,
            Sex::Male => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sex {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "F" => Ok(Sex::Female),
            "M" => Ok(Sex::Male),
            other => Err(format!("sex must be \"F\" or \"M\", got {other:?}")),
        }
    }
}

/// One subject: the extracted feature vector plus demographics and stage label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub id: String,
    pub features: Vec<f32>,
    pub sex: Sex,
    pub age: f64,
    pub label: String,
}

impl FeatureRecord {
    /// Checks the per-record invariants that do not depend on the owning table.
    pub fn validate(&self) -> Result<()> {
        if let Some(pos) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                id: self.id.clone(),
                field: format!("feature {pos}"),
            });
        }
        if !self.age.is_finite() {
            return Err(Error::NonFinite {
                id: self.id.clone(),
                field: "age".into(),
            });
        }
        if !(0.0..=MAX_AGE).contains(&self.age) {
            return Err(Error::InvalidRecord {
                id: self.id.clone(),
                reason: format!("age {} outside [0, {MAX_AGE}]", self.age),
            });
        }
        Ok(())
    }
}

/// Features followed by the sex code and the age: a vector of length `d + 2`.
pub fn concat_demographics(record: &FeatureRecord) -> Vec<f64> {
    let mut row = Vec::with_capacity(record.features.len() + 2);
    row.extend(record.features.iter().map(|&v| f64::from(v)));
    row.push(record.sex.code());
    row.push(record.age);
    row
}

/// An ordered, validated collection of records sharing one dimension and class schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<FeatureRecord>,
    dim: usize,
    schema: Vec<String>,
    provenance: String,
}

pub(crate) fn validate_schema(schema: &[String]) -> Result<()> {
    if schema.len() < 2 {
        return Err(Error::InvalidSchema(format!(
            "need at least 2 classes, got {}",
            schema.len()
        )));
    }
    let mut seen = HashSet::new();
    for class in schema {
        if !seen.insert(class.as_str()) {
            return Err(Error::InvalidSchema(format!("duplicate class '{class}'")));
        }
    }
    Ok(())
}

impl Dataset {
    pub fn new(
        records: Vec<FeatureRecord>,
        dim: usize,
        schema: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "feature dimension must be ≥ 1".into(),
            ));
        }
        validate_schema(&schema)?;
        let mut ids = HashSet::with_capacity(records.len());
        for record in &records {
            if record.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: record.features.len(),
                });
            }
            if !schema.contains(&record.label) {
                return Err(Error::UnknownLabel {
                    id: record.id.clone(),
                    label: record.label.clone(),
                });
            }
            if !ids.insert(record.id.as_str()) {
                return Err(Error::DuplicateId(record.id.clone()));
            }
            record.validate()?;
        }
        Ok(Dataset {
            records,
            dim,
            schema,
            provenance: provenance.into(),
        })
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn labels(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.id.as_str()).collect()
    }

    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.schema.iter().position(|c| c == class)
    }

    /// Number of records per schema class, in schema order.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.schema.len()];
        for record in &self.records {
            // labels are validated against the schema on construction
            let k = self.class_index(&record.label).expect("label in schema");
            counts[k] += 1;
        }
        counts
    }

    /// Record indices grouped by schema class, preserving record order within a class.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.schema.len()];
        for (i, record) in self.records.iter().enumerate() {
            let k = self.class_index(&record.label).expect("label in schema");
            groups[k].push(i);
        }
        groups
    }

    /// A new dataset with the records at `indices`, in the given order, same schema.
    pub fn subset(&self, indices: &[usize], provenance: impl Into<String>) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            dim: self.dim,
            schema: self.schema.clone(),
            provenance: provenance.into(),
        }
    }

    /// Same records with the schema reduced to the classes that actually occur.
    ///
    /// Fails when fewer than two classes remain.
    pub fn with_present_classes(&self) -> Result<Dataset> {
        let counts = self.class_counts();
        let schema: Vec<String> = self
            .schema
            .iter()
            .zip(&counts)
            .filter(|(_, &n)| n > 0)
            .map(|(c, _)| c.clone())
            .collect();
        if schema.len() < 2 {
            return Err(Error::SingleClass);
        }
        Ok(Dataset {
            records: self.records.clone(),
            dim: self.dim,
            schema,
            provenance: self.provenance.clone(),
        })
    }

    /// Returns an `AbsentClass` error naming the first schema class with no records.
    pub fn require_all_classes(&self, context: &str) -> Result<()> {
        let counts = self.class_counts();
        match self.schema.iter().zip(&counts).find(|(_, &n)| n == 0) {
            Some((class, _)) => Err(Error::AbsentClass {
                class: class.clone(),
                context: if context.is_empty() {
                    String::new()
                } else {
                    format!(" ({context})")
                },
            }),
            None => Ok(()),
        }
    }
}
