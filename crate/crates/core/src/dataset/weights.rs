use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Balancing weights: each class gets `N / (K · count(c))`, so every class
/// contributes the same total weight `N / K` and the totals sum back to `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    entries: Vec<(String, f64)>,
}

impl ClassWeights {
    /// Uniform weight 1 for every class.
    pub fn uniform(schema: &[String]) -> Self {
        ClassWeights {
            entries: schema.iter().map(|c| (c.clone(), 1.0)).collect(),
        }
    }

    pub fn get(&self, class: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(c, _)| c == class)
            .map(|&(_, w)| w)
    }

    /// Weights in schema order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(c, w)| (c.as_str(), *w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn class_weights<S: AsRef<str>>(labels: &[S], schema: &[String]) -> Result<ClassWeights> {
    if labels.is_empty() {
        return Err(Error::Empty("no labels to weight"));
    }
    let mut counts = vec![0usize; schema.len()];
    for label in labels {
        let label = label.as_ref();
        let k = schema
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel {
                id: String::new(),
                label: label.to_string(),
            })?;
        counts[k] += 1;
    }
    let n = labels.len() as f64;
    let k = schema.len() as f64;
    let entries = schema
        .iter()
        .zip(&counts)
        .map(|(class, &count)| {
            if count == 0 {
                Err(Error::AbsentClass {
                    class: class.clone(),
                    context: " (class weight undefined)".into(),
                })
            } else {
                Ok((class.clone(), n / (k * count as f64)))
            }
        })
        .collect::<Result<_>>()?;
    Ok(ClassWeights { entries })
}
