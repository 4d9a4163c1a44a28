use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{apportion, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, per_class_confusions};
use crate::multiclass::{train_multiclass, HyperParams};
use crate::util::sub_seed;

/// Share of the training partition held out for scoring configurations.
pub const VALIDATION_FRACTION: f64 = 0.01;

/// Log-uniform ranges for `C` and `gamma`, the number of configurations to
/// try, and how many consecutive non-improving ones end the search early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    #[serde(rename = "C")]
    pub c: (f64, f64),
    pub gamma: (f64, f64),
    pub budget: usize,
    pub patience: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            c: (1e-2, 1e3),
            gamma: (1e-6, 1e1),
            budget: 30,
            patience: 10,
        }
    }
}

impl SearchSpace {
    /// A space that always yields exactly `hp`.
    pub fn point(hp: HyperParams) -> Self {
        SearchSpace {
            c: (hp.c, hp.c),
            gamma: (hp.gamma, hp.gamma),
            budget: 1,
            patience: 1,
        }
    }

    /// Ranges must be positive and ordered; a collapsed range (`low == high`)
    /// is allowed and pins that parameter.
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("C", self.c), ("gamma", self.gamma)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "{name} range [{lo}, {hi}] must be positive with low ≤ high"
                )));
            }
        }
        if self.budget == 0 || self.patience == 0 {
            return Err(Error::InvalidArgument(
                "budget and patience must be ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

fn log_uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    let u: f64 = rng.random();
    if lo == hi {
        return lo;
    }
    let (a, b) = (lo.ln(), hi.ln());
    (a + u * (b - a)).exp().clamp(lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub hyper_params: HyperParams,
    /// Validation macro-average recall of the chosen configuration.
    pub score: f64,
    pub evaluated: usize,
    pub validation_ids: Vec<String>,
}

/// `max(1, ceil(fraction · n))`.
pub fn validation_size(n: usize) -> usize {
    ((n as f64 * VALIDATION_FRACTION).ceil() as usize).max(1)
}

/// Validation indices per class: proportional quotas, but never the last
/// record of a class. `None` when no class can spare enough records.
fn stratified_carve(groups: &[Vec<usize>], size: usize) -> Option<Vec<usize>> {
    let counts: Vec<usize> = groups.iter().map(Vec::len).collect();
    let n: usize = counts.iter().sum();
    let spare: Vec<usize> = counts.iter().map(|c| c.saturating_sub(1)).collect();
    if spare.iter().sum::<usize>() < size {
        return None;
    }
    let mut alloc = apportion(&counts, size);
    let mut overflow = 0;
    for (a, &s) in alloc.iter_mut().zip(&spare) {
        if *a > s {
            overflow += *a - s;
            *a = s;
        }
    }
    while overflow > 0 {
        // largest deficit against the exact quota, in integer units of 1/n
        let k = (0..counts.len())
            .filter(|&k| alloc[k] < spare[k])
            .max_by_key(|&k| {
                (
                    (counts[k] * size) as i128 - (alloc[k] * n) as i128,
                    std::cmp::Reverse(k),
                )
            })
            .expect("total spare capacity covers the request");
        alloc[k] += 1;
        overflow -= 1;
    }
    Some(
        groups
            .iter()
            .zip(alloc)
            .flat_map(|(g, take)| g[..take].iter().copied())
            .collect(),
    )
}

/// Splits `train` into (fit indices, validation indices), both sorted.
fn carve_validation(train: &Dataset, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let n = train.len();
    let size = validation_size(n);
    let mut groups = train.indices_by_class();
    for g in &mut groups {
        g.shuffle(rng);
    }
    let mut validation = stratified_carve(&groups, size).unwrap_or_else(|| {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        all.truncate(size);
        all
    });
    validation.sort_unstable();
    let fit = (0..n)
        .filter(|i| validation.binary_search(i).is_err())
        .collect();
    (fit, validation)
}

/// Macro-average recall over the classes that occur in `truth`.
fn validation_score(truth: &[&str], predicted: &[&str], schema: &[String]) -> Result<f64> {
    let confusions = per_class_confusions(truth, predicted, schema)?;
    let mut sum = 0.0;
    let mut present = 0usize;
    for cm in confusions.iter().filter(|cm| cm.tp + cm.fn_ > 0) {
        sum += compute_metrics(cm)?.recall;
        present += 1;
    }
    Ok(if present == 0 {
        0.0
    } else {
        sum / present as f64
    })
}

/// Random search scored on a small validation carve-out.
///
/// The carve-out keeps at least one record of every class in the fitting
/// part whenever the class counts allow it; otherwise it is drawn without
/// stratification and the fitting part is trained on the classes it still
/// contains.
pub fn random_search(train: &Dataset, space: &SearchSpace, seed: u64) -> Result<SearchOutcome> {
    space.validate()?;
    if train.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "random search needs at least 2 training records, got {}",
            train.len()
        )));
    }
    let present = train.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::SingleClass);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fit_idx, val_idx) = carve_validation(train, &mut rng);
    let fit = train
        .subset(&fit_idx, format!("{} [search fit]", train.provenance()))
        .with_present_classes()?;
    let val = train.subset(&val_idx, format!("{} [validation]", train.provenance()));
    let truth = val.labels();

    let mut best: Option<(HyperParams, f64)> = None;
    let mut stale = 0;
    let mut evaluated = 0;
    for t in 0..space.budget {
        let hp = HyperParams {
            c: log_uniform(&mut rng, space.c),
            gamma: log_uniform(&mut rng, space.gamma),
        };
        let model = train_multiclass(&fit, hp, sub_seed(seed, t))?;
        let predicted = val
            .records()
            .iter()
            .map(|r| model.predict(r))
            .collect::<Result<Vec<&str>>>()?;
        let score = validation_score(&truth, &predicted, train.schema())?;
        evaluated += 1;
        match best {
            Some((_, s)) if score <= s => {
                stale += 1;
                if stale >= space.patience {
                    break;
                }
            }
            _ => {
                best = Some((hp, score));
                stale = 0;
            }
        }
    }
    let (hyper_params, score) = best.expect("budget ≥ 1 evaluates a configuration");
    Ok(SearchOutcome {
        hyper_params,
        score,
        evaluated,
        validation_ids: val.ids().into_iter().map(String::from).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureRecord, Sex};

    fn dataset(counts: &[usize]) -> Dataset {
        let schema: Vec<String> = (0..counts.len()).map(|k| format!("c{k}")).collect();
        let mut records = Vec::new();
        for (k, &c) in counts.iter().enumerate() {
            for i in 0..c {
                let jitter = (i as f32 * 0.37).sin() * 0.3;
                records.push(FeatureRecord {
                    id: format!("c{k}-{i}"),
                    features: vec![4.0 * k as f32 + jitter, jitter],
                    sex: if i % 2 == 0 { Sex::Female } else { Sex::Male },
                    age: 60.0 + i as f64 % 9.0,
                    label: schema[k].clone(),
                });
            }
        }
        Dataset::new(records, 2, schema, "search").unwrap()
    }

    #[test]
    fn validation_size_is_one_percent_rounded_up() {
        assert_eq!(validation_size(435), 5);
        assert_eq!(validation_size(59), 1);
        assert_eq!(validation_size(1), 1);
        assert_eq!(validation_size(1394), 14);
    }

    #[test]
    fn carve_keeps_one_of_each_class() {
        let groups = vec![vec![0, 1], vec![2], vec![3, 4, 5, 6]];
        let v = stratified_carve(&groups, 3).unwrap();
        assert_eq!(v.len(), 3);
        assert!(!v.contains(&2));
        assert!(v.iter().filter(|&&i| i < 2).count() <= 1);
        assert!(stratified_carve(&[vec![0], vec![1]], 1).is_none());
    }

    #[test]
    fn single_budget_returns_the_sampled_configuration() {
        let ds = dataset(&[10, 10]);
        let space = SearchSpace {
            budget: 1,
            ..SearchSpace::default()
        };
        let out = random_search(&ds, &space, 5).unwrap();
        assert_eq!(out.evaluated, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        carve_validation(&ds, &mut rng);
        let c = log_uniform(&mut rng, space.c);
        let g = log_uniform(&mut rng, space.gamma);
        assert_eq!(out.hyper_params, HyperParams { c, gamma: g });
    }

    #[test]
    fn collapsed_space_returns_its_point() {
        let ds = dataset(&[8, 9, 7]);
        let hp = HyperParams {
            c: 3.5,
            gamma: 0.25,
        };
        let space = SearchSpace {
            budget: 4,
            ..SearchSpace::point(hp)
        };
        let out = random_search(&ds, &space, 1).unwrap();
        assert_eq!(out.hyper_params, hp);
    }

    #[test]
    fn search_is_deterministic_and_reports_best() {
        let ds = dataset(&[30, 12, 6]);
        let space = SearchSpace {
            budget: 8,
            patience: 3,
            ..SearchSpace::default()
        };
        let a = random_search(&ds, &space, 11).unwrap();
        assert_eq!(a, random_search(&ds, &space, 11).unwrap());
        assert!(a.evaluated <= 8);
        assert!((0.0..=1.0).contains(&a.score));
        assert_eq!(a.validation_ids.len(), 1);
    }

    #[test]
    fn tiny_or_single_class_training_fails() {
        let ds = dataset(&[1, 0]);
        assert!(random_search(&ds, &SearchSpace::default(), 0).is_err());
        let ds = dataset(&[3, 0]);
        assert!(matches!(
            random_search(&ds, &SearchSpace::default(), 0),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn singleton_classes_fall_back_to_unstratified_carve() {
        // every class has one record: nothing can be spared, so the carve-out
        // drops one class from fitting
        let ds = dataset(&[1, 1, 1]);
        let out = random_search(
            &ds,
            &SearchSpace {
                budget: 2,
                ..SearchSpace::default()
            },
            4,
        )
        .unwrap();
        assert_eq!(out.validation_ids.len(), 1);
    }

    #[test]
    fn invalid_spaces_are_rejected() {
        let ds = dataset(&[5, 5]);
        let bad = SearchSpace {
            c: (2.0, 1.0),
            ..SearchSpace::default()
        };
        assert!(random_search(&ds, &bad, 0).is_err());
        let bad = SearchSpace {
            budget: 0,
            ..SearchSpace::default()
        };
        assert!(random_search(&ds, &bad, 0).is_err());
    }
}
