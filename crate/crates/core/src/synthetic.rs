//! Seeded Gaussian-cluster datasets used by tests, benches and fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, FeatureRecord, Sex};
use crate::error::{Error, Result};

/// One class: its name, record count, cluster centre and spread.
#[derive(Debug, Clone)]
pub struct ClusterSpec {
    pub label: String,
    pub count: usize,
    pub center: Vec<f64>,
    pub sd: f64,
}

impl ClusterSpec {
    pub fn new(label: &str, count: usize, center: Vec<f64>, sd: f64) -> Self {
        ClusterSpec {
            label: label.into(),
            count,
            center,
            sd,
        }
    }
}

/// Isotropic Gaussian clusters in schema order. Sex alternates at random and
/// age is uniform on [55, 95).
pub fn gaussian_clusters(specs: &[ClusterSpec], seed: u64, provenance: &str) -> Result<Dataset> {
    let dim = specs
        .first()
        .map(|s| s.center.len())
        .ok_or(Error::Empty("no cluster specs"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for spec in specs {
        if spec.center.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: spec.center.len(),
            });
        }
        let noise = Normal::new(0.0, spec.sd)
            .map_err(|e| Error::InvalidArgument(format!("cluster spread: {e}")))?;
        for i in 0..spec.count {
            let features = spec
                .center
                .iter()
                .map(|&c| (c + noise.sample(&mut rng)) as f32)
                .collect();
            let sex = if rng.random_bool(0.5) {
                Sex::Female
            } else {
                Sex::Male
            };
            let age = (rng.random_range(55.0..95.0_f64) * 10.0).round() / 10.0;
            records.push(FeatureRecord {
                id: format!("{}-{i:04}", spec.label),
                features,
                sex,
                age,
                label: spec.label.clone(),
            });
        }
    }
    let schema = specs.iter().map(|s| s.label.clone()).collect();
    Dataset::new(records, dim, schema, provenance)
}

/// Three tight clusters on the vertices of a triangle, 20 records each.
pub fn gauss3(seed: u64) -> Dataset {
    let specs = [
        ClusterSpec::new("A", 20, vec![0.0, 0.0], 0.3),
        ClusterSpec::new("B", 20, vec![6.0, 0.0], 0.3),
        ClusterSpec::new("C", 20, vec![3.0, 5.2], 0.3),
    ];
    gaussian_clusters(&specs, seed, "gauss3").expect("fixed specs are valid")
}

/// Two overlapping classes in a 9:1 ratio (`major`: 180, `minor`: 20).
pub fn imbalanced_binary(seed: u64) -> Dataset {
    let specs = [
        ClusterSpec::new("major", 180, vec![0.0, 0.0], 1.0),
        ClusterSpec::new("minor", 20, vec![1.5, 1.5], 1.0),
    ];
    gaussian_clusters(&specs, seed, "imbalanced").expect("fixed specs are valid")
}

/// Four staged classes with counts 316/70/28/2 in 8 dimensions.
pub fn staged4(seed: u64) -> Dataset {
    let axis = |k: usize, v: f64| {
        let mut c = vec![0.0; 8];
        c[k] = v;
        c
    };
    let specs = [
        ClusterSpec::new("nondemented", 316, axis(0, 0.0), 1.0),
        ClusterSpec::new("very_mild", 70, axis(1, 2.5), 1.0),
        ClusterSpec::new("mild", 28, axis(2, 3.0), 1.0),
        ClusterSpec::new("moderate", 2, axis(3, 4.0), 1.0),
    ];
    gaussian_clusters(&specs, seed, "staged4").expect("fixed specs are valid")
}

/// Four separable classes of 50 records in 4 dimensions (N = 200).
pub fn blobs4(seed: u64) -> Dataset {
    let specs: Vec<ClusterSpec> = (0..4)
        .map(|k| {
            let mut c = vec![0.0; 4];
            c[k] = 4.0;
            ClusterSpec::new(&format!("s{k}"), 50, c, 0.8)
        })
        .collect();
    gaussian_clusters(&specs, seed, "blobs4").expect("fixed specs are valid")
}

/// The fixture set committed under `fixtures/`, as `(directory, dataset)`.
pub fn committed_fixtures() -> Vec<(&'static str, Dataset)> {
    vec![
        ("gauss3", gauss3(7)),
        ("imbalanced", imbalanced_binary(11)),
        ("staged4", staged4(3)),
        ("blobs4", blobs4(5)),
    ]
}
