//! Seeded partitions of a dataset: stratified hold-out splits, leave-one-out
//! folds and nested learning-curve subsets.
//!
//! Per-class sizes always come from largest-remainder apportionment of the
//! proportional quotas `count(c) · total / N`, computed in exact integer
//! arithmetic with ties going to the class earlier in the schema.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, FeatureRecord};
use crate::error::{Error, Result};
use crate::util::round_count;

/// Largest-remainder apportionment of `total` units across classes sized `counts`.
pub fn apportion(counts: &[usize], total: usize) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return vec![0; counts.len()];
    }
    let mut alloc: Vec<usize> = counts.iter().map(|&c| c * total / n).collect();
    let mut remainders: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| ((c * total) % n, k))
        .collect();
    // stable sort keeps schema order among equal remainders
    remainders.sort_by_key(|&(r, _)| std::cmp::Reverse(r));
    let missing = total - alloc.iter().sum::<usize>();
    for &(_, k) in remainders.iter().take(missing) {
        alloc[k] += 1;
    }
    alloc
}

/// Shuffles each class's record indices with one generator, classes in schema order.
fn shuffled_groups(dataset: &Dataset, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = dataset.indices_by_class();
    for group in &mut groups {
        group.shuffle(&mut rng);
    }
    groups
}

/// Index form of [`stratified_split`]: `(train, test)` in dataset order.
pub fn stratified_split_indices(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} must lie in (0, 1)"
        )));
    }
    let n = dataset.len();
    let test_size = round_count(n, test_fraction);
    if test_size == 0 || test_size >= n {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} on {n} records leaves an empty side"
        )));
    }
    let per_class = apportion(&dataset.class_counts(), test_size);
    let mut test = Vec::with_capacity(test_size);
    let mut train = Vec::with_capacity(n - test_size);
    for (group, take) in shuffled_groups(dataset, seed).into_iter().zip(per_class) {
        test.extend_from_slice(&group[..take]);
        train.extend_from_slice(&group[take..]);
    }
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let (train, test) = stratified_split_indices(dataset, test_fraction, seed)?;
    let origin = dataset.provenance();
    Ok((
        dataset.subset(&train, format!("{origin} [train, seed {seed}]")),
        dataset.subset(&test, format!("{origin} [test, seed {seed}]")),
    ))
}

/// One leave-one-out fold, by record index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub index: usize,
    pub train: Vec<usize>,
    pub test: usize,
}

impl Fold {
    pub fn materialize<'a>(&self, dataset: &'a Dataset) -> (Dataset, &'a FeatureRecord) {
        let train = dataset.subset(
            &self.train,
            format!("{} [loo fold {}]", dataset.provenance(), self.index),
        );
        (train, &dataset.records()[self.test])
    }
}

/// Folds are produced lazily; each one owns only its index list.
pub fn loo_folds(dataset: &Dataset) -> Result<impl ExactSizeIterator<Item = Fold> + '_> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "leave-one-out needs at least 2 records, got {n}"
        )));
    }
    Ok((0..n).map(move |i| Fold {
        index: i,
        train: (0..n).filter(|&j| j != i).collect(),
        test: i,
    }))
}

/// Per-class allocations for each subset size, forced to be non-decreasing.
///
/// Plain largest-remainder can shrink a class when the total grows, so a
/// class that would drop keeps its previous size and the surplus is taken back
/// from the classes furthest above their exact quota.
fn nested_allocations(counts: &[usize], totals: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = counts.iter().sum();
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(totals.len());
    for &total in totals {
        let mut alloc = apportion(counts, total);
        if let Some(prev) = out.last() {
            for (a, &p) in alloc.iter_mut().zip(prev) {
                *a = (*a).max(p);
            }
            let mut surplus = alloc.iter().sum::<usize>() - total;
            while surplus > 0 {
                // over-allocation relative to quota, scaled by n to stay integral
                let k = (0..counts.len())
                    .filter(|&k| alloc[k] > prev[k])
                    .max_by_key(|&k| {
                        (
                            alloc[k] as i128 * n as i128 - (counts[k] * total) as i128,
                            std::cmp::Reverse(k),
                        )
                    })
                    .expect("surplus implies a class above its previous size");
                alloc[k] -= 1;
                surplus -= 1;
            }
        }
        out.push(alloc);
    }
    out
}

pub fn nested_subset_indices(
    dataset: &Dataset,
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if fractions.is_empty() {
        return Err(Error::Empty("no subset fractions"));
    }
    for pair in fractions.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidArgument(format!(
                "fractions must be strictly increasing ({} then {})",
                pair[0], pair[1]
            )));
        }
    }
    let n = dataset.len();
    let mut totals = Vec::with_capacity(fractions.len());
    for &f in fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "fraction {f} must lie in (0, 1]"
            )));
        }
        let size = round_count(n, f);
        if size == 0 {
            return Err(Error::InvalidArgument(format!(
                "fraction {f} of {n} records gives an empty subset"
            )));
        }
        totals.push(size);
    }

    let groups = shuffled_groups(dataset, seed);
    let allocations = nested_allocations(&dataset.class_counts(), &totals);
    Ok(allocations
        .into_iter()
        .map(|alloc| {
            let mut idx: Vec<usize> = groups
                .iter()
                .zip(alloc)
                .flat_map(|(g, take)| g[..take].iter().copied())
                .collect();
            idx.sort_unstable();
            idx
        })
        .collect())
}

pub fn nested_subsets(dataset: &Dataset, fractions: &[f64], seed: u64) -> Result<Vec<Dataset>> {
    let subsets = nested_subset_indices(dataset, fractions, seed)?;
    Ok(subsets
        .iter()
        .zip(fractions)
        .map(|(idx, f)| dataset.subset(idx, format!("{} [subset {f}]", dataset.provenance())))
        .collect())
}
