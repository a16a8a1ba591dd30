//! Cross-validation folds and holdout splits.

use serde::Serialize;

use crate::error::{Error, Result};

use super::rng::SeededRng;
use super::{Dataset, Labels};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SplitKind {
    KFold { k: usize, seed: u64 },
    Holdout { train_fraction: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSpec {
    pub kind: SplitKind,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn kfold(k: usize, seed: u64) -> Self {
        Self {
            kind: SplitKind::KFold { k, seed },
            stratified: true,
        }
    }

    pub fn holdout(train_fraction: f64, seed: u64) -> Self {
        Self {
            kind: SplitKind::Holdout {
                train_fraction,
                seed,
            },
            stratified: true,
        }
    }

    pub fn unstratified(mut self) -> Self {
        self.stratified = false;
        self
    }
}

/// Sorted train and test sample indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Folds whose test sets partition `0..q`; a holdout split is a single fold.
pub fn make_folds(ds: &Dataset, spec: &SplitSpec) -> Result<Vec<Fold>> {
    let q = ds.n_samples();
    let (seed, capacities) = match spec.kind {
        SplitKind::KFold { k, seed } => {
            if k < 2 || k > q {
                return Err(Error::InvalidConfig(format!(
                    "k-fold needs 2 ≤ k ≤ q (k={k}, q={q})"
                )));
            }
            (
                seed,
                (0..k)
                    .map(|f| q / k + usize::from(f < q % k))
                    .collect::<Vec<_>>(),
            )
        }
        SplitKind::Holdout {
            train_fraction,
            seed,
        } => {
            if !(train_fraction > 0.0 && train_fraction < 1.0) || q < 2 {
                return Err(Error::InvalidConfig(format!(
                    "holdout needs a train fraction in (0,1) and q ≥ 2 (fraction={train_fraction}, q={q})"
                )));
            }
            let n_train = ((train_fraction * q as f64).round() as usize).clamp(1, q - 1);
            // bin 0 is the test side so that the single fold's test set is bin 0
            (seed, vec![q - n_train, n_train])
        }
    };

    let mut rng = SeededRng::new(seed);
    let mut order: Vec<usize> = (0..q).collect();
    rng.shuffle(&mut order);

    let bins = match (spec.stratified, ds.labels()) {
        (false, _) => sequential(&order, &capacities),
        (true, Labels::Binary(y)) => stratified_binary(&order, y, &capacities),
        (true, Labels::Multi(y)) => {
            let pos: Vec<Vec<usize>> = (0..q)
                .map(|i| (0..y.n_cols()).filter(|&k| y.get(i, k) > 0.0).collect())
                .collect();
            greedy_multilabel(&order, &pos, y.n_cols(), &capacities)
        }
    };

    let n_bins = capacities.len();
    let mut groups = vec![Vec::new(); n_bins];
    for (i, &b) in bins.iter().enumerate() {
        groups[b].push(i);
    }
    let folds: Vec<Fold> = match spec.kind {
        SplitKind::KFold { .. } => (0..n_bins)
            .map(|f| Fold {
                train: (0..q).filter(|&i| bins[i] != f).collect(),
                test: groups[f].clone(),
            })
            .collect(),
        SplitKind::Holdout { .. } => vec![Fold {
            train: groups[1].clone(),
            test: groups[0].clone(),
        }],
    };

    if let (true, Labels::Binary(y)) = (spec.stratified, ds.labels()) {
        for (f, fold) in folds.iter().enumerate() {
            let pos = fold.test.iter().filter(|&&i| y[i] > 0.0).count();
            if pos == 0 || pos == fold.test.len() {
                log::warn!("test set of fold {f} contains a single class");
            }
        }
    }
    Ok(folds)
}

/// Fills bins in order along `order`.
fn sequential(order: &[usize], capacities: &[usize]) -> Vec<usize> {
    let mut bins = vec![0; order.len()];
    let mut it = order.iter();
    for (b, &cap) in capacities.iter().enumerate() {
        for &i in it.by_ref().take(cap) {
            bins[i] = b;
        }
    }
    bins
}

/// Deals each class round-robin over the bins, skipping full bins, with the
/// negatives continuing where the positives stopped.
fn stratified_binary(order: &[usize], y: &[f64], capacities: &[usize]) -> Vec<usize> {
    let n_bins = capacities.len();
    let mut bins = vec![0; order.len()];
    let mut load = vec![0usize; n_bins];
    let targets: Vec<f64> = capacities
        .iter()
        .map(|&c| c as f64 / order.len() as f64)
        .collect();
    let class_order = order
        .iter()
        .filter(|&&i| y[i] > 0.0)
        .chain(order.iter().filter(|&&i| y[i] <= 0.0));
    let n_pos = order.iter().filter(|&&i| y[i] > 0.0).count();
    let mut class_load = vec![0usize; n_bins];
    for (seen, &i) in class_order.enumerate() {
        if seen == n_pos {
            class_load.iter_mut().for_each(|c| *c = 0);
        }
        let class_total = if seen < n_pos {
            n_pos
        } else {
            order.len() - n_pos
        };
        // largest deficit of this class relative to the bin's share
        let b = (0..n_bins)
            .filter(|&b| load[b] < capacities[b])
            .max_by(|&a, &b| {
                let da = targets[a] * class_total as f64 - class_load[a] as f64;
                let db = targets[b] * class_total as f64 - class_load[b] as f64;
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("capacities sum to q");
        bins[i] = b;
        load[b] += 1;
        class_load[b] += 1;
    }
    bins
}

/// Greedy proportional allocation: each sample goes to the open bin with the
/// largest remaining demand for its positive labels, ties broken by free
/// capacity and then bin index.
fn greedy_multilabel(
    order: &[usize],
    pos: &[Vec<usize>],
    n_labels: usize,
    capacities: &[usize],
) -> Vec<usize> {
    let q = order.len();
    let n_bins = capacities.len();
    let mut totals = vec![0usize; n_labels];
    for p in pos {
        for &k in p {
            totals[k] += 1;
        }
    }
    let mut demand: Vec<Vec<f64>> = capacities
        .iter()
        .map(|&c| {
            totals
                .iter()
                .map(|&t| t as f64 * c as f64 / q as f64)
                .collect()
        })
        .collect();
    let mut load = vec![0usize; n_bins];
    let mut bins = vec![0; q];
    for &i in order {
        let score = |b: usize| -> f64 { pos[i].iter().map(|&k| demand[b][k]).sum() };
        let b = (0..n_bins)
            .filter(|&b| load[b] < capacities[b])
            .max_by(|&a, &b| {
                score(a)
                    .total_cmp(&score(b))
                    .then((capacities[a] - load[a]).cmp(&(capacities[b] - load[b])))
                    .then(b.cmp(&a))
            })
            .expect("capacities sum to q");
        bins[i] = b;
        load[b] += 1;
        for &k in &pos[i] {
            demand[b][k] -= 1.0;
        }
    }
    bins
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::DenseMatrix;

    fn binary(y: Vec<f64>) -> Dataset {
        let q = y.len();
        Dataset::new(DenseMatrix::zeros(q, 1), Labels::Binary(y)).unwrap()
    }

    fn assert_partition(folds: &[Fold], q: usize) {
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort();
        assert_eq!(all, (0..q).collect::<Vec<_>>());
        for f in folds {
            let mut both = f.train.clone();
            both.extend(&f.test);
            both.sort();
            assert_eq!(both, (0..q).collect::<Vec<_>>());
        }
    }

    #[test]
    fn kfold_unstratified_sizes() {
        let ds = binary(vec![1.0; 10]);
        let folds = make_folds(&ds, &SplitSpec::kfold(5, 1).unstratified()).unwrap();
        assert_eq!(folds.len(), 5);
        assert!(folds.iter().all(|f| f.test.len() == 2));
        assert_partition(&folds, 10);
    }

    #[test]
    fn stratified_binary_balances_negatives() {
        let mut y = vec![1.0; 8];
        y.extend([-1.0, -1.0]);
        let ds = binary(y.clone());
        let folds = make_folds(&ds, &SplitSpec::kfold(2, 3)).unwrap();
        for f in &folds {
            assert_eq!(f.test.iter().filter(|&&i| y[i] < 0.0).count(), 1);
            assert_eq!(f.test.len(), 5);
        }
        assert_partition(&folds, 10);
    }

    #[test]
    fn holdout_sizes() {
        let ds = binary(
            (0..100)
                .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
                .collect(),
        );
        let folds = make_folds(&ds, &SplitSpec::holdout(0.9, 2)).unwrap();
        assert_eq!(folds.len(), 1);
        assert_eq!(folds[0].train.len(), 90);
        assert_eq!(folds[0].test.len(), 10);
        let mut both = folds[0].train.clone();
        both.extend(&folds[0].test);
        both.sort();
        assert_eq!(both, (0..100).collect::<Vec<_>>());
        let y = ds.binary_labels().unwrap();
        assert_eq!(folds[0].test.iter().filter(|&&i| y[i] > 0.0).count(), 3);
    }

    #[test]
    fn multilabel_folds_partition() {
        let e = crate::data::gen_example3(60, 4, 3, 8).unwrap();
        let folds = make_folds(&e.dataset, &SplitSpec::kfold(3, 1)).unwrap();
        assert_partition(&folds, 60);
        assert!(folds.iter().all(|f| f.test.len() == 20));
    }

    #[test]
    fn rejects_bad_specs() {
        let ds = binary(vec![1.0, -1.0, 1.0]);
        assert!(make_folds(&ds, &SplitSpec::kfold(1, 0)).is_err());
        assert!(make_folds(&ds, &SplitSpec::kfold(4, 0)).is_err());
        assert!(make_folds(&ds, &SplitSpec::holdout(1.0, 0)).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let ds = binary(
            (0..30)
                .map(|i| if i % 4 == 0 { 1.0 } else { -1.0 })
                .collect(),
        );
        let a = make_folds(&ds, &SplitSpec::kfold(5, 7)).unwrap();
        assert_eq!(a, make_folds(&ds, &SplitSpec::kfold(5, 7)).unwrap());
    }
}
