//! m-nearest-neighbour classification over exact or estimated lp distances.

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorId, SketchPair};
use crate::io::format_real;
use crate::moments::exact_lp;
use crate::projector::{sketch_batch, EntryDistribution, ProjectionSpec, Sketch};
use crate::simlab::evaluate;
use crate::vector::DataVector;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    rows: Vec<DataVector<f64>>,
    labels: Vec<i64>,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(rows: Vec<DataVector<f64>>, labels: Vec<i64>, train: Vec<usize>, test: Vec<usize>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut seen = vec![0u8; rows.len()];
        for (set, bit) in [(&train, 1u8), (&test, 2u8)] {
            for &i in set.iter() {
                let s = seen.get_mut(i).ok_or(Error::IndexOutOfRange {
                    what: "row",
                    index: i,
                    limit: rows.len(),
                })?;
                if *s != 0 {
                    return Err(Error::InvalidArgument(format!("row {i} is listed twice in the split")));
                }
                *s = bit;
            }
        }
        if let Some(first) = rows.first() {
            for r in &rows {
                first.check_same_dim(r)?;
            }
        }
        Ok(Self { rows, labels, train, test })
    }

    /// Train rows followed by test rows.
    pub fn from_parts(train: Vec<(DataVector<f64>, i64)>, test: Vec<(DataVector<f64>, i64)>) -> Result<Self> {
        let n_train = train.len();
        let n = n_train + test.len();
        let (rows, labels) = train.into_iter().chain(test).unzip();
        Self::new(rows, labels, (0..n_train).collect(), (n_train..n).collect())
    }

    pub fn rows(&self) -> &[DataVector<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    /// Same dataset with the training indices in a different order.
    pub fn with_train_order(&self, train: Vec<usize>) -> Result<Self> {
        let mut a = train.clone();
        let mut b = self.train.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::InvalidArgument("not a permutation of the training set".into()));
        }
        Ok(Self { train, ..self.clone() })
    }

    pub fn map_rows(&self, f: impl Fn(&DataVector<f64>) -> DataVector<f64>) -> Self {
        Self {
            rows: self.rows.iter().map(f).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceSource {
    Exact,
    Estimated {
        estimator: EstimatorId,
        k: usize,
        seed: u64,
        distribution: EntryDistribution,
        /// Threshold for `auto`.
        tau: f64,
    },
}

impl DistanceSource {
    pub fn estimated(estimator: EstimatorId, k: usize, seed: u64) -> Self {
        DistanceSource::Estimated {
            estimator,
            k,
            seed,
            distribution: EntryDistribution::Normal,
            tau: 0.9,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DistanceSource::Exact => "exact".into(),
            DistanceSource::Estimated { estimator, .. } => estimator.to_string(),
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            DistanceSource::Exact => None,
            DistanceSource::Estimated { k, .. } => Some(*k),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnResult {
    pub m: usize,
    pub p: u32,
    pub source: DistanceSource,
    /// Mean error over repeats (the only error rate for a single run).
    pub error_rate: f64,
    pub per_repeat: Vec<f64>,
}

impl KnnResult {
    /// Standard error of the mean over repeats; 0 for a single run.
    pub fn std_error(&self) -> f64 {
        let n = self.per_repeat.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.error_rate;
        let var = self.per_repeat.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    }
}

/// Predicted label from `(distance, label)` neighbour candidates: the `m`
/// nearest by `(distance, label)` vote; ties go to the smaller summed
/// distance, then the lower class id.
pub fn vote(mut candidates: Vec<(f64, i64)>, m: usize) -> i64 {
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates.truncate(m);
    let mut tally: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    for (d, l) in candidates {
        let e = tally.entry(l).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d;
    }
    tally
        .into_iter()
        .min_by(|(la, (ca, sa)), (lb, (cb, sb))| {
            cb.cmp(ca).then(sa.total_cmp(sb)).then(la.cmp(lb))
        })
        .map(|(l, _)| l)
        .expect("m >= 1 candidates")
}

fn check_order(p: u32) -> Result<()> {
    if matches!(p, 2 | 4 | 6 | 8) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(p))
    }
}

fn estimated_rows(
    ds: &LabeledDataset,
    estimator: EstimatorId,
    k: usize,
    seed: u64,
    distribution: EntryDistribution,
) -> Result<Vec<Sketch<f64>>> {
    let scheme = estimator.scheme().ok_or_else(|| {
        Error::InvalidArgument(format!("{estimator} cannot rank neighbours from sketches"))
    })?;
    let dim = ds.rows.first().map(|r| r.dim()).unwrap_or(1);
    let spec = ProjectionSpec::new(seed, k, scheme, distribution, dim)?;
    let inputs: Vec<(String, &DataVector<f64>)> = ds.rows.iter().enumerate().map(|(i, r)| (i.to_string(), r)).collect();
    sketch_batch(&inputs, &spec, estimator.max_power())
}

/// Classifies every test row and returns the error rate.
pub fn knn_classify(ds: &LabeledDataset, m: usize, p: u32, source: &DistanceSource) -> Result<KnnResult> {
    check_order(p)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if ds.train.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if m > ds.train.len() {
        return Err(Error::InvalidArgument(format!(
            "m = {m} exceeds the {} training rows",
            ds.train.len()
        )));
    }
    let sketches = match *source {
        DistanceSource::Exact => None,
        DistanceSource::Estimated {
            estimator,
            k,
            seed,
            distribution,
            ..
        } => {
            if estimator.order() != p {
                return Err(Error::InvalidArgument(format!(
                    "{estimator} estimates l{} distances, not l{p}",
                    estimator.order()
                )));
            }
            Some(estimated_rows(ds, estimator, k, seed, distribution)?)
        }
    };
    let distance = |a: usize, b: usize| -> Result<f64> {
        match (source, &sketches) {
            (DistanceSource::Estimated { estimator, tau, .. }, Some(sk)) => {
                evaluate(*estimator, &SketchPair::new(&sk[a], &sk[b])?, *tau)
            }
            _ => exact_lp(&ds.rows[a], &ds.rows[b], p),
        }
    };
    let wrong: Vec<bool> = ds
        .test
        .par_iter()
        .map(|&t| -> Result<bool> {
            let cands = ds
                .train
                .iter()
                .map(|&r| Ok((distance(t, r)?, ds.labels[r])))
                .collect::<Result<Vec<_>>>()?;
            Ok(vote(cands, m) != ds.labels[t])
        })
        .collect::<Result<_>>()?;
    let rate = if wrong.is_empty() {
        0.0
    } else {
        wrong.iter().filter(|&&w| w).count() as f64 / wrong.len() as f64
    };
    Ok(KnnResult {
        m,
        p,
        source: *source,
        error_rate: rate,
        per_repeat: vec![rate],
    })
}

/// Estimated-distance classification repeated over `seeds`.
pub fn knn_repeated(
    ds: &LabeledDataset,
    m: usize,
    estimator: EstimatorId,
    k: usize,
    seeds: &[u64],
) -> Result<KnnResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds given".into()));
    }
    let mut per_repeat = Vec::with_capacity(seeds.len());
    let mut last = None;
    for &seed in seeds {
        let src = DistanceSource::estimated(estimator, k, seed);
        let r = knn_classify(ds, m, estimator.order(), &src)?;
        per_repeat.push(r.error_rate);
        last = Some(src);
    }
    let mean = per_repeat.iter().sum::<f64>() / per_repeat.len() as f64;
    Ok(KnnResult {
        m,
        p: estimator.order(),
        source: last.expect("at least one seed"),
        error_rate: mean,
        per_repeat,
    })
}

/// Exact-distance error rate for every `(m, p)`.
pub fn p_sweep(ds: &LabeledDataset, m_list: &[usize], p_list: &[u32]) -> Result<Vec<KnnResult>> {
    let mut out = Vec::new();
    for &m in m_list {
        for &p in p_list {
            out.push(knn_classify(ds, m, p, &DistanceSource::Exact)?);
        }
    }
    Ok(out)
}

pub const KNN_HEADER: &str = "m,p,distance_source,k,seed_repeats,mean_error,std_error";

pub fn write_knn_csv<W: Write>(results: &[KnnResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{KNN_HEADER}")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m,
            r.p,
            r.source.label(),
            r.source.k().map(|k| k.to_string()).unwrap_or_default(),
            r.per_repeat.len(),
            format_real(r.error_rate),
            format_real(r.std_error())
        )?;
    }
    Ok(())
}

/// Two or more classes of sparse Gaussian blobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub dim: usize,
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Mean offset on each class's informative coordinates.
    pub shift: f64,
    /// Informative coordinates per class.
    pub informative: usize,
    /// Fraction of coordinates that are nonzero in a row.
    pub density: f64,
    /// Probability that a row's label is replaced by another class.
    pub label_noise: f64,
    pub seed: u64,
}

impl BlobSpec {
    /// `classes` blobs; class `c` is shifted on coordinates
    /// `c·informative .. (c+1)·informative`, which are always present.
    pub fn generate(&self) -> Result<LabeledDataset> {
        if self.classes == 0 || self.classes * self.informative > self.dim {
            return Err(Error::InvalidArgument("informative coordinates do not fit".into()));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::InvalidArgument("density must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.label_noise) || (self.classes < 2 && self.label_noise > 0.0) {
            return Err(Error::InvalidArgument("label noise must lie in [0, 1] and needs two classes".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let signal = self.classes * self.informative;
        let row = |c: usize, rng: &mut ChaCha8Rng| {
            let mut pairs = Vec::new();
            for j in 0..self.dim {
                let informative = j < signal;
                if !informative && rng.random::<f64>() >= self.density {
                    continue;
                }
                let mut v: f64 = noise.sample(rng);
                if informative && j / self.informative == c {
                    v += self.shift;
                }
                pairs.push((j, v));
            }
            DataVector::from_pairs(self.dim, pairs)
        };
        let part = |n: usize, rng: &mut ChaCha8Rng| -> Result<Vec<(DataVector<f64>, i64)>> {
            let mut out = Vec::new();
            for _ in 0..n {
                for c in 0..self.classes {
                    let v = row(c, rng)?;
                    let mut label = c;
                    if self.label_noise > 0.0 && rng.random::<f64>() < self.label_noise {
                        label = (c + 1 + rng.random_range(0..self.classes - 1)) % self.classes;
                    }
                    out.push((v, label as i64));
                }
            }
            Ok(out)
        };
        let train = part(self.train_per_class, &mut rng)?;
        let test = part(self.test_per_class, &mut rng)?;
        LabeledDataset::from_parts(train, test)
    }
}

/// Reference classifier: full sort of every training row per test row.
pub fn brute_force_error(ds: &LabeledDataset, m: usize, p: u32) -> Result<f64> {
    let mut wrong = 0usize;
    for &t in &ds.test {
        let mut all = Vec::new();
        for &r in &ds.train {
            let mut d = 0.0;
            for i in 0..ds.rows[t].dim() {
                d += (ds.rows[t].get(i) - ds.rows[r].get(i)).abs().powi(p as i32);
            }
            all.push((d, ds.labels[r]));
        }
        wrong += (vote(all, m) != ds.labels[t]) as usize;
    }
    Ok(if ds.test.is_empty() {
        0.0
    } else {
        wrong as f64 / ds.test.len() as f64
    })
}
