//! Monte-Carlo experiments: normalized MSE versus `k`, per estimator, with
//! the closed-form variance alongside where one exists.

pub mod gaussian;
pub mod generators;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    d4_identity, d4_margin, d4_plain, d4_select, d6_plain, sampling_draw, var_1p, var_1p_identity, var_3p,
    var_3p_margin_asymptotic, var_crs_predictor, var_sampling, EstimatorId, ProjectedPair, SketchPair,
};
use crate::io::format_real;
use crate::moments::{compute_moments, exact_lp, MomentTable};
use crate::projector::{sketch_batch, EntryDistribution, ProjectionSpec, Scheme};
use crate::scalar::CompensatedSum;
use crate::vector::DataVector;

pub use gaussian::{GaussianDraw, GaussianPairModel};
pub use generators::{generate_pair, overlap_counts, PairKind, ValueDist};

/// Seed of trial `index` under `master`; a SplitMix64-style mix so nearby
/// indices give unrelated streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index))
}

/// How projected statistics are produced in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// [`Backend::Gaussian`] for normal entries, otherwise [`Backend::Direct`].
    #[default]
    Auto,
    /// Build real sketches from keyed matrices.
    Direct,
    /// Draw the projected inner products from their exact joint law
    /// (normal entries only).
    Gaussian,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Backend::Auto),
            "direct" => Ok(Backend::Direct),
            "gaussian" => Ok(Backend::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairSource {
    Generated { kind: PairKind, dim: usize, seed: u64 },
    Given { x: DataVector<f64>, y: DataVector<f64> },
}

impl PairSource {
    pub fn resolve(&self) -> Result<(DataVector<f64>, DataVector<f64>)> {
        match self {
            PairSource::Generated { kind, dim, seed } => generate_pair(kind, *dim, *seed),
            PairSource::Given { x, y } => {
                x.check_same_dim(y)?;
                Ok((x.clone(), y.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: PairSource,
    pub k_grid: Vec<usize>,
    pub trials: usize,
    pub estimators: Vec<EstimatorId>,
    pub distribution: EntryDistribution,
    pub backend: Backend,
    pub master_seed: u64,
    /// Threshold for `auto`.
    pub tau: f64,
}

pub const MIN_TRIALS: usize = 100;

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() {
            return Err(Error::InvalidArgument("k grid is empty".into()));
        }
        if self.k_grid[0] == 0 || self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "k grid must be positive and strictly increasing".into(),
            ));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_TRIALS} trials, got {}",
                self.trials
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidArgument("no estimators requested".into()));
        }
        self.distribution.validate()?;
        if self.backend == Backend::Gaussian && self.distribution != EntryDistribution::Normal {
            return Err(Error::InvalidArgument(
                "the gaussian backend requires normal projection entries".into(),
            ));
        }
        Ok(())
    }

    fn use_gaussian(&self) -> bool {
        match self.backend {
            Backend::Auto => self.distribution == EntryDistribution::Normal,
            Backend::Direct => false,
            Backend::Gaussian => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub estimator: EstimatorId,
    pub k: usize,
    pub trials: usize,
    /// Mean of `(d̂ − d)²/d²`; absent for predictor-only rows.
    pub empirical_mse: Option<f64>,
    /// Closed-form variance over `d²`, where a formula exists.
    pub theoretical_var_norm: Option<f64>,
    /// `(mean − d)²/d²`.
    pub bias_sq_norm: Option<f64>,
    pub mean: Option<f64>,
    /// Unbiased sample variance of the raw estimates.
    pub sample_var: Option<f64>,
}

/// Closed-form variance of `id` at `k`, if one exists.
pub fn theoretical_variance(id: EstimatorId, m: &MomentTable<f64>, k: usize) -> Option<f64> {
    match id {
        EstimatorId::Sampling => Some(var_sampling(m, k)),
        EstimatorId::CrsVarOnly => Some(var_crs_predictor(m, k)),
        EstimatorId::ThreeP => Some(var_3p(m, k)),
        EstimatorId::ThreePMargin => Some(var_3p_margin_asymptotic(m, k)),
        EstimatorId::OneP => Some(var_1p(m, k)),
        EstimatorId::OnePIdentity => Some(var_1p_identity(m, k)),
        EstimatorId::Exact => Some(0.0),
        EstimatorId::OnePMargin | EstimatorId::D6OneP | EstimatorId::Auto => None,
    }
}

/// Evaluates a projection estimator on one set of projected statistics.
pub fn evaluate(id: EstimatorId, pp: &impl ProjectedPair<f64>, tau: f64) -> Result<f64> {
    match id {
        EstimatorId::ThreeP | EstimatorId::OneP => d4_plain(pp),
        EstimatorId::ThreePMargin | EstimatorId::OnePMargin => d4_margin(pp),
        EstimatorId::OnePIdentity => d4_identity(pp),
        EstimatorId::D6OneP => d6_plain(pp),
        EstimatorId::Auto => d4_select(pp, tau).map(|(_, v)| v),
        other => Err(Error::InvalidArgument(format!("{other} is not a projection estimator"))),
    }
}

/// Per-pair state shared by all trials.
struct Prepared {
    x: DataVector<f64>,
    y: DataVector<f64>,
    weights: Vec<f64>,
    exact4: f64,
    exact6: f64,
}

impl Prepared {
    fn truth(&self, id: EstimatorId) -> f64 {
        if id.order() == 6 {
            self.exact6
        } else {
            self.exact4
        }
    }
}

fn max_power_for(ids: &[EstimatorId], scheme: Scheme) -> u32 {
    ids.iter()
        .filter(|id| id.scheme() == Some(scheme))
        .map(|id| id.max_power())
        .max()
        .unwrap_or(3)
}

/// Raw estimates for every requested estimator in one trial; `None` for
/// predictor-only ids.
fn run_trial(
    spec: &ExperimentSpec,
    prep: &Prepared,
    models: &[(Scheme, GaussianPairModel)],
    k: usize,
    seed: u64,
) -> Result<Vec<Option<f64>>> {
    let ids = &spec.estimators;
    let mut out = vec![None; ids.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (n, id) in ids.iter().enumerate() {
        match id {
            EstimatorId::Exact => out[n] = Some(prep.exact4),
            EstimatorId::Sampling => {
                let mut srng = ChaCha8Rng::seed_from_u64(seed);
                out[n] = Some(sampling_draw(prep.x.dim(), k, &mut srng, |i| prep.weights[i]));
            }
            _ => {}
        }
    }
    for scheme in [Scheme::OneMatrix, Scheme::ThreeMatrix] {
        let wanted: Vec<usize> = (0..ids.len()).filter(|&n| ids[n].scheme() == Some(scheme)).collect();
        if wanted.is_empty() {
            continue;
        }
        if spec.use_gaussian() {
            let model = &models.iter().find(|(s, _)| *s == scheme).expect("model per scheme").1;
            let draw = model.draw(&mut rng);
            for &n in &wanted {
                out[n] = Some(evaluate(ids[n], &draw, spec.tau)?);
            }
        } else {
            let pspec = ProjectionSpec::new(seed, k, scheme, spec.distribution, prep.x.dim())?;
            let sk = sketch_batch(
                &[("x".to_string(), &prep.x), ("y".to_string(), &prep.y)],
                &pspec,
                max_power_for(ids, scheme),
            )?;
            let pair = SketchPair::new(&sk[0], &sk[1])?;
            for &n in &wanted {
                out[n] = Some(evaluate(ids[n], &pair, spec.tau)?);
            }
        }
    }
    Ok(out)
}

/// Runs the experiment. Trials run in parallel; the reduction is sequential
/// in trial order, so results do not depend on the thread count.
/// A pair at zero true distance is an error unless every estimate is exact.
pub fn run_mse(spec: &ExperimentSpec) -> Result<Vec<MseRow>> {
    spec.validate()?;
    let (x, y) = spec.source.resolve()?;
    let m = compute_moments(&x, &y)?;
    let exact4 = exact_lp(&x, &y, 4)?;
    let exact6 = exact_lp(&x, &y, 6)?;
    let weights = (0..x.dim()).map(|i| (x.get(i) - y.get(i)).abs().powi(4)).collect();
    let prep = Prepared {
        x,
        y,
        weights,
        exact4,
        exact6,
    };

    let mut rows = Vec::new();
    for &k in &spec.k_grid {
        let models: Vec<(Scheme, GaussianPairModel)> = if spec.use_gaussian() {
            [Scheme::OneMatrix, Scheme::ThreeMatrix]
                .into_iter()
                .filter(|s| spec.estimators.iter().any(|id| id.scheme() == Some(*s)))
                .map(|s| {
                    GaussianPairModel::new(&prep.x, &prep.y, k, s, max_power_for(&spec.estimators, s))
                        .map(|model| (s, model))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let values: Vec<Vec<Option<f64>>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, &prep, &models, k, derive_seed(spec.master_seed, t as u64)))
            .collect::<Result<_>>()?;

        for (n, &id) in spec.estimators.iter().enumerate() {
            let truth = prep.truth(id);
            let raw_theory = if id.order() == 4 {
                theoretical_variance(id, &m, k)
            } else {
                None
            };
            let mut row = MseRow {
                estimator: id,
                k,
                trials: spec.trials,
                empirical_mse: None,
                theoretical_var_norm: raw_theory.and_then(|v| normalize(v, truth)),
                bias_sq_norm: None,
                mean: None,
                sample_var: None,
            };
            if values.first().is_some_and(|v| v[n].is_some()) {
                let est: Vec<f64> = values.iter().map(|v| v[n].expect("estimate")).collect();
                let stats = Summary::of(&est, truth);
                row.empirical_mse = Some(normalize(stats.mean_sq_err, truth).ok_or(Error::ZeroDistance)?);
                row.bias_sq_norm = normalize((stats.mean - truth).powi(2), truth);
                row.mean = Some(stats.mean);
                row.sample_var = Some(stats.var);
            } else if truth == 0.0 {
                return Err(Error::ZeroDistance);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// `v / truth²`. A zero truth only admits `v = 0` (every estimate exact),
/// which normalizes to 0.
fn normalize(v: f64, truth: f64) -> Option<f64> {
    if truth != 0.0 {
        Some(v / (truth * truth))
    } else if v == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Mean, unbiased variance and mean squared error about `truth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub mean_sq_err: f64,
}

impl Summary {
    pub fn of(values: &[f64], truth: f64) -> Self {
        let n = values.len();
        let mean = values.iter().copied().collect::<CompensatedSum<f64>>().value() / n as f64;
        let ss = values.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum<f64>>().value();
        let se = values.iter().map(|v| (v - truth).powi(2)).collect::<CompensatedSum<f64>>().value();
        Self {
            n,
            mean,
            var: if n > 1 { ss / (n - 1) as f64 } else { 0.0 },
            mean_sq_err: se / n as f64,
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }
}

pub const MSE_HEADER: &str = "estimator,k,trials,empirical_mse,theoretical_var_norm,bias_sq_norm";

fn opt(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

pub fn write_mse_csv<W: Write>(rows: &[MseRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{MSE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.estimator,
            r.k,
            r.trials,
            opt(r.empirical_mse),
            opt(r.theoretical_var_norm),
            opt(r.bias_sq_norm)
        )?;
    }
    Ok(())
}
