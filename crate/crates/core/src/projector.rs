//! Keyed projection matrices and per-vector sketches.
//!
//! Matrix entries are never stored. Entry `(matrix, i, j)` is a pure function
//! of the seed: a ChaCha8 keystream keyed by the seed, with the matrix id as
//! the stream number and `(i, j)` as the word position. One 64-bit word maps
//! to one entry (inverse-CDF for the normal case), so a row `i` is a
//! contiguous run of words and entries do not depend on `k`.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::power_sum;
use crate::scalar::Scalar;
use crate::vector::DataVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// All powers of a vector share one matrix.
    OneMatrix,
    /// Three independent matrices, one per inner-product term.
    ThreeMatrix,
}

impl Scheme {
    pub fn matrices(self) -> &'static [u32] {
        match self {
            Scheme::OneMatrix => &[1],
            Scheme::ThreeMatrix => &[1, 2, 3],
        }
    }

    /// Matrix that estimates the term `Σ x^a y^b`.
    ///
    /// Under the three-matrix scheme the term `(a, b)` is projected with
    /// matrix `a`: `x^a` and `y^b` must share a matrix for their product to
    /// be unbiased, and the three terms `(2,2)`, `(3,1)`, `(1,3)` then use
    /// three independent matrices.
    pub fn term_matrix(self, a: u32, _b: u32) -> u32 {
        match self {
            Scheme::OneMatrix => 1,
            Scheme::ThreeMatrix => a,
        }
    }

    /// Every `(power, matrix)` route a sketch under this scheme stores.
    pub fn routes(self, max_power: u32) -> Vec<Route> {
        match self {
            Scheme::OneMatrix => (1..=max_power).map(|p| Route::new(p, 1)).collect(),
            Scheme::ThreeMatrix => vec![
                Route::new(1, 1),
                Route::new(1, 3),
                Route::new(2, 2),
                Route::new(3, 1),
                Route::new(3, 3),
            ],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::OneMatrix => "1p",
            Scheme::ThreeMatrix => "3p",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1p" | "one" => Ok(Scheme::OneMatrix),
            "3p" | "three" => Ok(Scheme::ThreeMatrix),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Distribution of the projection entries; all variants have mean 0 and
/// variance 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryDistribution {
    Normal,
    /// `{−√3, 0, √3}` with probabilities `{1/6, 2/3, 1/6}`.
    ThreePoint,
    /// `{−√s, 0, √s}` with probabilities `{1/(2s), 1 − 1/s, 1/(2s)}`.
    SparseThreePoint(f64),
}

impl EntryDistribution {
    pub fn validate(self) -> Result<()> {
        match self {
            EntryDistribution::SparseThreePoint(s) if !(s >= 1.0 && s.is_finite()) => Err(
                Error::InvalidArgument(format!("sparse projection needs s >= 1, got {s}")),
            ),
            _ => Ok(()),
        }
    }

    /// Maps a uniform variate in `(0, 1)` to an entry.
    #[inline]
    pub fn transform(self, u: f64) -> f64 {
        match self {
            EntryDistribution::Normal => standard_normal_quantile(u),
            EntryDistribution::ThreePoint => three_point(u, 3.0),
            EntryDistribution::SparseThreePoint(s) => three_point(u, s),
        }
    }
}

#[inline]
fn three_point(u: f64, s: f64) -> f64 {
    let tail = 0.5 / s;
    if u < tail {
        -s.sqrt()
    } else if u >= 1.0 - tail {
        s.sqrt()
    } else {
        0.0
    }
}

#[inline]
fn standard_normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u)
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryDistribution::Normal => f.write_str("normal"),
            EntryDistribution::ThreePoint => f.write_str("3pt"),
            EntryDistribution::SparseThreePoint(s) => write!(f, "sparse:{s}"),
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let d = match s {
            "normal" => EntryDistribution::Normal,
            "3pt" | "threepoint" => EntryDistribution::ThreePoint,
            other => match other.strip_prefix("sparse:") {
                Some(v) => EntryDistribution::SparseThreePoint(v.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad sparsity parameter `{v}`"))
                })?),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown distribution `{other}`"
                    )))
                }
            },
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSpec {
    pub seed: u64,
    pub k: usize,
    pub scheme: Scheme,
    pub distribution: EntryDistribution,
    pub dim: usize,
}

impl ProjectionSpec {
    pub fn new(seed: u64, k: usize, scheme: Scheme, distribution: EntryDistribution, dim: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        distribution.validate()?;
        Ok(Self {
            seed,
            k,
            scheme,
            distribution,
            dim,
        })
    }

    pub fn normal(seed: u64, k: usize, scheme: Scheme, dim: usize) -> Result<Self> {
        Self::new(seed, k, scheme, EntryDistribution::Normal, dim)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    fn entry_source(&self) -> EntrySource {
        EntrySource {
            base: ChaCha8Rng::seed_from_u64(self.seed),
            distribution: self.distribution,
        }
    }
}

/// Position of row `i`, column `j` in the per-matrix keystream (in 32-bit words).
#[inline]
fn word_pos(i: usize, j: usize) -> u128 {
    ((i as u128) << 40) | ((j as u128) << 1)
}

#[inline]
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone)]
struct EntrySource {
    base: ChaCha8Rng,
    distribution: EntryDistribution,
}

impl EntrySource {
    /// Fills `out[j]` with entries `(matrix, i, j)` for `j = 0..out.len()`.
    fn fill_row(&self, matrix: u32, i: usize, out: &mut [f64]) {
        let mut rng = self.base.clone();
        rng.set_stream(matrix as u64);
        rng.set_word_pos(word_pos(i, 0));
        for e in out.iter_mut() {
            *e = self.distribution.transform(unit_open(rng.next_u64()));
        }
    }
}

/// Entry `(i, j)` of projection matrix `matrix` (1-based, as in `R^(1..3)`).
pub fn matrix_entry(spec: &ProjectionSpec, matrix: u32, i: usize, j: usize) -> Result<f64> {
    if !spec.scheme.matrices().contains(&matrix) {
        return Err(Error::IndexOutOfRange {
            what: "matrix id",
            index: matrix as usize,
            limit: spec.scheme.matrices().len() + 1,
        });
    }
    if i >= spec.dim {
        return Err(Error::IndexOutOfRange {
            what: "row",
            index: i,
            limit: spec.dim,
        });
    }
    if j >= spec.k {
        return Err(Error::IndexOutOfRange {
            what: "column",
            index: j,
            limit: spec.k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(matrix as u64);
    rng.set_word_pos(word_pos(i, j));
    Ok(spec.distribution.transform(unit_open(rng.next_u64())))
}

/// A `(power, matrix)` pair: the projection of `x^power` through `R^(matrix)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Route {
    pub power: u32,
    pub matrix: u32,
}

impl Route {
    pub const fn new(power: u32, matrix: u32) -> Self {
        Self { power, matrix }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sketch<T> {
    id: String,
    spec: ProjectionSpec,
    max_power: u32,
    projections: Vec<(Route, Vec<T>)>,
    margins: Vec<(u32, T)>,
}

/// Even margin orders cached with a sketch of the given maximum power.
pub fn margin_orders(max_power: u32) -> &'static [u32] {
    if max_power >= 5 {
        &[2, 4, 6, 8, 10]
    } else {
        &[2, 4, 6]
    }
}

fn check_max_power(scheme: Scheme, max_power: u32) -> Result<()> {
    match (scheme, max_power) {
        (Scheme::OneMatrix, 3 | 5) | (Scheme::ThreeMatrix, 3) => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "max power {max_power} is not supported for the {scheme} scheme"
        ))),
    }
}

impl<T: Scalar> Sketch<T> {
    /// Assembles a sketch from stored parts, validating shape and routes.
    pub fn from_parts(
        id: String,
        spec: ProjectionSpec,
        max_power: u32,
        mut projections: Vec<(Route, Vec<T>)>,
        mut margins: Vec<(u32, T)>,
    ) -> Result<Self> {
        check_max_power(spec.scheme, max_power)?;
        projections.sort_by_key(|(r, _)| *r);
        let routes: Vec<Route> = projections.iter().map(|(r, _)| *r).collect();
        let mut want = spec.scheme.routes(max_power);
        want.sort();
        if routes != want {
            return Err(Error::InvalidArgument(format!(
                "sketch `{id}` has routes {routes:?}, expected {want:?}"
            )));
        }
        if let Some((r, v)) = projections.iter().find(|(_, v)| v.len() != spec.k) {
            return Err(Error::InvalidArgument(format!(
                "sketch `{id}` power {} has length {}, expected k = {}",
                r.power,
                v.len(),
                spec.k
            )));
        }
        margins.sort_by_key(|(q, _)| *q);
        if margins.iter().any(|(_, m)| *m < T::zero()) {
            return Err(Error::InvalidArgument(format!("sketch `{id}` has a negative margin")));
        }
        Ok(Self {
            id,
            spec,
            max_power,
            projections,
            margins,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn spec(&self) -> &ProjectionSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn max_power(&self) -> u32 {
        self.max_power
    }

    pub fn projections(&self) -> &[(Route, Vec<T>)] {
        &self.projections
    }

    pub fn margins(&self) -> &[(u32, T)] {
        &self.margins
    }

    pub fn projection(&self, power: u32, matrix: u32) -> Option<&[T]> {
        self.projections
            .iter()
            .find(|(r, _)| r.power == power && r.matrix == matrix)
            .map(|(_, v)| v.as_slice())
    }

    /// Projection of `x^power` under the matrix used for the term whose
    /// first factor has power `lead`.
    pub fn term_projection(&self, power: u32, lead: u32) -> Result<&[T]> {
        let matrix = self.spec.scheme.term_matrix(lead, power);
        self.projection(power, matrix).ok_or(Error::MissingPower(power))
    }

    pub fn margin(&self, q: u32) -> Option<T> {
        self.margins.iter().find(|(p, _)| *p == q).map(|(_, m)| *m)
    }

    pub fn require_margin(&self, q: u32) -> Result<T> {
        self.margin(q).ok_or(Error::MissingMargin(q))
    }

    pub fn check_combinable(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }
}

/// Sketches `x`: `u_r[j] = Σ_i x_i^r R^(m)[i, j]` for every stored route.
///
/// Zero entries are skipped, so the cost is `O(nnz(x) · k · routes)`.
pub fn sketch_vector<T: Scalar>(
    id: impl Into<String>,
    x: &DataVector<T>,
    spec: &ProjectionSpec,
    max_power: u32,
) -> Result<Sketch<T>> {
    let mut out = sketch_batch(&[(id.into(), x)], spec, max_power)?;
    Ok(out.pop().expect("one sketch per input"))
}

/// Sketches many vectors under one spec, generating each matrix row once per
/// worker. Results are bit-identical to [`sketch_vector`].
pub fn sketch_batch<T: Scalar>(
    inputs: &[(String, &DataVector<T>)],
    spec: &ProjectionSpec,
    max_power: u32,
) -> Result<Vec<Sketch<T>>> {
    check_max_power(spec.scheme, max_power)?;
    for (_, x) in inputs {
        if x.dim() != spec.dim {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: spec.dim,
            });
        }
    }
    let workers = rayon::current_num_threads().max(1);
    let chunk = inputs.len().div_ceil(workers).max(1);
    let parts: Vec<Vec<Sketch<T>>> = inputs
        .par_chunks(chunk)
        .map(|part| sketch_chunk(part, spec, max_power))
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

fn sketch_chunk<T: Scalar>(
    inputs: &[(String, &DataVector<T>)],
    spec: &ProjectionSpec,
    max_power: u32,
) -> Vec<Sketch<T>> {
    let k = spec.k;
    let routes = spec.scheme.routes(max_power);
    let matrices = spec.scheme.matrices();
    let source = spec.entry_source();

    // rows[i] = every (input, value) with a nonzero at i
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); spec.dim];
    for (n, (_, x)) in inputs.iter().enumerate() {
        for (i, v) in x.iter_nonzero() {
            rows[i].push((n, v));
        }
    }

    let mut acc: Vec<Vec<Vec<T>>> = inputs
        .iter()
        .map(|_| routes.iter().map(|_| vec![T::zero(); k]).collect())
        .collect();
    let mut row_f64 = vec![0.0f64; k];
    let mut row: Vec<Vec<T>> = matrices.iter().map(|_| vec![T::zero(); k]).collect();
    let mut powers = vec![T::zero(); max_power as usize + 1];

    for (i, members) in rows.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        for (slot, &m) in matrices.iter().enumerate() {
            source.fill_row(m, i, &mut row_f64);
            for (dst, &e) in row[slot].iter_mut().zip(&row_f64) {
                *dst = T::from_f64(e);
            }
        }
        for &(n, xi) in members {
            powers[0] = T::one();
            for r in 1..powers.len() {
                powers[r] = powers[r - 1] * xi;
            }
            for (ri, route) in routes.iter().enumerate() {
                let slot = matrices.iter().position(|&m| m == route.matrix).unwrap();
                let c = powers[route.power as usize];
                for (a, &e) in acc[n][ri].iter_mut().zip(&row[slot]) {
                    *a = *a + c * e;
                }
            }
        }
    }

    inputs
        .iter()
        .zip(acc)
        .map(|((id, x), vecs)| Sketch {
            id: id.clone(),
            spec: *spec,
            max_power,
            projections: routes.iter().copied().zip(vecs).collect(),
            margins: margin_orders(max_power)
                .iter()
                .map(|&q| (q, power_sum(x, q)))
                .collect(),
        })
        .collect()
}
