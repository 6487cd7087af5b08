//! Sampling projected statistics without forming projections.
//!
//! Under normal entries, column `j` of the projections of a fixed set of
//! vectors `w_1..w_n` through one matrix is `N(0, G)` with `G` their Gram
//! matrix, independently over `j`. The `k`-column inner products are thus
//! one draw of `Wishart_n(k, G)`. Factoring `G = L Lᵀ` once and drawing the
//! Bartlett factor `A` of `Wishart_r(k, I)` per trial gives
//! `W = (LA)(LA)ᵀ`, an exact sample at `O(n·r²)` cost instead of `O(D·k)`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimators::ProjectedPair;
use crate::moments::power_sum;
use crate::projector::{margin_orders, Scheme};
use crate::scalar::CompensatedSum;
use crate::vector::{for_each_union, DataVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    X,
    Y,
}

/// Relative cutoff below which correlation eigenvalues are treated as 0.
const RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
struct Group {
    matrix: u32,
    /// `(side, power)` → row of `factor`
    members: Vec<(Side, u32, usize)>,
    /// `n_unique × r`
    factor: DMatrix<f64>,
}

impl Group {
    fn slot(&self, side: Side, power: u32) -> Option<usize> {
        self.members
            .iter()
            .find(|(s, p, _)| *s == side && *p == power)
            .map(|&(_, _, i)| i)
    }
}

/// The joint law of every statistic the projection estimators read, for a
/// fixed pair under normal projections.
#[derive(Debug, Clone)]
pub struct GaussianPairModel {
    k: usize,
    scheme: Scheme,
    margins_x: Vec<(u32, f64)>,
    margins_y: Vec<(u32, f64)>,
    groups: Vec<Group>,
}

fn powered(v: &DataVector<f64>, p: u32) -> Vec<(usize, f64)> {
    v.iter_nonzero().map(|(i, a)| (i, a.powi(p as i32))).collect()
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let mut acc = CompensatedSum::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc.add(a[i].1 * b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    acc.value()
}

/// `L` with `L Lᵀ = G`, via the eigendecomposition of the correlation matrix.
fn gram_factor(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let n = gram.nrows();
    let scale: Vec<f64> = (0..n).map(|i| gram[(i, i)].max(0.0).sqrt()).collect();
    let corr = DMatrix::from_fn(n, n, |i, j| {
        if scale[i] > 0.0 && scale[j] > 0.0 {
            gram[(i, j)] / (scale[i] * scale[j])
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(corr);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n)
        .filter(|&c| eig.eigenvalues[c] > RANK_TOL * top.max(1.0))
        .collect();
    DMatrix::from_fn(n, keep.len().max(1), |i, c| match keep.get(c) {
        Some(&col) => scale[i] * eig.eigenvectors[(i, col)] * eig.eigenvalues[col].sqrt(),
        None => 0.0,
    })
}

impl GaussianPairModel {
    /// Model for sketches of `x` and `y` with `k` columns, storing powers
    /// `1..=max_power` under `scheme`.
    pub fn new(x: &DataVector<f64>, y: &DataVector<f64>, k: usize, scheme: Scheme, max_power: u32) -> Result<Self> {
        x.check_same_dim(y)?;
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        let routes = scheme.routes(max_power);
        let mut groups = Vec::new();
        for &matrix in scheme.matrices() {
            let powers: Vec<u32> = routes.iter().filter(|r| r.matrix == matrix).map(|r| r.power).collect();
            // distinct powered vectors; bit-identical ones share a row so
            // their draws coincide exactly
            let mut unique: Vec<Vec<(usize, f64)>> = Vec::new();
            let mut members = Vec::new();
            for (side, v) in [(Side::X, x), (Side::Y, y)] {
                for &p in &powers {
                    let w = powered(v, p);
                    let slot = match unique.iter().position(|u| *u == w) {
                        Some(s) => s,
                        None => {
                            unique.push(w);
                            unique.len() - 1
                        }
                    };
                    members.push((side, p, slot));
                }
            }
            let n = unique.len();
            let mut gram = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let g = sparse_dot(&unique[i], &unique[j]);
                    gram[(i, j)] = g;
                    gram[(j, i)] = g;
                }
            }
            groups.push(Group {
                matrix,
                members,
                factor: gram_factor(&gram),
            });
        }
        let margins = |v: &DataVector<f64>| margin_orders(max_power).iter().map(|&q| (q, power_sum(v, q))).collect();
        Ok(Self {
            k,
            scheme,
            margins_x: margins(x),
            margins_y: margins(y),
            groups,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same pair, different number of columns.
    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    /// One joint draw of all projected inner products.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> GaussianDraw<'_> {
        let grams = self.groups.iter().map(|g| wishart(&g.factor, self.k, rng)).collect();
        GaussianDraw { model: self, grams }
    }
}

/// `(LA)(LA)ᵀ` with `A` the Bartlett factor of `Wishart_r(k, I)`; for
/// `k < r` the `k` columns are drawn directly.
fn wishart<R: Rng + ?Sized>(l: &DMatrix<f64>, k: usize, rng: &mut R) -> DMatrix<f64> {
    let r = l.ncols();
    let a = if k >= r {
        let mut a = DMatrix::zeros(r, r);
        for i in 0..r {
            let chi = ChiSquared::new((k - i) as f64).unwrap();
            a[(i, i)] = chi.sample(rng).sqrt();
            for j in 0..i {
                a[(i, j)] = rng.sample(StandardNormal);
            }
        }
        a
    } else {
        DMatrix::from_fn(r, k, |_, _| rng.sample(StandardNormal))
    };
    let b = l * a;
    let n = b.nrows();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for c in 0..b.ncols() {
                s += b[(i, c)] * b[(j, c)];
            }
            w[(i, j)] = s;
            w[(j, i)] = s;
        }
    }
    w
}

/// One sample of the projected statistics; implements [`ProjectedPair`].
#[derive(Debug, Clone)]
pub struct GaussianDraw<'a> {
    model: &'a GaussianPairModel,
    grams: Vec<DMatrix<f64>>,
}

impl GaussianDraw<'_> {
    fn entry(&self, matrix: u32, a: (Side, u32), b: (Side, u32)) -> Result<f64> {
        let g = self
            .model
            .groups
            .iter()
            .position(|g| g.matrix == matrix)
            .ok_or(Error::MissingPower(a.1))?;
        let group = &self.model.groups[g];
        let i = group.slot(a.0, a.1).ok_or(Error::MissingPower(a.1))?;
        let j = group.slot(b.0, b.1).ok_or(Error::MissingPower(b.1))?;
        Ok(self.grams[g][(i, j)])
    }

    fn one_matrix(&self) -> Result<()> {
        if self.model.scheme == Scheme::OneMatrix {
            Ok(())
        } else {
            Err(Error::SchemeMismatch {
                estimator: "self inner products",
                expected: "one-matrix",
            })
        }
    }
}

fn margin(list: &[(u32, f64)], q: u32) -> Result<f64> {
    list.iter().find(|(p, _)| *p == q).map(|(_, m)| *m).ok_or(Error::MissingMargin(q))
}

impl ProjectedPair<f64> for GaussianDraw<'_> {
    fn k(&self) -> usize {
        self.model.k
    }
    fn scheme(&self) -> Scheme {
        self.model.scheme
    }
    fn margin_x(&self, q: u32) -> Result<f64> {
        margin(&self.model.margins_x, q)
    }
    fn margin_y(&self, q: u32) -> Result<f64> {
        margin(&self.model.margins_y, q)
    }
    fn cross(&self, a: u32, b: u32) -> Result<f64> {
        let m = self.model.scheme.term_matrix(a, b);
        self.entry(m, (Side::X, a), (Side::Y, b))
    }
    fn norm_x(&self, a: u32, b: u32) -> Result<f64> {
        let m = self.model.scheme.term_matrix(a, b);
        self.entry(m, (Side::X, a), (Side::X, a))
    }
    fn norm_y(&self, a: u32, b: u32) -> Result<f64> {
        let m = self.model.scheme.term_matrix(a, b);
        self.entry(m, (Side::Y, b), (Side::Y, b))
    }
    fn self_x(&self, a: u32, b: u32) -> Result<f64> {
        self.one_matrix()?;
        self.entry(1, (Side::X, a), (Side::X, b))
    }
    fn self_y(&self, a: u32, b: u32) -> Result<f64> {
        self.one_matrix()?;
        self.entry(1, (Side::Y, a), (Side::Y, b))
    }
}

/// Gram entry `Σ x^a y^b` computed directly; used by tests as a reference.
pub fn mixed_sum(x: &DataVector<f64>, y: &DataVector<f64>, a: u32, b: u32) -> f64 {
    let mut acc = CompensatedSum::new();
    for_each_union(x, y, |_, xi, yi| acc.add(xi.powi(a as i32) * yi.powi(b as i32)));
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{d4_identity, d4_plain};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DataVector<f64> {
        DataVector::dense(v.to_vec()).unwrap()
    }

    #[test]
    fn factor_reproduces_gram() {
        // rank 2, one zero row
        let b = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.5, -1.0, 0.0, 0.0, 1.5, 1.0]);
        let g = &b * b.transpose();
        let l = gram_factor(&g);
        let back = &l * l.transpose();
        assert!((back - g).abs().max() < 1e-12);
    }

    #[test]
    fn mean_of_draw_is_k_times_gram() {
        let x = dv(&[1.0, 0.5, -2.0, 0.0]);
        let y = dv(&[0.3, 1.0, 1.0, 2.0]);
        let model = GaussianPairModel::new(&x, &y, 7, Scheme::OneMatrix, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += model.draw(&mut rng).cross(3, 1).unwrap();
        }
        let want = 7.0 * mixed_sum(&x, &y, 3, 1);
        assert!((acc / n as f64 - want).abs() < 0.05 * want.abs(), "{} vs {want}", acc / n as f64);
    }

    #[test]
    fn identical_pair_is_exactly_degenerate() {
        let x = dv(&[1.0, 2.0, 0.0, 3.5]);
        let model = GaussianPairModel::new(&x, &x, 3, Scheme::OneMatrix, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let d = model.draw(&mut rng);
            assert_eq!(d4_identity(&d).unwrap(), 0.0);
            assert_eq!(d.cross(2, 2).unwrap(), d.norm_x(2, 2).unwrap());
        }
    }

    #[test]
    fn zero_vector_model() {
        let x = DataVector::zeros(5).unwrap();
        let y = dv(&[1.0, 0.0, 0.0, 2.0, 1.0]);
        let model = GaussianPairModel::new(&x, &y, 10, Scheme::ThreeMatrix, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = model.draw(&mut rng);
        assert_eq!(d.cross(2, 2).unwrap(), 0.0);
        assert_eq!(d4_plain(&d).unwrap(), 18.0);
    }
}
