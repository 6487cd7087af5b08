//! Exact mixed power sums of a vector pair.
//!
//! [`MomentTable`] holds `S(a, b) = Σ_i x_i^a y_i^b` for every `0 ≤ a, b ≤ 6`
//! with `a + b ≤ 8`, plus the difference sums `Σ |x_i − y_i|^p` for
//! `p ∈ {2, 4, 6, 8}`. All sums run over the union of supports in ascending
//! index order with compensated accumulation, so dense and sparse inputs give
//! bit-identical tables.

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};
use crate::vector::{for_each_union, inner, DataVector};

pub const MAX_SINGLE_POWER: usize = 6;
pub const MAX_TOTAL_POWER: usize = 8;
pub const DIFF_ORDERS: [u32; 4] = [2, 4, 6, 8];

/// Whether `S(a, b)` is stored in a [`MomentTable`].
pub const fn is_housed(a: usize, b: usize) -> bool {
    a <= MAX_SINGLE_POWER && b <= MAX_SINGLE_POWER && a + b <= MAX_TOTAL_POWER
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<T> {
    dim: usize,
    mixed: [[T; MAX_SINGLE_POWER + 1]; MAX_SINGLE_POWER + 1],
    diff: [T; 4],
    nnz_x: usize,
    nnz_y: usize,
}

impl<T: Scalar> MomentTable<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `S(a, b) = Σ x_i^a y_i^b`. Panics if `(a, b)` is not housed.
    pub fn s(&self, a: usize, b: usize) -> T {
        assert!(is_housed(a, b), "S({a},{b}) is not housed in the moment table");
        self.mixed[a][b]
    }

    pub fn get(&self, a: usize, b: usize) -> Option<T> {
        is_housed(a, b).then(|| self.mixed[a][b])
    }

    /// `Σ |x_i − y_i|^p` for even `p` in `2..=8`.
    pub fn diff_pow(&self, p: u32) -> Result<T> {
        match p {
            2 => Ok(self.diff[0]),
            4 => Ok(self.diff[1]),
            6 => Ok(self.diff[2]),
            8 => Ok(self.diff[3]),
            other => Err(Error::UnsupportedOrder(other)),
        }
    }

    pub fn nnz_x(&self) -> usize {
        self.nnz_x
    }

    pub fn nnz_y(&self) -> usize {
        self.nnz_y
    }

    /// Moment table of the swapped pair `(y, x)`.
    pub fn swapped(&self) -> Self {
        let mut mixed = self.mixed;
        for (a, row) in mixed.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = self.mixed[b][a];
            }
        }
        Self {
            dim: self.dim,
            mixed,
            diff: self.diff,
            nnz_x: self.nnz_y,
            nnz_y: self.nnz_x,
        }
    }

    /// The l4 distance assembled from mixed moments.
    pub fn d4_from_mixed(&self) -> T {
        let four = T::from_usize(4);
        self.s(4, 0) + self.s(0, 4) + T::from_usize(6) * self.s(2, 2)
            - four * self.s(3, 1)
            - four * self.s(1, 3)
    }

    /// The l6 distance assembled from mixed moments.
    pub fn d6_from_mixed(&self) -> T {
        let c = T::from_usize;
        self.s(6, 0) + self.s(0, 6) - c(20) * self.s(3, 3)
            + c(15) * self.s(2, 4)
            + c(15) * self.s(4, 2)
            - c(6) * self.s(5, 1)
            - c(6) * self.s(1, 5)
    }
}

/// One pass over the union of supports computing every housed moment.
pub fn compute_moments<T: Scalar>(x: &DataVector<T>, y: &DataVector<T>) -> Result<MomentTable<T>> {
    x.check_same_dim(y)?;
    const N: usize = MAX_SINGLE_POWER + 1;
    let mut acc = [[CompensatedSum::<T>::new(); N]; N];
    let mut diff = [CompensatedSum::<T>::new(); 4];

    for_each_union(x, y, |_, xi, yi| {
        let mut xp = [T::one(); N];
        let mut yp = [T::one(); N];
        for r in 1..N {
            xp[r] = xp[r - 1] * xi;
            yp[r] = yp[r - 1] * yi;
        }
        for a in 0..N {
            for b in 0..N {
                if (a, b) != (0, 0) && is_housed(a, b) {
                    acc[a][b].add(xp[a] * yp[b]);
                }
            }
        }
        // abs before the power keeps one code path for every order
        let d = (xi - yi).abs();
        let d2 = d * d;
        let d4 = d2 * d2;
        diff[0].add(d2);
        diff[1].add(d4);
        diff[2].add(d4 * d2);
        diff[3].add(d4 * d4);
    });

    let mut mixed = [[T::zero(); N]; N];
    for a in 0..N {
        for b in 0..N {
            if is_housed(a, b) {
                mixed[a][b] = acc[a][b].value();
            }
        }
    }
    mixed[0][0] = T::from_usize(x.dim());

    Ok(MomentTable {
        dim: x.dim(),
        mixed,
        diff: [diff[0].value(), diff[1].value(), diff[2].value(), diff[3].value()],
        nnz_x: x.nnz(),
        nnz_y: y.nnz(),
    })
}

/// `Σ |x_i − y_i|^p` (no `1/p` root) for `p ∈ {2, 4, 6, 8}`.
pub fn exact_lp<T: Scalar>(x: &DataVector<T>, y: &DataVector<T>, p: u32) -> Result<T> {
    if !DIFF_ORDERS.contains(&p) {
        return Err(Error::UnsupportedOrder(p));
    }
    x.check_same_dim(y)?;
    let mut acc = CompensatedSum::new();
    for_each_union(x, y, |_, xi, yi| acc.add((xi - yi).abs().powi_exact(p)));
    Ok(acc.value())
}

/// `Σ_i |v_i|^q`.
pub fn power_sum<T: Scalar>(v: &DataVector<T>, q: u32) -> T {
    v.iter_nonzero()
        .map(|(_, x)| x.abs().powi_exact(q))
        .collect::<CompensatedSum<T>>()
        .value()
}

/// The l4 similarity `1 − d4 / (Σx⁴ + Σy⁴)`: 1 for identical vectors, 0 for
/// disjoint supports.
pub fn beta4<T: Scalar>(x: &DataVector<T>, y: &DataVector<T>) -> Result<T> {
    let m = compute_moments(x, y)?;
    beta4_from_moments(&m)
}

pub fn beta4_from_moments<T: Scalar>(m: &MomentTable<T>) -> Result<T> {
    let denom = m.s(4, 0) + m.s(0, 4);
    if denom.is_zero() {
        return Err(Error::ZeroVectors);
    }
    // no shared support: the distance is the denominator, up to summation order
    if m.s(2, 2).is_zero() && m.s(3, 1).is_zero() && m.s(1, 3).is_zero() {
        return Ok(T::zero());
    }
    Ok(T::one() - m.diff_pow(4)? / denom)
}

/// Closed form of `E[(aᵀr)(bᵀr)(cᵀr)(dᵀr)]` for `r` with i.i.d. standard
/// normal entries: `⟨a,b⟩⟨c,d⟩ + ⟨a,c⟩⟨b,d⟩ + ⟨a,d⟩⟨b,c⟩`.
pub fn gaussian_quartic_expectation<T: Scalar>(
    a: &DataVector<T>,
    b: &DataVector<T>,
    c: &DataVector<T>,
    d: &DataVector<T>,
) -> Result<T> {
    Ok(inner(a, b)? * inner(c, d)? + inner(a, c)? * inner(b, d)? + inner(a, d)? * inner(b, c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn dv(v: &[f64]) -> DataVector<f64> {
        DataVector::dense(v.to_vec()).unwrap()
    }

    fn naive_s(x: &[f64], y: &[f64], a: i32, b: i32) -> f64 {
        x.iter().zip(y).map(|(p, q)| p.powi(a) * q.powi(b)).sum()
    }

    #[test]
    fn zero_vectors() {
        let z = DataVector::<f64>::zeros(3).unwrap();
        let m = compute_moments(&z, &z).unwrap();
        for a in 0..=6 {
            for b in 0..=6 {
                if let Some(v) = m.get(a, b) {
                    let expect = if (a, b) == (0, 0) { 3.0 } else { 0.0 };
                    assert_eq!(v, expect, "S({a},{b})");
                }
            }
        }
        for p in DIFF_ORDERS {
            assert_eq!(m.diff_pow(p).unwrap(), 0.0);
        }
    }

    #[test]
    fn small_hand_cases() {
        let m = compute_moments(&dv(&[1.0, 2.0, 0.0]), &dv(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(m.s(4, 0), 17.0);
        assert_eq!(m.diff_pow(4).unwrap(), 17.0);
        assert_eq!(m.s(2, 2), 0.0);

        let m = compute_moments(&dv(&[1.0, 0.0]), &dv(&[0.0, 1.0])).unwrap();
        assert_eq!(m.s(2, 2), 0.0);
        assert_eq!(m.s(3, 1), 0.0);
        assert_eq!(m.s(4, 0), 1.0);
        assert_eq!(m.s(0, 4), 1.0);
        assert_eq!(m.diff_pow(4).unwrap(), 2.0);
    }

    #[test]
    fn table_matches_naive_sums() {
        let x = [0.3, -1.2, 2.0, 0.0, 0.7];
        let y = [1.1, 0.0, -0.4, 0.9, 0.7];
        let m = compute_moments(&dv(&x), &dv(&y)).unwrap();
        for a in 0..=6usize {
            for b in 0..=6usize {
                if is_housed(a, b) {
                    let want = naive_s(&x, &y, a as i32, b as i32);
                    assert!((m.s(a, b) - want).abs() <= 1e-12 * want.abs().max(1.0));
                }
            }
        }
        assert_eq!(m.nnz_x(), 4);
        assert_eq!(m.nnz_y(), 4);
    }

    #[test]
    fn exact_lp_cases() {
        let x = dv(&[1.0, 2.0, 0.0]);
        assert_eq!(exact_lp(&x, &x, 4).unwrap(), 0.0);
        assert_eq!(exact_lp(&x, &dv(&[0.0, 0.0, 0.0]), 4).unwrap(), 17.0);
        assert_eq!(exact_lp(&dv(&[1.0]), &dv(&[2.0]), 6).unwrap(), 1.0);
        assert_eq!(1.0 + 64.0 - 160.0 + 240.0 + 60.0 - 12.0 - 192.0, 1.0);
        assert!(matches!(exact_lp(&x, &x, 3), Err(Error::UnsupportedOrder(3))));
        assert!(matches!(
            exact_lp(&x, &dv(&[1.0]), 4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn beta4_cases() {
        let x = dv(&[1.0, 3.0, 0.5]);
        assert_eq!(beta4(&x, &x).unwrap(), 1.0);
        assert_eq!(beta4(&dv(&[1.0, 0.0]), &dv(&[0.0, 1.0])).unwrap(), 0.0);
        let z = DataVector::<f64>::zeros(2).unwrap();
        assert!(matches!(beta4(&z, &z), Err(Error::ZeroVectors)));
    }

    #[test]
    fn quartic_expectation_unit_vectors() {
        let e1 = dv(&[1.0, 0.0]);
        let e2 = dv(&[0.0, 1.0]);
        assert_eq!(gaussian_quartic_expectation(&e1, &e1, &e1, &e1).unwrap(), 3.0);
        assert_eq!(gaussian_quartic_expectation(&e1, &e1, &e2, &e2).unwrap(), 1.0);
        assert_eq!(gaussian_quartic_expectation(&e1, &e2, &e1, &e2).unwrap(), 1.0);
    }

    #[test]
    fn exact_rational_moments() {
        let x = DataVector::dense(vec![Exact::new(1, 2), Exact::from_integer(-3)]).unwrap();
        let y = DataVector::dense(vec![Exact::new(2, 3), Exact::from_integer(1)]).unwrap();
        let m = compute_moments(&x, &y).unwrap();
        assert_eq!(m.d4_from_mixed(), m.diff_pow(4).unwrap());
        assert_eq!(m.d6_from_mixed(), m.diff_pow(6).unwrap());
    }

    #[test]
    fn swapped_transposes() {
        let m = compute_moments(&dv(&[1.0, 2.0]), &dv(&[3.0, -1.0])).unwrap();
        let s = m.swapped();
        assert_eq!(s.s(3, 1), m.s(1, 3));
        assert_eq!(s.s(5, 2), m.s(2, 5));
    }
}
