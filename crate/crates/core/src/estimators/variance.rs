//! Closed-form variances of the estimators, as functions of a [`MomentTable`].

use crate::moments::MomentTable;
use crate::scalar::Scalar;

fn c<T: Scalar>(n: usize) -> T {
    T::from_usize(n)
}

/// Simple random sampling with replacement:
/// `(D/k)·(Σ|x−y|⁸ − (Σ|x−y|⁴)²/D)`.
pub fn var_sampling<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    let d = c::<T>(m.dim());
    let d4 = m.diff_pow(4).expect("housed");
    let d8 = m.diff_pow(8).expect("housed");
    d / c(k) * (d8 - d4 * d4 / d)
}

/// Conditional-random-sampling variance predictor:
/// `max(|x|₀, |y|₀)/D · var_sampling`.
pub fn var_crs_predictor<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    let nnz = m.nnz_x().max(m.nnz_y());
    c::<T>(nnz) / c(m.dim()) * var_sampling(m, k)
}

/// Three independent matrices.
pub fn var_3p<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    let s = |a, b| m.s(a, b);
    let kk = c::<T>(k);
    c::<T>(36) / kk * (s(4, 0) * s(0, 4) + s(2, 2) * s(2, 2))
        + c::<T>(16) / kk * (s(6, 0) * s(0, 2) + s(3, 1) * s(3, 1))
        + c::<T>(16) / kk * (s(2, 0) * s(0, 6) + s(1, 3) * s(1, 3))
}

/// `var_1p − var_3p`, the correlation term from sharing one matrix.
pub fn delta_1p<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    let s = |a, b| m.s(a, b);
    let kk = c::<T>(k);
    -(c::<T>(48) / kk) * (s(5, 0) * s(0, 3) + s(2, 1) * s(3, 2))
        - c::<T>(48) / kk * (s(3, 0) * s(0, 5) + s(1, 2) * s(2, 3))
        + c::<T>(32) / kk * (s(4, 0) * s(0, 4) + s(1, 1) * s(3, 3))
}

pub fn var_1p<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    var_3p(m, k) + delta_1p(m, k)
}

/// Large-k variance of the three-matrix margin estimator.
///
/// Each term is `(P − a²)² / (P + a²)` with `P` the product of the two
/// margins and `a` the inner product; a term whose denominator vanishes is 0.
pub fn var_3p_margin_asymptotic<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    let s = |a, b| m.s(a, b);
    let term = |p: T, a: T| {
        let den = p + a * a;
        if den.is_zero() {
            T::zero()
        } else {
            let num = p - a * a;
            num * num / den
        }
    };
    let kk = c::<T>(k);
    c::<T>(36) / kk * term(s(4, 0) * s(0, 4), s(2, 2))
        + c::<T>(16) / kk * term(s(6, 0) * s(0, 2), s(3, 1))
        + c::<T>(16) / kk * term(s(2, 0) * s(0, 6), s(1, 3))
}

/// `var_1p_identity − var_1p`.
pub fn delta_identity<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    let s = |a, b| m.s(a, b);
    let n = c::<T>;
    let body = n(36) * s(2, 2) * s(2, 2)
        + n(34) * (s(4, 0) * s(4, 0) + s(0, 4) * s(0, 4))
        + n(32) * s(1, 3) * s(3, 1)
        - n(32) * s(4, 0) * s(3, 1)
        - n(72) * (s(4, 0) * s(2, 2) + s(0, 4) * s(2, 2))
        - n(32) * (s(0, 4) * s(3, 1) + s(4, 0) * s(1, 3) + s(0, 4) * s(1, 3))
        - n(48) * (s(3, 0) * s(5, 0) + s(2, 1) * s(2, 3))
        - n(48) * (s(0, 3) * s(0, 5) + s(1, 2) * s(3, 2))
        + n(48) * (s(3, 0) * s(3, 2) + s(5, 0) * s(1, 2) + s(0, 3) * s(2, 3))
        + n(48) * (s(0, 5) * s(2, 1) + s(5, 0) * s(2, 1) + s(0, 3) * s(3, 2))
        + n(48) * (s(3, 0) * s(2, 3) + s(0, 5) * s(1, 2))
        - n(32) * (s(6, 0) * s(1, 1) + s(0, 2) * s(3, 3))
        - n(32) * (s(2, 0) * s(3, 3) + s(0, 6) * s(1, 1))
        + n(16) * (s(2, 0) * s(6, 0) + s(0, 2) * s(0, 6) + n(2) * s(1, 1) * s(3, 3));
    body / n(k)
}

pub fn var_1p_identity<T: Scalar>(m: &MomentTable<T>, k: usize) -> T {
    var_1p(m, k) + delta_identity(m, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::compute_moments;
    use crate::scalar::Exact;
    use crate::vector::DataVector;

    fn exact_vec(v: &[i128]) -> DataVector<Exact> {
        DataVector::dense(v.iter().map(|&n| Exact::from_integer(n)).collect()).unwrap()
    }

    #[test]
    fn disjoint_unit_pair_exact() {
        let m = compute_moments(&exact_vec(&[1, 0]), &exact_vec(&[0, 1])).unwrap();
        assert_eq!(var_3p(&m, 1), Exact::from_integer(68));
        assert_eq!(delta_1p(&m, 1), Exact::from_integer(-64));
        assert_eq!(var_1p(&m, 1), Exact::from_integer(4));
        assert_eq!(var_3p_margin_asymptotic(&m, 1), Exact::from_integer(68));
        assert!(delta_identity(&m, 1) > Exact::from_integer(0));
    }

    #[test]
    fn zero_vectors_have_zero_variance() {
        let z = DataVector::<f64>::zeros(4).unwrap();
        let m = compute_moments(&z, &z).unwrap();
        assert_eq!(var_3p(&m, 3), 0.0);
        assert_eq!(delta_1p(&m, 3), 0.0);
        assert_eq!(var_sampling(&m, 3), 0.0);
        assert_eq!(var_crs_predictor(&m, 3), 0.0);
        assert_eq!(var_3p_margin_asymptotic(&m, 3), 0.0);
        assert_eq!(var_1p_identity(&m, 3), 0.0);
    }

    #[test]
    fn identical_vectors_exact() {
        let x = exact_vec(&[3, -1, 0, 2, 5]);
        let m = compute_moments(&x, &x).unwrap();
        assert_eq!(var_1p_identity(&m, 7), Exact::from_integer(0));
    }

    #[test]
    fn crs_predictor_factor() {
        let mut x = vec![0.0; 100];
        let mut y = vec![0.0; 100];
        x[0] = 1.0;
        y[1] = 1.0;
        let m = compute_moments(&DataVector::dense(x).unwrap(), &DataVector::dense(y).unwrap()).unwrap();
        let v: f64 = var_sampling(&m, 5);
        assert!((var_crs_predictor(&m, 5) - v / 100.0).abs() < 1e-15 * v);

        let dense = compute_moments(
            &DataVector::dense(vec![1.0, 2.0, 3.0]).unwrap(),
            &DataVector::dense(vec![2.0, 0.5, 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(var_crs_predictor(&dense, 4), var_sampling(&dense, 4));
    }

    #[test]
    fn sampling_variance_single_coordinate() {
        let m = compute_moments(
            &DataVector::dense(vec![3.0]).unwrap(),
            &DataVector::dense(vec![1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(var_sampling(&m, 1), 0.0);
    }
}
