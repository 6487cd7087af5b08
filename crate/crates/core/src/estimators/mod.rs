//! Distance estimators and their closed-form variances.
//!
//! Projection-based estimators are written against [`ProjectedPair`], the
//! handful of inner products among two sketches that they consume. A pair of
//! [`Sketch`]es is one implementation ([`SketchPair`]); the Monte-Carlo lab
//! provides another that samples those inner products directly.

pub mod cubic;
pub mod variance;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::moments::{compute_moments, exact_lp, power_sum, MomentTable};
use crate::projector::{Scheme, Sketch};
use crate::scalar::{dot, CompensatedSum, Real, Scalar};
use crate::vector::DataVector;

pub use cubic::{solve_margin_cubic, CubicInputs};
pub use variance::{
    delta_1p, delta_identity, var_1p, var_1p_identity, var_3p, var_3p_margin_asymptotic,
    var_crs_predictor, var_sampling,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    Sampling,
    CrsVarOnly,
    ThreeP,
    ThreePMargin,
    OneP,
    OnePMargin,
    OnePIdentity,
    Exact,
    D6OneP,
    /// Picks `1p-i` or `1p` from a plug-in similarity; experimental.
    Auto,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 10] = [
        EstimatorId::Sampling,
        EstimatorId::CrsVarOnly,
        EstimatorId::ThreeP,
        EstimatorId::ThreePMargin,
        EstimatorId::OneP,
        EstimatorId::OnePMargin,
        EstimatorId::OnePIdentity,
        EstimatorId::Exact,
        EstimatorId::D6OneP,
        EstimatorId::Auto,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Sampling => "sampling",
            EstimatorId::CrsVarOnly => "crs-var-only",
            EstimatorId::ThreeP => "3p",
            EstimatorId::ThreePMargin => "3p-m",
            EstimatorId::OneP => "1p",
            EstimatorId::OnePMargin => "1p-m",
            EstimatorId::OnePIdentity => "1p-i",
            EstimatorId::Exact => "exact",
            EstimatorId::D6OneP => "d6-1p",
            EstimatorId::Auto => "auto",
        }
    }

    /// Projection scheme the estimator consumes, if it uses projections.
    pub fn scheme(self) -> Option<Scheme> {
        match self {
            EstimatorId::ThreeP | EstimatorId::ThreePMargin => Some(Scheme::ThreeMatrix),
            EstimatorId::OneP
            | EstimatorId::OnePMargin
            | EstimatorId::OnePIdentity
            | EstimatorId::D6OneP
            | EstimatorId::Auto => Some(Scheme::OneMatrix),
            _ => None,
        }
    }

    /// Distance order the estimator targets.
    pub fn order(self) -> u32 {
        if self == EstimatorId::D6OneP {
            6
        } else {
            4
        }
    }

    /// Highest power the sketches must carry.
    pub fn max_power(self) -> u32 {
        if self == EstimatorId::D6OneP {
            5
        } else {
            3
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "crs" {
            return Ok(EstimatorId::CrsVarOnly);
        }
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub estimator: EstimatorId,
    pub value: T,
    pub predicted_variance: Option<T>,
    pub k: usize,
    pub p: u32,
}

/// The projected statistics a projection estimator reads.
///
/// `a`/`b` are the powers of `x` and `y` in the inner-product term
/// `Σ x^a y^b`; every quantity for a term lives under that term's matrix.
pub trait ProjectedPair<T> {
    fn k(&self) -> usize;
    fn scheme(&self) -> Scheme;
    fn margin_x(&self, q: u32) -> Result<T>;
    fn margin_y(&self, q: u32) -> Result<T>;
    /// `u_aᵀ v_b`.
    fn cross(&self, a: u32, b: u32) -> Result<T>;
    /// `‖u_a‖²` under the matrix of term `(a, b)`.
    fn norm_x(&self, a: u32, b: u32) -> Result<T>;
    /// `‖v_b‖²` under the matrix of term `(a, b)`.
    fn norm_y(&self, a: u32, b: u32) -> Result<T>;
    /// `u_aᵀ u_b` (one-matrix scheme only).
    fn self_x(&self, a: u32, b: u32) -> Result<T>;
    /// `v_aᵀ v_b` (one-matrix scheme only).
    fn self_y(&self, a: u32, b: u32) -> Result<T>;
}

/// Two sketches viewed as a [`ProjectedPair`]; inner products are computed on
/// demand.
#[derive(Debug, Clone, Copy)]
pub struct SketchPair<'a, T> {
    pub x: &'a Sketch<T>,
    pub y: &'a Sketch<T>,
}

impl<'a, T: Scalar> SketchPair<'a, T> {
    pub fn new(x: &'a Sketch<T>, y: &'a Sketch<T>) -> Result<Self> {
        x.check_combinable(y)?;
        Ok(Self { x, y })
    }

    fn one_matrix(&self) -> Result<()> {
        match self.scheme() {
            Scheme::OneMatrix => Ok(()),
            Scheme::ThreeMatrix => Err(Error::SchemeMismatch {
                estimator: "self inner products",
                expected: "one-matrix",
            }),
        }
    }
}

impl<T: Scalar> ProjectedPair<T> for SketchPair<'_, T> {
    fn k(&self) -> usize {
        self.x.k()
    }
    fn scheme(&self) -> Scheme {
        self.x.spec().scheme
    }
    fn margin_x(&self, q: u32) -> Result<T> {
        self.x.require_margin(q)
    }
    fn margin_y(&self, q: u32) -> Result<T> {
        self.y.require_margin(q)
    }
    fn cross(&self, a: u32, b: u32) -> Result<T> {
        Ok(dot(self.x.term_projection(a, a)?, self.y.term_projection(b, a)?))
    }
    fn norm_x(&self, a: u32, _b: u32) -> Result<T> {
        let u = self.x.term_projection(a, a)?;
        Ok(dot(u, u))
    }
    fn norm_y(&self, a: u32, b: u32) -> Result<T> {
        let v = self.y.term_projection(b, a)?;
        Ok(dot(v, v))
    }
    fn self_x(&self, a: u32, b: u32) -> Result<T> {
        self.one_matrix()?;
        Ok(dot(self.x.term_projection(a, a)?, self.x.term_projection(b, a)?))
    }
    fn self_y(&self, a: u32, b: u32) -> Result<T> {
        self.one_matrix()?;
        Ok(dot(self.y.term_projection(a, a)?, self.y.term_projection(b, a)?))
    }
}

fn k_of<T: Scalar>(pp: &impl ProjectedPair<T>) -> T {
    T::from_usize(pp.k())
}

/// `Σx⁴ + Σy⁴ + (6 u₂ᵀv₂ − 4 u₃ᵀv₁ − 4 u₁ᵀv₃)/k`; the same formula serves
/// both schemes.
pub fn d4_plain<T: Scalar>(pp: &impl ProjectedPair<T>) -> Result<T> {
    let c = T::from_usize;
    let cross = c(6) * pp.cross(2, 2)? - c(4) * pp.cross(3, 1)? - c(4) * pp.cross(1, 3)?;
    Ok(pp.margin_x(4)? + pp.margin_y(4)? + cross / k_of(pp))
}

fn margin_term<T: Real>(pp: &impl ProjectedPair<T>, a: u32, b: u32) -> Result<T> {
    let inputs = CubicInputs {
        t: pp.cross(a, b)?,
        su: pp.norm_x(a, b)?,
        sv: pp.norm_y(a, b)?,
        m1: pp.margin_x(2 * a)?,
        m2: pp.margin_y(2 * b)?,
        k: pp.k(),
    };
    Ok(solve_margin_cubic(&inputs))
}

/// Margin-aware l4 estimate: each inner product replaced by its cubic root.
pub fn d4_margin<T: Real>(pp: &impl ProjectedPair<T>) -> Result<T> {
    let (mx4, my4) = (pp.margin_x(4)?, pp.margin_y(4)?);
    if pp.margin_x(2)?.is_zero() || pp.margin_y(2)?.is_zero() {
        return Ok(mx4 + my4);
    }
    let c = T::from_usize;
    Ok(mx4 + my4 + c(6) * margin_term(pp, 2, 2)? - c(4) * margin_term(pp, 3, 1)?
        - c(4) * margin_term(pp, 1, 3)?)
}

/// The identity-friendly estimator: the exact margins are replaced by their
/// projected estimates, so the value is exactly 0 when `x = y`.
pub fn d4_identity<T: Scalar>(pp: &impl ProjectedPair<T>) -> Result<T> {
    if pp.scheme() != Scheme::OneMatrix {
        return Err(Error::SchemeMismatch {
            estimator: "1p-i",
            expected: "one-matrix",
        });
    }
    let c = T::from_usize;
    let t22 = pp.cross(2, 2)?;
    // grouped so each bracket cancels bit-exactly when u == v
    let squares = c(2) * t22 - pp.self_x(2, 2)? - pp.self_y(2, 2)?;
    let lead_x = pp.self_x(1, 3)? - pp.cross(3, 1)?;
    let lead_y = pp.self_y(1, 3)? - pp.cross(1, 3)?;
    Ok((c(3) * squares + c(4) * lead_x + c(4) * lead_y) / k_of(pp))
}

/// l6 from five projected inner products and the exact sixth-power margins.
pub fn d6_plain<T: Scalar>(pp: &impl ProjectedPair<T>) -> Result<T> {
    let c = T::from_usize;
    let cross = -(c(20) * pp.cross(3, 3)?) + c(15) * pp.cross(2, 4)? + c(15) * pp.cross(4, 2)?
        - c(6) * pp.cross(5, 1)?
        - c(6) * pp.cross(1, 5)?;
    Ok(pp.margin_x(6)? + pp.margin_y(6)? + cross / k_of(pp))
}

/// Plug-in l4 similarity from the one-matrix estimate, clamped to `[0, 1]`.
pub fn plugin_beta4<T: Scalar>(pp: &impl ProjectedPair<T>) -> Result<T> {
    let denom = pp.margin_x(4)? + pp.margin_y(4)?;
    if denom.is_zero() {
        return Err(Error::ZeroVectors);
    }
    let b = T::one() - d4_plain(pp)? / denom;
    Ok(if b < T::zero() {
        T::zero()
    } else if b > T::one() {
        T::one()
    } else {
        b
    })
}

/// `1p-i` when the plug-in similarity exceeds `tau`, else `1p`.
pub fn d4_select<T: Scalar>(pp: &impl ProjectedPair<T>, tau: T) -> Result<(EstimatorId, T)> {
    if plugin_beta4(pp)? > tau {
        Ok((EstimatorId::OnePIdentity, d4_identity(pp)?))
    } else {
        Ok((EstimatorId::OneP, d4_plain(pp)?))
    }
}

fn require_scheme<'a, T: Scalar>(
    sx: &'a Sketch<T>,
    sy: &'a Sketch<T>,
    id: EstimatorId,
) -> Result<SketchPair<'a, T>> {
    let pair = SketchPair::new(sx, sy)?;
    let want = id.scheme().expect("projection estimator");
    if pair.scheme() != want {
        return Err(Error::SchemeMismatch {
            estimator: id.as_str(),
            expected: match want {
                Scheme::OneMatrix => "one-matrix",
                Scheme::ThreeMatrix => "three-matrix",
            },
        });
    }
    Ok(pair)
}

fn finish<T: Scalar>(
    id: EstimatorId,
    value: T,
    k: usize,
    variance: Option<T>,
) -> Estimate<T> {
    Estimate {
        estimator: id,
        value,
        predicted_variance: variance,
        k,
        p: id.order(),
    }
}

/// Three-matrix l4 estimate; the variance is attached when moments are given.
pub fn est_3p<T: Scalar>(sx: &Sketch<T>, sy: &Sketch<T>, m: Option<&MomentTable<T>>) -> Result<Estimate<T>> {
    let pair = require_scheme(sx, sy, EstimatorId::ThreeP)?;
    let k = pair.k();
    Ok(finish(EstimatorId::ThreeP, d4_plain(&pair)?, k, m.map(|m| var_3p(m, k))))
}

/// One-matrix l4 estimate.
pub fn est_1p<T: Scalar>(sx: &Sketch<T>, sy: &Sketch<T>, m: Option<&MomentTable<T>>) -> Result<Estimate<T>> {
    let pair = require_scheme(sx, sy, EstimatorId::OneP)?;
    let k = pair.k();
    Ok(finish(EstimatorId::OneP, d4_plain(&pair)?, k, m.map(|m| var_1p(m, k))))
}

pub fn est_3p_margin<T: Real>(
    sx: &Sketch<T>,
    sy: &Sketch<T>,
    m: Option<&MomentTable<T>>,
) -> Result<Estimate<T>> {
    let pair = require_scheme(sx, sy, EstimatorId::ThreePMargin)?;
    let k = pair.k();
    Ok(finish(
        EstimatorId::ThreePMargin,
        d4_margin(&pair)?,
        k,
        m.map(|m| var_3p_margin_asymptotic(m, k)),
    ))
}

/// One-matrix margin estimate; no closed-form variance exists.
pub fn est_1p_margin<T: Real>(sx: &Sketch<T>, sy: &Sketch<T>) -> Result<Estimate<T>> {
    let pair = require_scheme(sx, sy, EstimatorId::OnePMargin)?;
    Ok(finish(EstimatorId::OnePMargin, d4_margin(&pair)?, pair.k(), None))
}

pub fn est_1p_identity<T: Scalar>(
    sx: &Sketch<T>,
    sy: &Sketch<T>,
    m: Option<&MomentTable<T>>,
) -> Result<Estimate<T>> {
    let pair = require_scheme(sx, sy, EstimatorId::OnePIdentity)?;
    let k = pair.k();
    Ok(finish(
        EstimatorId::OnePIdentity,
        d4_identity(&pair)?,
        k,
        m.map(|m| var_1p_identity(m, k)),
    ))
}

pub fn est_d6_1p<T: Scalar>(sx: &Sketch<T>, sy: &Sketch<T>) -> Result<Estimate<T>> {
    let pair = require_scheme(sx, sy, EstimatorId::D6OneP)?;
    if sx.max_power() < 5 {
        return Err(Error::MissingPower(4));
    }
    Ok(finish(EstimatorId::D6OneP, d6_plain(&pair)?, pair.k(), None))
}

/// Chooses between `1p-i` and `1p` (see [`d4_select`]). The returned
/// estimate carries the id of the branch that fired.
pub fn select_estimator<T: Scalar>(
    sx: &Sketch<T>,
    sy: &Sketch<T>,
    tau: T,
    m: Option<&MomentTable<T>>,
) -> Result<Estimate<T>> {
    let pair = require_scheme(sx, sy, EstimatorId::Auto)?;
    let k = pair.k();
    let (id, value) = d4_select(&pair, tau)?;
    let variance = m.map(|m| match id {
        EstimatorId::OnePIdentity => var_1p_identity(m, k),
        _ => var_1p(m, k),
    });
    Ok(finish(id, value, k, variance))
}

/// The exact distance, as an [`Estimate`] with zero variance.
pub fn est_exact<T: Scalar>(x: &DataVector<T>, y: &DataVector<T>, p: u32) -> Result<Estimate<T>> {
    Ok(Estimate {
        estimator: EstimatorId::Exact,
        value: exact_lp(x, y, p)?,
        predicted_variance: Some(T::zero()),
        k: 0,
        p,
    })
}

/// `(D/k)·Σ_j w[i_j]` with `k` indices drawn uniformly with replacement.
pub fn sampling_draw<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    k: usize,
    rng: &mut R,
    weight: impl Fn(usize) -> T,
) -> T {
    let mut acc = CompensatedSum::new();
    for _ in 0..k {
        acc.add(weight(rng.random_range(0..dim)));
    }
    T::from_usize(dim) / T::from_usize(k) * acc.value()
}

/// Simple random sampling of `k` coordinates (with replacement).
pub fn est_sampling<T: Scalar>(x: &DataVector<T>, y: &DataVector<T>, k: usize, seed: u64) -> Result<Estimate<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let m = compute_moments(x, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = sampling_draw(x.dim(), k, &mut rng, |i| (x.get(i) - y.get(i)).abs().powi_exact(4));
    Ok(finish(EstimatorId::Sampling, value, k, Some(var_sampling(&m, k))))
}

/// Checks `5·Σz³·Σz⁵ − Σz²·Σz⁶ ≥ 0` for `z_i = √(x_i y_i)`. When it holds on
/// nonnegative data, sharing one matrix does not increase the variance.
pub fn lemma4_condition<T: Real>(x: &DataVector<T>, y: &DataVector<T>) -> Result<(bool, T)> {
    x.check_same_dim(y)?;
    for v in [x, y] {
        if let Some((i, val)) = v.iter_nonzero().find(|(_, val)| *val < T::zero()) {
            return Err(Error::NegativeEntry {
                index: i,
                value: val.to_f64(),
            });
        }
    }
    let mut z = Vec::new();
    crate::vector::for_each_union(x, y, |_, a, b| {
        let p = a * b;
        if !p.is_zero() {
            z.push(p.sqrt());
        }
    });
    let lhs = lemma4_lhs(&z)?;
    Ok((lhs >= T::zero(), lhs))
}

/// `5·Σz³·Σz⁵ − Σz²·Σz⁶` for a nonnegative sample `z`.
pub fn lemma4_lhs<T: Scalar>(z: &[T]) -> Result<T> {
    if let Some((i, v)) = z.iter().enumerate().find(|(_, v)| **v < T::zero()) {
        return Err(Error::NegativeEntry {
            index: i,
            value: v.to_f64(),
        });
    }
    let sum = |q: u32| z.iter().map(|v| v.powi_exact(q)).collect::<CompensatedSum<T>>().value();
    Ok(T::from_usize(5) * sum(3) * sum(5) - sum(2) * sum(6))
}

/// `Z_(p) = Σz²·Σz^(2p−2) / (Σz^p)²`, on `|z|`. Bounded by `D^(1−2/p)`.
pub fn complexity_ratio<T: Scalar>(z: &DataVector<T>, p: u32) -> Result<T> {
    if p < 4 || p % 2 != 0 {
        return Err(Error::UnsupportedOrder(p));
    }
    let denom = power_sum(z, p);
    if denom.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(power_sum(z, 2) * power_sum(z, 2 * p - 2) / (denom * denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::{sketch_vector, ProjectionSpec};

    fn dv(v: &[f64]) -> DataVector<f64> {
        DataVector::dense(v.to_vec()).unwrap()
    }

    fn sketch(x: &DataVector<f64>, scheme: Scheme, k: usize, seed: u64, maxp: u32) -> Sketch<f64> {
        let spec = ProjectionSpec::normal(seed, k, scheme, x.dim()).unwrap();
        sketch_vector("v", x, &spec, maxp).unwrap()
    }

    #[test]
    fn ids_roundtrip() {
        for id in EstimatorId::ALL {
            assert_eq!(id.as_str().parse::<EstimatorId>().unwrap(), id);
        }
        assert!("4p".parse::<EstimatorId>().is_err());
    }

    #[test]
    fn zero_vectors_give_zero() {
        let z = DataVector::<f64>::zeros(6).unwrap();
        let a = sketch(&z, Scheme::OneMatrix, 8, 1, 5);
        let b = sketch(&z, Scheme::ThreeMatrix, 8, 1, 3);
        assert_eq!(est_1p(&a, &a, None).unwrap().value, 0.0);
        assert_eq!(est_1p_identity(&a, &a, None).unwrap().value, 0.0);
        assert_eq!(est_1p_margin(&a, &a).unwrap().value, 0.0);
        assert_eq!(est_d6_1p(&a, &a).unwrap().value, 0.0);
        assert_eq!(est_3p(&b, &b, None).unwrap().value, 0.0);
        assert_eq!(est_3p_margin(&b, &b, None).unwrap().value, 0.0);
    }

    #[test]
    fn identity_estimator_vanishes_on_equal_inputs() {
        let x = dv(&[0.3, -2.0, 1.7, 0.0, 5.5, 1e-3]);
        for seed in 0..20 {
            let s = sketch(&x, Scheme::OneMatrix, 17, seed, 3);
            assert_eq!(est_1p_identity(&s, &s, None).unwrap().value, 0.0);
        }
    }

    #[test]
    fn scheme_mismatch_is_rejected() {
        let x = dv(&[1.0, 2.0]);
        let one = sketch(&x, Scheme::OneMatrix, 4, 1, 3);
        let three = sketch(&x, Scheme::ThreeMatrix, 4, 1, 3);
        assert!(matches!(est_3p(&one, &one, None), Err(Error::SchemeMismatch { .. })));
        assert!(matches!(est_1p(&three, &three, None), Err(Error::SchemeMismatch { .. })));
        assert!(matches!(est_1p_identity(&three, &three, None), Err(Error::SchemeMismatch { .. })));
        assert!(matches!(est_1p(&one, &three, None), Err(Error::SpecMismatch)));
        let other_seed = sketch(&x, Scheme::OneMatrix, 4, 2, 3);
        assert!(matches!(est_1p(&one, &other_seed, None), Err(Error::SpecMismatch)));
        assert!(est_d6_1p(&one, &one).is_err());
    }

    #[test]
    fn predicted_variance_attached_on_request() {
        let x = dv(&[1.0, 0.0]);
        let y = dv(&[0.0, 1.0]);
        let m = compute_moments(&x, &y).unwrap();
        let sx = sketch(&x, Scheme::OneMatrix, 1, 3, 3);
        let sy = sketch(&y, Scheme::OneMatrix, 1, 3, 3);
        let e = est_1p(&sx, &sy, Some(&m)).unwrap();
        assert_eq!(e.predicted_variance, Some(4.0));
        assert_eq!(est_1p(&sx, &sy, None).unwrap().predicted_variance, None);
    }

    #[test]
    fn sampling_degenerate_cases() {
        let e = est_sampling(&dv(&[3.0]), &dv(&[1.0]), 1, 9).unwrap();
        assert_eq!(e.value, 16.0);
        assert_eq!(e.predicted_variance, Some(0.0));
        for seed in 0..10 {
            for k in [1, 3, 10] {
                let e = est_sampling(&dv(&[1.0, 0.0]), &dv(&[0.0, 1.0]), k, seed).unwrap();
                assert_eq!(e.value, 2.0);
                assert_eq!(e.predicted_variance, Some(0.0));
            }
        }
        assert!(est_sampling(&dv(&[1.0]), &dv(&[1.0]), 0, 0).is_err());
    }

    #[test]
    fn exact_estimate() {
        let e = est_exact(&dv(&[1.0, 2.0, 0.0]), &dv(&[0.0, 0.0, 0.0]), 4).unwrap();
        assert_eq!(e.value, 17.0);
        assert_eq!(e.predicted_variance, Some(0.0));
    }

    #[test]
    fn ordering_condition_cases() {
        let c = 1.5;
        let d = 7usize;
        let x = dv(&vec![c; d]);
        let (holds, lhs) = lemma4_condition(&x, &x).unwrap();
        assert!(holds);
        let want = 4.0 * (d * d) as f64 * c.powi(8);
        assert!((lhs - want).abs() < 1e-9 * want);

        let mut z = vec![1.0; 1001];
        z[0] = 10.0;
        let lhs = lemma4_lhs(&z).unwrap();
        assert_eq!(lhs, 5.0 * 2000.0 * 101000.0 - 1100.0 * 1001000.0);
        assert!(lhs < 0.0);

        assert!(matches!(
            lemma4_condition(&dv(&[1.0, -1.0]), &dv(&[1.0, 1.0])),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn complexity_ratio_cases() {
        assert_eq!(complexity_ratio(&dv(&[2.0; 9]), 4).unwrap(), 1.0);
        assert_eq!(complexity_ratio(&dv(&[0.0, 3.0, 0.0]), 6).unwrap(), 1.0);
        assert!(complexity_ratio(&dv(&[0.0, 0.0]), 4).is_err());
        assert!(complexity_ratio(&dv(&[1.0]), 3).is_err());
    }

    #[test]
    fn select_branches() {
        let x = dv(&[1.0, 2.0, 3.0, 0.5]);
        let s = sketch(&x, Scheme::OneMatrix, 512, 4, 3);
        let e = select_estimator(&s, &s, 0.9, None).unwrap();
        assert_eq!(e.estimator, EstimatorId::OnePIdentity);
        assert_eq!(e.value, 0.0);
        let e = select_estimator(&s, &s, 1.0 + 1e-9, None).unwrap();
        assert_eq!(e.estimator, EstimatorId::OneP);

        let a = dv(&[1.0, 0.0, 0.0, 0.0]);
        let b = dv(&[0.0, 0.0, 0.0, 1.0]);
        let sa = sketch(&a, Scheme::OneMatrix, 256, 4, 3);
        let sb = sketch(&b, Scheme::OneMatrix, 256, 4, 3);
        assert_eq!(select_estimator(&sa, &sb, 0.9, None).unwrap().estimator, EstimatorId::OneP);

        let z = DataVector::<f64>::zeros(4).unwrap();
        let sz = sketch(&z, Scheme::OneMatrix, 8, 4, 3);
        assert!(matches!(select_estimator(&sz, &sz, 0.9, None), Err(Error::ZeroVectors)));
    }
}
