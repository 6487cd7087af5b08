//! Scalar abstractions shared by the moment, sketch and estimator code.
//!
//! Everything that only needs ring/field arithmetic (moment sums, closed-form
//! variances, the Hölder ratio) is generic over [`Scalar`], which admits
//! `f32`, `f64` and the exact rational type [`Exact`]. Code that needs square
//! roots or trigonometry (the margin cubic, the one-matrix ordering condition)
//! requires [`Real`], i.e. a floating-point type.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Exact rational scalar, used to pin hand-computed closed-form values.
pub type Exact = Ratio<i128>;

pub trait Scalar:
    Num + Signed + Copy + PartialOrd + Debug + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;

    fn to_f64(self) -> f64;

    fn from_usize(n: usize) -> Self;

    /// `self^n` by repeated multiplication, so exact types stay exact.
    fn powi_exact(self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_usize(n: usize) -> Self {
        n as f32
    }
}

impl Scalar for Exact {
    fn from_f64(v: f64) -> Self {
        <Exact as FromPrimitive>::from_f64(v).expect("value not representable as a rational")
    }
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
    fn from_usize(n: usize) -> Self {
        Ratio::from_integer(n as i128)
    }
}

/// Floating-point scalars.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier (improved Kahan–Babuška) compensated accumulator.
///
/// For exact scalar types the compensation term is identically zero, so the
/// same code path serves both.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp = self.comp + ((self.sum - t) + v);
        } else {
            self.comp = self.comp + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Plain left-to-right dot product of two equal-length slices.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
