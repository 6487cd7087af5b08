//! Estimating l4 (and l6) distances between high-dimensional vectors from
//! normal random projections of their coordinate-wise powers.
//!
//! The even-order distance `Σ|x_i − y_i|⁴` expands into the two marginal
//! fourth-power sums, which one linear scan computes exactly, plus three
//! inner products (`Σx²y²`, `Σx³y`, `Σxy³`) which random projections estimate.
//!
//! The numeric core is generic over [`Scalar`] (`f32`, `f64`, or the exact
//! rational [`Exact`]); the aliases below fix the common choices. The
//! Monte-Carlo lab ([`simlab`]) and the nearest-neighbour harness ([`knn`])
//! work in `f64`.

pub mod error;
pub mod estimators;
pub mod io;
pub mod knn;
pub mod moments;
pub mod projector;
pub mod scalar;
pub mod simlab;
pub mod verify;
pub mod vector;

pub use error::{Error, Result};
pub use estimators::{Estimate, EstimatorId};
pub use moments::{beta4, compute_moments, exact_lp, gaussian_quartic_expectation, MomentTable};
pub use projector::{sketch_batch, sketch_vector, EntryDistribution, ProjectionSpec, Scheme, Sketch};
pub use scalar::{Exact, Real, Scalar};
pub use vector::DataVector;

pub type DataVector64 = DataVector<f64>;
pub type DataVector32 = DataVector<f32>;
pub type ExactVector = DataVector<Exact>;

pub type MomentTable64 = MomentTable<f64>;
pub type MomentTable32 = MomentTable<f32>;
pub type ExactMomentTable = MomentTable<Exact>;

pub type Sketch64 = Sketch<f64>;
pub type Sketch32 = Sketch<f32>;

pub type Estimate64 = Estimate<f64>;
pub type Estimate32 = Estimate<f32>;
