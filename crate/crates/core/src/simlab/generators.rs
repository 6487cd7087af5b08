//! Synthetic vector pairs.
//!
//! The gamma and beta kinds give dense nonnegative pairs with a tunable
//! dependence; the sparse-overlap kind controls support sizes and their
//! intersection directly, which is what drives the l4 similarity.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, LogNormal, Normal, Pareto};

use crate::error::{Error, Result};
use crate::vector::DataVector;

/// Distribution of the nonzero values in a sparse-overlap pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueDist {
    Constant(f64),
    Gamma { shape: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Pareto { scale: f64, shape: f64 },
}

impl ValueDist {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ValueDist::Constant(c) => c > 0.0 && c.is_finite(),
            ValueDist::Gamma { shape, scale } => shape > 0.0 && scale > 0.0,
            ValueDist::LogNormal { sigma, mu } => sigma >= 0.0 && mu.is_finite(),
            ValueDist::Pareto { scale, shape } => scale > 0.0 && shape > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid value distribution {self:?}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ValueDist::Constant(c) => c,
            ValueDist::Gamma { shape, scale } => Gamma::new(shape, scale).unwrap().sample(rng),
            ValueDist::LogNormal { mu, sigma } => LogNormal::new(mu, sigma).unwrap().sample(rng),
            ValueDist::Pareto { scale, shape } => Pareto::new(scale, shape).unwrap().sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairKind {
    /// Gamma(shape, scale) marginals; `correlation` in `[0, 1]` is the share
    /// of the shape carried by a common component.
    Gamma { shape: f64, scale: f64, correlation: f64 },
    /// Beta(alpha, beta) marginals; each coordinate of `y` copies `x` with
    /// probability `correlation`, else is drawn independently.
    Beta { alpha: f64, beta: f64, correlation: f64 },
    /// Signed normal pair with the given coordinate correlation.
    Normal { mean: f64, std: f64, correlation: f64 },
    /// Nonnegative sparse pair. `sparsity_x`/`sparsity_y` are the fractions of
    /// nonzero coordinates; `overlap` is the shared fraction of the smaller
    /// support. Shared coordinates of `y` are `x·exp(jitter·N(0,1))`.
    SparseOverlap {
        sparsity_x: f64,
        sparsity_y: f64,
        overlap: f64,
        values: ValueDist,
        jitter: f64,
    },
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")))
    }
}

impl PairKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PairKind::Gamma { shape, scale, correlation } => {
                unit_interval("correlation", correlation)?;
                if !(shape > 0.0 && scale > 0.0) {
                    return Err(Error::InvalidArgument("gamma shape and scale must be positive".into()));
                }
            }
            PairKind::Beta { alpha, beta, correlation } => {
                unit_interval("correlation", correlation)?;
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(Error::InvalidArgument("beta parameters must be positive".into()));
                }
            }
            PairKind::Normal { mean, std, correlation } => {
                if !(correlation.abs() <= 1.0 && std > 0.0 && mean.is_finite()) {
                    return Err(Error::InvalidArgument("invalid normal pair parameters".into()));
                }
            }
            PairKind::SparseOverlap {
                sparsity_x,
                sparsity_y,
                overlap,
                values,
                jitter,
            } => {
                unit_interval("sparsity_x", sparsity_x)?;
                unit_interval("sparsity_y", sparsity_y)?;
                if !(0.0..=1.0).contains(&overlap) {
                    return Err(Error::InvalidArgument(format!(
                        "overlap {overlap} exceeds the smaller support"
                    )));
                }
                if !(jitter >= 0.0 && jitter.is_finite()) {
                    return Err(Error::InvalidArgument("jitter must be nonnegative".into()));
                }
                values.validate()?;
            }
        }
        Ok(())
    }
}

/// Support sizes `(n_x, n_y, shared)` for a sparse-overlap pair.
pub fn overlap_counts(dim: usize, sparsity_x: f64, sparsity_y: f64, overlap: f64) -> Result<(usize, usize, usize)> {
    let nx = (sparsity_x * dim as f64).round() as usize;
    let ny = (sparsity_y * dim as f64).round() as usize;
    let shared = (overlap * nx.min(ny) as f64).round() as usize;
    if nx + ny - shared > dim {
        return Err(Error::InvalidArgument(format!(
            "supports of {nx} and {ny} sharing {shared} do not fit in dimension {dim}"
        )));
    }
    Ok((nx, ny, shared))
}

/// Deterministic pair of dimension `dim` drawn from `kind`.
pub fn generate_pair(kind: &PairKind, dim: usize, seed: u64) -> Result<(DataVector<f64>, DataVector<f64>)> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    kind.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        PairKind::Gamma { shape, scale, correlation } => {
            let common = shape * correlation;
            let own = shape - common;
            let part = |a: f64, rng: &mut ChaCha8Rng| {
                if a > 0.0 {
                    Gamma::new(a, scale).unwrap().sample(rng)
                } else {
                    0.0
                }
            };
            let mut x = Vec::with_capacity(dim);
            let mut y = Vec::with_capacity(dim);
            for _ in 0..dim {
                let c = part(common, &mut rng);
                x.push(c + part(own, &mut rng));
                y.push(c + part(own, &mut rng));
            }
            Ok((DataVector::dense(x)?, DataVector::dense(y)?))
        }
        PairKind::Beta { alpha, beta, correlation } => {
            let b = Beta::new(alpha, beta).unwrap();
            let mut x = Vec::with_capacity(dim);
            let mut y = Vec::with_capacity(dim);
            for _ in 0..dim {
                let v = b.sample(&mut rng);
                x.push(v);
                y.push(if rng.random::<f64>() < correlation { v } else { b.sample(&mut rng) });
            }
            Ok((DataVector::dense(x)?, DataVector::dense(y)?))
        }
        PairKind::Normal { mean, std, correlation } => {
            let n = Normal::new(0.0, 1.0).unwrap();
            let rest = (1.0 - correlation * correlation).sqrt();
            let mut x = Vec::with_capacity(dim);
            let mut y = Vec::with_capacity(dim);
            for _ in 0..dim {
                let (a, b): (f64, f64) = (n.sample(&mut rng), n.sample(&mut rng));
                x.push(mean + std * a);
                y.push(mean + std * (correlation * a + rest * b));
            }
            Ok((DataVector::dense(x)?, DataVector::dense(y)?))
        }
        PairKind::SparseOverlap {
            sparsity_x,
            sparsity_y,
            overlap,
            values,
            jitter,
        } => {
            let (nx, ny, shared) = overlap_counts(dim, sparsity_x, sparsity_y, overlap)?;
            let mut perm: Vec<usize> = (0..dim).collect();
            perm.shuffle(&mut rng);
            let noise = Normal::new(0.0, 1.0).unwrap();
            let mut xs = Vec::with_capacity(nx);
            let mut ys = Vec::with_capacity(ny);
            let draw = |rng: &mut ChaCha8Rng| loop {
                let v = values.sample(rng);
                if v > 0.0 {
                    break v;
                }
            };
            for &i in &perm[..shared] {
                let v = draw(&mut rng);
                xs.push((i, v));
                let w = if jitter > 0.0 {
                    v * (jitter * noise.sample(&mut rng)).exp()
                } else {
                    v
                };
                ys.push((i, w));
            }
            for &i in &perm[shared..nx] {
                xs.push((i, draw(&mut rng)));
            }
            for &i in &perm[nx..nx + ny - shared] {
                ys.push((i, draw(&mut rng)));
            }
            Ok((DataVector::from_pairs(dim, xs)?, DataVector::from_pairs(dim, ys)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::beta4;

    fn overlap(o: f64, jitter: f64) -> PairKind {
        PairKind::SparseOverlap {
            sparsity_x: 0.1,
            sparsity_y: 0.1,
            overlap: o,
            values: ValueDist::Gamma { shape: 1.0, scale: 1.0 },
            jitter,
        }
    }

    #[test]
    fn deterministic() {
        let k = PairKind::Gamma { shape: 2.0, scale: 1.0, correlation: 0.5 };
        assert_eq!(generate_pair(&k, 50, 9).unwrap(), generate_pair(&k, 50, 9).unwrap());
        assert_ne!(generate_pair(&k, 50, 9).unwrap(), generate_pair(&k, 50, 10).unwrap());
    }

    #[test]
    fn sparse_overlap_supports() {
        let (x, y) = generate_pair(&overlap(0.4, 0.1), 1000, 3).unwrap();
        assert_eq!(x.nnz(), 100);
        assert_eq!(y.nnz(), 100);
        let shared = x.iter_nonzero().filter(|(i, _)| y.get(*i) != 0.0).count();
        assert_eq!(shared, 40);
        assert!(x.is_nonnegative() && y.is_nonnegative());
    }

    #[test]
    fn overlap_extremes() {
        let (x, y) = generate_pair(&overlap(1.0, 0.0), 500, 1).unwrap();
        assert_eq!(x, y);
        assert_eq!(beta4(&x, &y).unwrap(), 1.0);
        let (x, y) = generate_pair(&overlap(0.0, 0.0), 500, 1).unwrap();
        assert_eq!(beta4(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn infeasible_overlap() {
        assert!(generate_pair(&overlap(1.5, 0.0), 100, 1).is_err());
        let wide = PairKind::SparseOverlap {
            sparsity_x: 0.8,
            sparsity_y: 0.8,
            overlap: 0.1,
            values: ValueDist::Constant(1.0),
            jitter: 0.0,
        };
        assert!(generate_pair(&wide, 100, 1).is_err());
    }

    #[test]
    fn gamma_correlation_extremes() {
        let k = PairKind::Gamma { shape: 2.0, scale: 1.0, correlation: 1.0 };
        let (x, y) = generate_pair(&k, 100, 4).unwrap();
        assert_eq!(x, y);
        let k = PairKind::Beta { alpha: 2.0, beta: 3.0, correlation: 1.0 };
        let (x, y) = generate_pair(&k, 100, 4).unwrap();
        assert_eq!(x, y);
    }
}
