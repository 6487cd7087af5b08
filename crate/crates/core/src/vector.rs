//! Dense and sparse data vectors.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Entries<T> {
    Dense(Vec<T>),
    /// Strictly increasing indices, nonzero values.
    Sparse { indices: Vec<usize>, values: Vec<T> },
}

/// A `dim`-dimensional real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector<T> {
    dim: usize,
    entries: Entries<T>,
}

impl<T: Scalar> DataVector<T> {
    pub fn dense(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("vector dimension must be positive".into()));
        }
        Ok(Self {
            dim: values.len(),
            entries: Entries::Dense(values),
        })
    }

    pub fn sparse(dim: usize, indices: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("vector dimension must be positive".into()));
        }
        if indices.len() != values.len() {
            return Err(Error::InvalidSparse(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidSparse(format!(
                    "indices not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::IndexOutOfRange {
                    what: "sparse index",
                    index: last,
                    limit: dim,
                });
            }
        }
        if let Some(pos) = values.iter().position(|v| v.is_zero()) {
            return Err(Error::InvalidSparse(format!(
                "explicit zero stored at index {}",
                indices[pos]
            )));
        }
        Ok(Self {
            dim,
            entries: Entries::Sparse { indices, values },
        })
    }

    /// Sparse vector from unordered `(index, value)` pairs; zeros are dropped.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, T)>) -> Result<Self> {
        pairs.retain(|(_, v)| !v.is_zero());
        pairs.sort_by_key(|&(i, _)| i);
        let (indices, values) = pairs.into_iter().unzip();
        Self::sparse(dim, indices, values)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::sparse(dim, Vec::new(), Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &Entries<T> {
        &self.entries
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.entries, Entries::Sparse { .. })
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        match &self.entries {
            Entries::Dense(v) => v.iter().filter(|x| !x.is_zero()).count(),
            Entries::Sparse { values, .. } => values.len(),
        }
    }

    pub fn get(&self, i: usize) -> T {
        match &self.entries {
            Entries::Dense(v) => v[i],
            Entries::Sparse { indices, values } => match indices.binary_search(&i) {
                Ok(pos) => values[pos],
                Err(_) => T::zero(),
            },
        }
    }

    /// Nonzero entries in ascending index order, for either representation.
    pub fn iter_nonzero(&self) -> Box<dyn Iterator<Item = (usize, T)> + '_> {
        match &self.entries {
            Entries::Dense(v) => Box::new(
                v.iter()
                    .copied()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero()),
            ),
            Entries::Sparse { indices, values } => {
                Box::new(indices.iter().copied().zip(values.iter().copied()))
            }
        }
    }

    pub fn to_dense_vec(&self) -> Vec<T> {
        match &self.entries {
            Entries::Dense(v) => v.clone(),
            Entries::Sparse { indices, values } => {
                let mut out = vec![T::zero(); self.dim];
                for (&i, &v) in indices.iter().zip(values) {
                    out[i] = v;
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> Self {
        Self {
            dim: self.dim,
            entries: Entries::Dense(self.to_dense_vec()),
        }
    }

    pub fn to_sparse(&self) -> Self {
        let (indices, values) = self.iter_nonzero().unzip();
        Self {
            dim: self.dim,
            entries: Entries::Sparse { indices, values },
        }
    }

    /// Entry-wise map; zero results are dropped for sparse storage.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        match &self.entries {
            Entries::Dense(v) => Self {
                dim: self.dim,
                entries: Entries::Dense(v.iter().map(|&x| f(x)).collect()),
            },
            Entries::Sparse { indices, values } => {
                let (indices, values) = indices
                    .iter()
                    .zip(values)
                    .map(|(&i, &x)| (i, f(x)))
                    .filter(|(_, v)| !v.is_zero())
                    .unzip();
                Self {
                    dim: self.dim,
                    entries: Entries::Sparse { indices, values },
                }
            }
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        self.map(|x| x * alpha)
    }

    pub fn cast<U: Scalar>(&self) -> DataVector<U> {
        let entries = match &self.entries {
            Entries::Dense(v) => Entries::Dense(v.iter().map(|x| U::from_f64(x.to_f64())).collect()),
            Entries::Sparse { indices, values } => Entries::Sparse {
                indices: indices.clone(),
                values: values.iter().map(|x| U::from_f64(x.to_f64())).collect(),
            },
        };
        DataVector {
            dim: self.dim,
            entries,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.iter_nonzero().all(|(_, v)| v > T::zero())
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }
}

/// Visits every index in the union of the two supports, ascending, with the
/// pair of values at that index. Indices where both are zero are skipped.
pub fn for_each_union<T: Scalar>(
    x: &DataVector<T>,
    y: &DataVector<T>,
    mut f: impl FnMut(usize, T, T),
) {
    let mut xs = x.iter_nonzero().peekable();
    let mut ys = y.iter_nonzero().peekable();
    loop {
        match (xs.peek().copied(), ys.peek().copied()) {
            (None, None) => break,
            (Some((i, a)), None) => {
                f(i, a, T::zero());
                xs.next();
            }
            (None, Some((j, b))) => {
                f(j, T::zero(), b);
                ys.next();
            }
            (Some((i, a)), Some((j, b))) => {
                if i == j {
                    f(i, a, b);
                    xs.next();
                    ys.next();
                } else if i < j {
                    f(i, a, T::zero());
                    xs.next();
                } else {
                    f(j, T::zero(), b);
                    ys.next();
                }
            }
        }
    }
}

/// Σ a_i b_i over the shared support, compensated.
pub fn inner<T: Scalar>(a: &DataVector<T>, b: &DataVector<T>) -> Result<T> {
    a.check_same_dim(b)?;
    let mut acc = crate::scalar::CompensatedSum::new();
    for_each_union(a, b, |_, x, y| {
        if !x.is_zero() && !y.is_zero() {
            acc.add(x * y);
        }
    });
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_validation() {
        assert!(DataVector::<f64>::sparse(5, vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(DataVector::<f64>::sparse(5, vec![3, 1], vec![1.0, 2.0]).is_err());
        assert!(DataVector::<f64>::sparse(5, vec![5], vec![1.0]).is_err());
        assert!(DataVector::<f64>::sparse(5, vec![2], vec![0.0]).is_err());
        assert!(DataVector::<f64>::sparse(5, vec![0, 4], vec![1.0, -2.0]).is_ok());
    }

    #[test]
    fn dense_sparse_roundtrip() {
        let d = DataVector::dense(vec![0.0, 1.5, 0.0, -2.0]).unwrap();
        let s = d.to_sparse();
        assert!(s.is_sparse());
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.to_dense(), d);
        assert_eq!(s.get(3), -2.0);
        assert_eq!(s.get(2), 0.0);
    }

    #[test]
    fn union_walk_visits_each_index_once() {
        let x = DataVector::sparse(6, vec![0, 2, 5], vec![1.0, 2.0, 3.0]).unwrap();
        let y = DataVector::dense(vec![0.0, 4.0, 5.0, 0.0, 0.0, 6.0]).unwrap();
        let mut seen = Vec::new();
        for_each_union(&x, &y, |i, a, b| seen.push((i, a, b)));
        assert_eq!(
            seen,
            vec![(0, 1.0, 0.0), (1, 0.0, 4.0), (2, 2.0, 5.0), (5, 3.0, 6.0)]
        );
        assert_eq!(inner(&x, &y).unwrap(), 10.0 + 18.0);
    }
}
