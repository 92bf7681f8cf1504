//! Nearest-center distance and the k-means cost in its two forms.
//!
//! [`cost_empirical`] is the mean squared nearest-center distance, i.e. the
//! cost integrated against the uniform empirical measure. [`cost_matrix_form`]
//! is the raw sum for an explicit assignment. For the nearest-center
//! assignment the two agree up to the factor `m`, and both use the same
//! summation order.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{sq_dist, stable_sum, Scalar};

/// Ordered sequence of centers. Order is meaningful: seeding produces centers
/// one at a time and prefixes `M[..q]` are first-class.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> CenterSet<T> {
    pub fn empty(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dimension must be positive"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::validation("center coordinates do not split evenly"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("non-finite center coordinate"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyCenters)?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(dim, data)
    }

    /// Centers for 1-D data.
    pub fn from_values(values: &[T]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    /// The dataset points at `indices`, in that order.
    pub fn from_indices(dataset: &Dataset<T>, indices: &[usize]) -> Self {
        let mut cs = Self::empty(dataset.dim());
        for &i in indices {
            cs.push(dataset.point(i));
        }
        cs
    }

    pub fn push(&mut self, center: &[T]) {
        assert_eq!(center.len(), self.dim, "center dimension");
        self.data.extend_from_slice(center);
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self, j: usize) -> &[T] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub(crate) fn center_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    /// The first `q` centers.
    pub fn prefix(&self, q: usize) -> Self {
        let q = q.min(self.len());
        Self {
            dim: self.dim,
            data: self.data[..q * self.dim].to_vec(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.iter().map(<[T]>::to_vec).collect()
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyCenters);
        }
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        Ok(())
    }

    /// Index and squared distance of the nearest center, lowest index on ties.
    /// The set must be non-empty with matching dimension.
    #[inline]
    pub(crate) fn nearest(&self, x: &[T]) -> (usize, T) {
        let mut best = (0, T::infinity());
        for (j, c) in self.iter().enumerate() {
            let d = sq_dist(x, c);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }
}

/// Cluster label per point; the indicator matrix `U` with `u[i][j] = 1` iff
/// `labels[i] == j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    labels: Vec<usize>,
    clusters: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, clusters: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= clusters) {
            return Err(Error::Shape(format!(
                "label {bad} out of range for {clusters} clusters"
            )));
        }
        Ok(Self { labels, clusters })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Entry `u_ij` of the indicator matrix.
    pub fn indicator(&self, i: usize, j: usize) -> bool {
        self.labels[i] == j
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// `D(x, M)`: Euclidean distance from `x` to its nearest center.
pub fn dist_to_set<T: Scalar>(x: &[T], centers: &CenterSet<T>) -> Result<T> {
    centers.check(x.len())?;
    Ok(centers.nearest(x).1.sqrt())
}

/// Nearest-center labels; ties go to the lowest center index.
pub fn assign<T: Scalar>(dataset: &Dataset<T>, centers: &CenterSet<T>) -> Result<Assignment> {
    centers.check(dataset.dim())?;
    let labels = dataset.points().map(|p| centers.nearest(p).0).collect();
    Ok(Assignment {
        labels,
        clusters: centers.len(),
    })
}

/// Squared nearest-center distance per point.
pub(crate) fn nearest_sq_dists<T: Scalar>(dataset: &Dataset<T>, centers: &CenterSet<T>) -> Vec<T> {
    dataset.points().map(|p| centers.nearest(p).1).collect()
}

/// Mean of `D(x_i, M)²` over the dataset.
pub fn cost_empirical<T: Scalar>(dataset: &Dataset<T>, centers: &CenterSet<T>) -> Result<T> {
    centers.check(dataset.dim())?;
    let d2 = nearest_sq_dists(dataset, centers);
    Ok(stable_sum(&d2) / T::from_count(dataset.len()))
}

/// `Σ_i Σ_j u_ij ‖x_i − μ_j‖²` for an arbitrary assignment (not normalized).
pub fn cost_matrix_form<T: Scalar>(dataset: &Dataset<T>, assignment: &Assignment, centers: &CenterSet<T>) -> Result<T> {
    centers.check(dataset.dim())?;
    if assignment.len() != dataset.len() {
        return Err(Error::Shape(format!(
            "assignment has {} rows, dataset has {} points",
            assignment.len(),
            dataset.len()
        )));
    }
    if assignment.clusters() != centers.len() {
        return Err(Error::Shape(format!(
            "assignment has {} columns, there are {} centers",
            assignment.clusters(),
            centers.len()
        )));
    }
    let d2: Vec<T> = dataset
        .points()
        .zip(assignment.labels())
        .map(|(p, &l)| sq_dist(p, centers.center(l)))
        .collect();
    Ok(stable_sum(&d2))
}
