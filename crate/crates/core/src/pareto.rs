//! Objective-space geometry: dominance and Pareto fronts.
//!
//! Every objective is maximized. A point `y` dominates `z` when `y >= z`
//! componentwise with at least one strict coordinate; equal points do not
//! dominate each other, so duplicates of a Pareto-optimal point all stay on
//! the front.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A single point in objective space.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_vector(&values, "objective vector")?;
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ObjectiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Lower corner from which dominated volume is measured.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint(Vec<f64>);

impl ReferencePoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_vector(&values, "reference point")?;
        Ok(Self(values))
    }

    /// The point `(value, ..., value)` in `dim` dimensions.
    pub fn uniform(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::uniform(dim, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Deref for ReferencePoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_vector(values: &[f64], what: &'static str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} must have k >= 1")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// A list of objective vectors sharing one dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSet {
    dim: usize,
    data: Vec<f64>,
}

impl ObjectiveSet {
    /// An empty set of `dim`-dimensional points.
    pub fn empty(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("objective dimension must be >= 1".into()));
        }
        Ok(Self {
            dim,
            data: Vec::new(),
        })
    }

    /// Builds a set from rows; fails on an empty iterator, ragged rows or
    /// non-finite entries.
    pub fn from_rows<I, R>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut rows = rows.into_iter();
        let first = rows.next().ok_or(Error::EmptySet)?;
        let mut set = Self::empty(first.as_ref().len())?;
        set.push(first.as_ref())?;
        for row in rows {
            set.push(row.as_ref())?;
        }
        Ok(set)
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective vector"));
        }
        self.data.extend_from_slice(point);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// The subset at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Self {
            dim: self.dim,
            data,
        }
    }

    /// The first `len` points.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            dim: self.dim,
            data: self.data[..len * self.dim].to_vec(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }
}

/// Returns whether `y` dominates `z` (maximization).
pub fn dominates(y: &[f64], z: &[f64]) -> Result<bool> {
    if y.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: z.len(),
        });
    }
    Ok(dominates_unchecked(y, z))
}

pub(crate) fn dominates_unchecked(y: &[f64], z: &[f64]) -> bool {
    let mut strict = false;
    for (a, b) in y.iter().zip(z) {
        if a < b {
            return false;
        }
        if a > b {
            strict = true;
        }
    }
    strict
}

/// Indices of the points of `set` that no other point dominates, ascending.
pub fn pareto_front(set: &ObjectiveSet) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = set.len();
    Ok((0..n)
        .filter(|&i| {
            let p = set.point(i);
            !(0..n).any(|j| j != i && dominates_unchecked(set.point(j), p))
        })
        .collect())
}

pub(crate) fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Drops dominated points and exact duplicates from row-major points of
/// dimension `k`. Input order is not kept.
///
/// After sorting by descending coordinate sum a point can only be weakly
/// dominated by one that precedes it, so each candidate is compared against
/// the kept points only.
pub(crate) fn nondominated_unique(k: usize, data: Vec<f64>) -> Vec<f64> {
    let n = data.len() / k;
    if n < 2 {
        return data;
    }
    let rows: Vec<&[f64]> = data.chunks_exact(k).collect();
    let mut order: Vec<(f64, usize)> = rows.iter().map(|r| r.iter().sum()).zip(0..n).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut kept: Vec<f64> = Vec::with_capacity(data.len());
    for (_, i) in order {
        let p = rows[i];
        if !kept.chunks_exact(k).any(|q| weakly_dominates(q, p)) {
            kept.extend_from_slice(p);
        }
    }
    kept
}
