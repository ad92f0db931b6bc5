use std::sync::Arc;

use faer::Mat;
use serde::Serialize;

use crate::lattice::{Frame, GridFunction};

/// Whether a decomposition holds every eigenpair or only the lowest `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Completeness {
    Full,
    Partial(usize),
}

/// Ascending eigenvalues with eigenvectors orthonormal in the weighted inner
/// product `⟨u, v⟩ = h^d Σ uᵢvᵢ`.
///
/// Column `k` of [`eigenvectors`](Self::eigenvectors) holds nodal values on
/// the active nodes of the operator's frame.
#[derive(Debug, Clone)]
pub struct SpectralData {
    frame: Arc<Frame>,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
    completeness: Completeness,
    residuals: Vec<f64>,
}

impl SpectralData {
    /// Builds from Euclidean-orthonormal columns, rescaling them to the
    /// weighted inner product.
    pub(crate) fn from_euclidean(
        frame: Arc<Frame>,
        eigenvalues: Vec<f64>,
        mut vectors: Mat<f64>,
        residuals: Vec<f64>,
    ) -> Self {
        let s = 1.0 / frame.grid().cell_measure().sqrt();
        for j in 0..vectors.ncols() {
            for i in 0..vectors.nrows() {
                vectors[(i, j)] *= s;
            }
        }
        let completeness = if eigenvalues.len() == frame.dim() {
            Completeness::Full
        } else {
            Completeness::Partial(eigenvalues.len())
        };
        SpectralData { frame, eigenvalues, eigenvectors: vectors, completeness, residuals }
    }

    /// Builds from columns already orthonormal in the weighted inner product.
    pub(crate) fn from_weighted(
        frame: Arc<Frame>,
        eigenvalues: Vec<f64>,
        vectors: Mat<f64>,
        residuals: Vec<f64>,
    ) -> Self {
        let completeness = if eigenvalues.len() == frame.dim() {
            Completeness::Full
        } else {
            Completeness::Partial(eigenvalues.len())
        };
        SpectralData { frame, eigenvalues, eigenvectors: vectors, completeness, residuals }
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat<f64> {
        &self.eigenvectors
    }

    /// Eigenvector `k` as active-node values.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.col_as_slice(k).to_vec()
    }

    /// Eigenvector `k` extended by zero to the whole grid.
    pub fn eigenfunction(&self, k: usize) -> GridFunction {
        self.frame.extend(self.eigenvectors.col_as_slice(k))
    }

    pub fn completeness(&self) -> Completeness {
        self.completeness
    }

    pub fn is_full(&self) -> bool {
        self.completeness == Completeness::Full
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Weighted residual norms `‖Av − λv‖₂` per retained pair.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn cell_measure(&self) -> f64 {
        self.frame.grid().cell_measure()
    }

    /// The largest retained eigenvalue.
    pub fn max_retained(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    /// Eigenvectors rescaled to the Euclidean inner product.
    pub fn euclidean_vectors(&self) -> Mat<f64> {
        let s = self.cell_measure().sqrt();
        Mat::from_fn(self.eigenvectors.nrows(), self.eigenvectors.ncols(), |i, j| self.eigenvectors[(i, j)] * s)
    }

    /// Drops all but the lowest `k` pairs.
    pub fn truncated(&self, k: usize) -> SpectralData {
        let k = k.min(self.len());
        let vectors = Mat::from_fn(self.eigenvectors.nrows(), k, |i, j| self.eigenvectors[(i, j)]);
        let completeness = if k == self.frame.dim() { Completeness::Full } else { Completeness::Partial(k) };
        SpectralData {
            frame: self.frame.clone(),
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: vectors,
            completeness,
            residuals: self.residuals[..k].to_vec(),
        }
    }
}

/// `#{k : λ_k ≤ Λ}`, flagged when partial data may miss eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Count {
    pub count: usize,
    /// Set when the data is partial and `Λ` is not below the largest retained eigenvalue.
    pub lower_bound_only: bool,
}

pub fn counting_function(s: &SpectralData, lambda: f64) -> Count {
    let count = s.eigenvalues.partition_point(|&v| v <= lambda);
    let lower_bound_only = match s.completeness {
        Completeness::Full => false,
        Completeness::Partial(_) => s.max_retained().map_or(true, |m| lambda >= m),
    };
    Count { count, lower_bound_only }
}
