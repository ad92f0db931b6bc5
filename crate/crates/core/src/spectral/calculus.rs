use faer::Mat;

use super::data::SpectralData;
use super::solve::dense_eigendecomposition_with_budget;
use crate::error::{Error, Result};
use crate::lattice::SymmetricOperator;
use crate::numerics::symmetrize;

/// Eigenvalues within this distance of an interval endpoint are reported as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Closed interval `[lower, upper]`; endpoints may be infinite and
/// `lower > upper` denotes the empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Interval { lower, upper }
    }

    pub fn everything() -> Self {
        Interval { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval { lower: self.lower.max(other.lower), upper: self.upper.min(other.upper) }
    }

    /// Whether `x` lies within `tol` of a finite endpoint.
    pub fn near_boundary(&self, x: f64, tol: f64) -> bool {
        self.lower <= self.upper
            && ((self.lower.is_finite() && (x - self.lower).abs() <= tol)
                || (self.upper.is_finite() && (x - self.upper).abs() <= tol))
    }
}

fn weighted_sum(s: &SpectralData, coeffs: &[f64]) -> Result<SymmetricOperator> {
    let v = s.euclidean_vectors();
    let n = v.nrows();
    let used: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k] != 0.0).collect();
    let left = Mat::from_fn(n, used.len(), |i, j| v[(i, used[j])] * coeffs[used[j]]);
    let right = Mat::from_fn(n, used.len(), |i, j| v[(i, used[j])]);
    let mut m = &left * right.transpose();
    symmetrize(&mut m);
    SymmetricOperator::from_dense_on(s.frame().clone(), m)
}

/// `φ(A) = V φ(Λ) Vᵀ` in the weighted inner product. Requires full data.
pub fn functional_calculus(s: &SpectralData, phi: impl Fn(f64) -> f64) -> Result<SymmetricOperator> {
    if !s.is_full() {
        return Err(Error::PartialSpectrum);
    }
    let mut coeffs = Vec::with_capacity(s.len());
    for &l in s.eigenvalues() {
        let c = phi(l);
        if !c.is_finite() {
            return Err(Error::UndefinedFunction { eigenvalue: l });
        }
        coeffs.push(c);
    }
    weighted_sum(s, &coeffs)
}

/// `1_I(A)` together with the eigenvalues that sit on the boundary of `I`.
#[derive(Debug, Clone)]
pub struct SpectralProjector {
    pub operator: SymmetricOperator,
    pub rank: usize,
    /// Eigenvalues within [`TIE_TOLERANCE`] of an endpoint; they are included
    /// or excluded by the closed-interval rule but flagged here.
    pub boundary_ties: Vec<f64>,
}

pub fn spectral_projector(s: &SpectralData, interval: Interval) -> Result<SpectralProjector> {
    if !s.is_full() {
        return Err(Error::PartialSpectrum);
    }
    let coeffs: Vec<f64> = s.eigenvalues().iter().map(|&l| if interval.contains(l) { 1.0 } else { 0.0 }).collect();
    let rank = coeffs.iter().filter(|&&c| c == 1.0).count();
    let boundary_ties =
        s.eigenvalues().iter().copied().filter(|&l| interval.near_boundary(l, TIE_TOLERANCE)).collect();
    Ok(SpectralProjector { operator: weighted_sum(s, &coeffs)?, rank, boundary_ties })
}

/// `‖1_I(g(A)) − 1_{g⁻¹(I)}(A)‖_F`. The left side decomposes `g(A)` afresh;
/// the right side selects eigenvectors of `A` by evaluating `g`.
pub fn composition_identity_check(s: &SpectralData, g: impl Fn(f64) -> f64, interval: Interval) -> Result<f64> {
    if !s.is_full() {
        return Err(Error::PartialSpectrum);
    }
    for &l in s.eigenvalues() {
        let gl = g(l);
        if !gl.is_finite() {
            return Err(Error::UndefinedFunction { eigenvalue: l });
        }
        if interval.near_boundary(gl, TIE_TOLERANCE) {
            return Err(Error::BoundaryTie { value: gl, tolerance: TIE_TOLERANCE });
        }
    }
    let ga = functional_calculus(s, &g)?;
    let gs = dense_eigendecomposition_with_budget(&ga, usize::MAX)?;
    let left = spectral_projector(&gs, interval)?.operator.to_dense();
    let coeffs: Vec<f64> = s.eigenvalues().iter().map(|&l| if interval.contains(g(l)) { 1.0 } else { 0.0 }).collect();
    let right = weighted_sum(s, &coeffs)?.to_dense();
    Ok((&left - &right).norm_l2())
}
