use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::SymmetricOperator;
use crate::spectral::{dense_eigendecomposition, functional_calculus, SpectralData};

/// Ultracontractivity constants of `e^{−tA}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelNorms {
    pub t: f64,
    /// `‖e^{−tA}‖_{L¹→L²}`.
    pub c_12: f64,
    /// `‖e^{−tA}‖_{L²→L^∞}`.
    pub c_2inf: f64,
}

/// Kernel norms from a full decomposition of `a`.
///
/// Column `y` of the node matrix `E` of `e^{−tA}` is `e^{−tA}` applied to the
/// node indicator of `y`; the kernel with respect to the cell measure `w` is
/// `k_t(x, y) = E_xy / w`. Then `c_2inf = max_x ‖k_t(x, ·)‖₂` and
/// `c_12 = max_y ‖k_t(·, y)‖₂`, both equal to `max √(Σ E²/w)` over rows or
/// columns. Symmetry makes them equal; a mismatch is reported.
pub fn heat_kernel_norms(a: &SymmetricOperator, t: f64) -> Result<KernelNorms> {
    let s = dense_eigendecomposition(a)?;
    heat_kernel_norms_from(&s, t)
}

pub fn heat_kernel_norms_from(s: &SpectralData, t: f64) -> Result<KernelNorms> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let e = functional_calculus(s, |l| (-t * l).exp())?.to_dense();
    let w = s.cell_measure();
    let n = e.nrows();
    let mut rows = vec![0.0f64; n];
    let mut cols = vec![0.0f64; n];
    for j in 0..n {
        for i in 0..n {
            let v = e[(i, j)] * e[(i, j)];
            rows[i] += v;
            cols[j] += v;
        }
    }
    let c_2inf = rows.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt() / w.sqrt();
    let c_12 = cols.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt() / w.sqrt();
    if (c_12 - c_2inf).abs() > 1e-8 * c_12.max(1.0) {
        return Err(Error::Invariant(format!("kernel norm duality failed: c_12 = {c_12}, c_2inf = {c_2inf}")));
    }
    Ok(KernelNorms { t, c_12, c_2inf })
}
