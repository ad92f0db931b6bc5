use faer::Mat;

use super::calculus::functional_calculus;
use super::solve::{dense_eigendecomposition, DEFAULT_DENSE_BUDGET};
use crate::error::{Error, Result};
use crate::lattice::{NodeSet, SymmetricOperator};
use crate::numerics::{sym_eigvals, symmetrize};

/// Left factor `B` in `B·φ(A)`.
#[derive(Debug, Clone)]
pub enum Multiplier {
    Identity,
    /// Multiplication by `1_E`; nodes outside the active set are ignored.
    Indicator(NodeSet),
    /// A bounded operator on the same active nodes as `A`.
    Operator(SymmetricOperator),
}

fn product(b: &Multiplier, a: &SymmetricOperator, f: Mat<f64>) -> Result<Mat<f64>> {
    match b {
        Multiplier::Identity => Ok(f),
        Multiplier::Indicator(set) => {
            if set.grid() != a.grid() {
                return Err(Error::GridMismatch);
            }
            let keep: Vec<bool> = a.frame().active().iter().map(|&i| set.contains(i)).collect();
            Ok(Mat::from_fn(f.nrows(), f.ncols(), |i, j| if keep[i] { f[(i, j)] } else { 0.0 }))
        }
        Multiplier::Operator(op) => {
            if op.dim() != a.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), found: op.dim() });
            }
            Ok(op.to_dense() * f)
        }
    }
}

/// Singular values of `B·φ(A)` in descending order, from the eigenvalues of
/// the symmetric embedding `[[0, M], [Mᵀ, 0]]` (or of `MᵀM` when the
/// embedding would exceed the dense budget).
pub fn singular_values(b: &Multiplier, a: &SymmetricOperator, phi: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let s = dense_eigendecomposition(a)?;
    let f = functional_calculus(&s, phi)?.to_dense();
    let m = product(b, a, f)?;
    let n = m.nrows();
    let mut sv = if 2 * n <= DEFAULT_DENSE_BUDGET {
        let mut jw = Mat::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                jw[(i, n + j)] = m[(i, j)];
                jw[(n + j, i)] = m[(i, j)];
            }
        }
        let ev = sym_eigvals(jw.as_ref());
        ev[n..].iter().map(|v| v.max(0.0)).collect::<Vec<_>>()
    } else {
        let mut g = m.transpose() * &m;
        symmetrize(&mut g);
        sym_eigvals(g.as_ref()).into_iter().map(|v| v.max(0.0).sqrt()).collect()
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// `σ_{k+1}(B·φ(A))`, the first singular value not captured by a rank-`k` approximation.
pub fn sv_tail(b: &Multiplier, a: &SymmetricOperator, phi: impl Fn(f64) -> f64, k: usize) -> Result<f64> {
    if k >= a.dim() {
        return Err(Error::InvalidArgument(format!("k = {k} must be below the dimension {}", a.dim())));
    }
    Ok(singular_values(b, a, phi)?[k])
}

/// Hilbert–Schmidt norm of `1_E e^{−tA}`, i.e. the Frobenius norm of the rows
/// of the node matrix of `e^{−tA}` that belong to `E`. Equivalently
/// `(Σ_{x∈E} Σ_y h^{2d} k_t(x, y)²)^{1/2}` for the kernel `k_t` with respect to
/// the cell measure. At `t = 0` this is `√m` for `m` active nodes in `E`.
pub fn hs_norm(set: &NodeSet, a: &SymmetricOperator, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    if set.grid() != a.grid() {
        return Err(Error::GridMismatch);
    }
    let rows: Vec<usize> = (0..a.dim()).filter(|&k| set.contains(a.frame().active()[k])).collect();
    if rows.is_empty() {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok((rows.len() as f64).sqrt());
    }
    let s = dense_eigendecomposition(a)?;
    let e = functional_calculus(&s, |l| (-t * l).exp())?.to_dense();
    let mut acc = 0.0;
    for &i in &rows {
        for j in 0..e.ncols() {
            acc += e[(i, j)] * e[(i, j)];
        }
    }
    Ok(acc.sqrt())
}
