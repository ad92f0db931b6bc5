use crate::error::{Error, Result};
use crate::lattice::{GridFunction, NodeSet, SymmetricOperator};
use crate::numerics::{norm, norm_bound, sym_eig};
use crate::spectral::lowest_eigenpairs;

/// Above this compressed dimension the smallest eigenvector of the squared
/// operator comes from the iterative solver.
const DENSE_LIMIT: usize = 1500;

/// `min ‖(A − λ)u‖₂` over unit `u` supported on the active nodes outside `K`.
pub fn weyl_residual(a: &SymmetricOperator, lambda: f64, k: &NodeSet) -> Result<f64> {
    Ok(weyl_residual_with_witness(a, lambda, k)?.0)
}

/// The residual together with the minimizing unit vector. The residual is
/// evaluated as `‖(A − λ)u‖` directly rather than from the eigenvalue of the
/// square, which would lose half the digits.
pub fn weyl_residual_with_witness(a: &SymmetricOperator, lambda: f64, k: &NodeSet) -> Result<(f64, GridFunction)> {
    if k.grid() != a.grid() {
        return Err(Error::GridMismatch);
    }
    let outside = a.frame().active_set().difference(k);
    if outside.is_empty() {
        return Err(Error::InvalidArgument("no active nodes outside K".into()));
    }
    let shifted = a.shifted(-lambda);
    let square = shifted.squared().compress(&outside)?;
    let x: Vec<f64> = if square.dim() <= DENSE_LIMIT {
        let (_, v) = sym_eig(square.to_dense().as_ref());
        (0..square.dim()).map(|i| v[(i, 0)]).collect()
    } else {
        let tol = 1e-12 * norm_bound(&square);
        let s = lowest_eigenpairs(&square, 1, tol)?;
        let v = s.euclidean_vectors();
        (0..square.dim()).map(|i| v[(i, 0)]).collect()
    };
    let u = square.frame().extend(&x);
    let full = a.frame().restrict(&u)?;
    let r = norm(&shifted.apply(&full)) / norm(&full);
    let w = a.cell_measure();
    Ok((r, u.scaled(1.0 / (w.sqrt() * norm(&full)))))
}
