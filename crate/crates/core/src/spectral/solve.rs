use faer::Mat;

use super::data::SpectralData;
use super::davidson::{self, DavidsonOptions};
use super::tridiagonal::Tridiagonal;
use crate::error::{Error, Result};
use crate::lattice::SymmetricOperator;
use crate::numerics::{norm, sym_eig};

/// Largest active dimension handled by dense decompositions.
pub const DEFAULT_DENSE_BUDGET: usize = 4000;

/// Solver selection for [`lowest_eigenpairs_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dense for small or full problems, bisection for tridiagonal ones, Davidson otherwise.
    Auto,
    Dense,
    Tridiagonal,
    /// Block Davidson; `shift_invert` selects the Cholesky preconditioner.
    Davidson { shift_invert: bool },
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub method: Method,
    pub dense_budget: usize,
    /// Below this dimension `Auto` goes dense.
    pub dense_cutoff: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            method: Method::Auto,
            dense_budget: DEFAULT_DENSE_BUDGET,
            dense_cutoff: 400,
            max_iterations: 400,
            seed: 0x5eed_1e55,
        }
    }
}

/// Full decomposition; fails above [`DEFAULT_DENSE_BUDGET`].
pub fn dense_eigendecomposition(a: &SymmetricOperator) -> Result<SpectralData> {
    dense_eigendecomposition_with_budget(a, DEFAULT_DENSE_BUDGET)
}

pub fn dense_eigendecomposition_with_budget(a: &SymmetricOperator, budget: usize) -> Result<SpectralData> {
    let n = a.dim();
    if n > budget {
        return Err(Error::DenseBudget { dim: n, budget });
    }
    let m = a.to_dense();
    let (vals, vecs) = sym_eig(m.as_ref());
    let residuals = residuals(a, &vals, &vecs);
    Ok(SpectralData::from_euclidean(a.frame().clone(), vals, vecs, residuals))
}

/// The `k` lowest eigenpairs with residuals at most `tol` (absolute, in the
/// weighted norm; a floor of a few ulps of `‖A‖` applies).
pub fn lowest_eigenpairs(a: &SymmetricOperator, k: usize, tol: f64) -> Result<SpectralData> {
    lowest_eigenpairs_with(a, k, tol, &EigenOptions::default())
}

pub fn lowest_eigenpairs_with(a: &SymmetricOperator, k: usize, tol: f64, opts: &EigenOptions) -> Result<SpectralData> {
    let n = a.dim();
    if k > n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of a {n}-dimensional operator")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if k == 0 {
        return Ok(SpectralData::from_euclidean(a.frame().clone(), vec![], Mat::zeros(n, 0), vec![]));
    }
    let method = match opts.method {
        Method::Auto => {
            let tri = a.tridiagonal_parts().is_some();
            if (k == n || n <= opts.dense_cutoff) && n <= opts.dense_budget {
                Method::Dense
            } else if tri {
                Method::Tridiagonal
            } else {
                Method::Davidson { shift_invert: true }
            }
        }
        m => m,
    };
    let data = match method {
        Method::Dense => {
            let full = dense_eigendecomposition_with_budget(a, opts.dense_budget)?;
            full.truncated(k)
        }
        Method::Tridiagonal => {
            let (d, e) = a
                .tridiagonal_parts()
                .ok_or_else(|| Error::InvalidArgument("operator is not tridiagonal".into()))?;
            let t = Tridiagonal::new(&d, &e);
            let (vals, vecs, res) = t.lowest_pairs(k, tol);
            let floor = 64.0 * f64::EPSILON * t.norm();
            if res.iter().any(|&r| r > tol.max(floor)) {
                return Err(Error::NotConverged { residuals: res });
            }
            SpectralData::from_euclidean(a.frame().clone(), vals, vecs, res)
        }
        Method::Davidson { shift_invert } => {
            let dopts = DavidsonOptions { max_iterations: opts.max_iterations, seed: opts.seed, shift_invert };
            let (vals, vecs, res) = davidson::lowest_pairs(a, k, tol, &dopts)?;
            SpectralData::from_euclidean(a.frame().clone(), vals, vecs, res)
        }
        Method::Auto => unreachable!(),
    };
    Ok(data)
}

/// Eigenvalues of a tridiagonal operator in `(−∞, upper]`, without vectors.
pub fn tridiagonal_values_up_to(a: &SymmetricOperator, upper: f64) -> Option<Vec<f64>> {
    let (d, e) = a.tridiagonal_parts()?;
    Some(Tridiagonal::new(&d, &e).values_up_to(upper))
}

/// Euclidean residuals `‖A v − λ v‖` for Euclidean-unit columns.
pub(crate) fn residuals(a: &SymmetricOperator, vals: &[f64], vecs: &Mat<f64>) -> Vec<f64> {
    if a.is_dense() {
        let m = a.to_dense();
        let av = &m * vecs;
        return (0..vals.len())
            .map(|j| (0..vecs.nrows()).map(|i| (av[(i, j)] - vals[j] * vecs[(i, j)]).powi(2)).sum::<f64>().sqrt())
            .collect();
    }
    (0..vals.len())
        .map(|j| {
            let v = vecs.col_as_slice(j);
            let mut r = a.apply(v);
            for (ri, vi) in r.iter_mut().zip(v) {
                *ri -= vals[j] * vi;
            }
            norm(&r)
        })
        .collect()
}
