use faer::Mat;

use super::cubes::cube_profile;
use crate::error::{Error, Result};
use crate::lattice::{GridFunction, SymmetricOperator};
use crate::numerics::{sym_eigvals, symmetrize};
use crate::spectral::{dense_eigendecomposition, functional_calculus, SpectralData};

/// `‖diag(h)(A + 1)^{−p}‖ / ‖h‖_{2;∞}` with unit cubes.
pub fn strichartz_ratio(hfun: &GridFunction, a: &SymmetricOperator, p: f64) -> Result<f64> {
    let s = dense_eigendecomposition(a)?;
    strichartz_ratio_from(hfun, &s, p)
}

/// Same as [`strichartz_ratio`] with a precomputed full decomposition of `A`.
pub fn strichartz_ratio_from(hfun: &GridFunction, s: &SpectralData, p: f64) -> Result<f64> {
    let resolvent = ResolventPower::new(s, p)?;
    resolvent.ratio(hfun)
}

/// `(A + 1)^{−p}` as a dense matrix, reusable across weight functions.
pub struct ResolventPower {
    matrix: Mat<f64>,
    frame: std::sync::Arc<crate::lattice::Frame>,
}

impl ResolventPower {
    pub fn new(s: &SpectralData, p: f64) -> Result<Self> {
        let d = s.frame().grid().dim();
        if !(p > d as f64 / 4.0) {
            return Err(Error::InvalidArgument(format!("p must exceed d/4 = {}, got {p}", d as f64 / 4.0)));
        }
        if let Some(&l0) = s.eigenvalues().first() {
            if l0 <= -1.0 {
                return Err(Error::NotPositiveDefinite { lambda_min: l0 + 1.0 });
            }
        }
        let op = functional_calculus(s, |x| (x + 1.0).powf(-p))?;
        Ok(ResolventPower { matrix: op.to_dense(), frame: s.frame().clone() })
    }

    /// Largest singular value of `diag(h)·(A + 1)^{−p}`.
    pub fn operator_norm(&self, hfun: &GridFunction) -> Result<f64> {
        let hv = self.frame.sample(hfun)?;
        let n = hv.len();
        let m = Mat::from_fn(n, n, |i, j| hv[i] * self.matrix[(i, j)]);
        let mut g = m.transpose() * &m;
        symmetrize(&mut g);
        Ok(sym_eigvals(g.as_ref()).last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }

    pub fn ratio(&self, hfun: &GridFunction) -> Result<f64> {
        let denom = cube_profile(hfun, 1.0)?.sup_norm;
        if denom == 0.0 {
            return Err(Error::InvalidArgument("weight function has zero cube norm".into()));
        }
        Ok(self.operator_norm(hfun)? / denom)
    }
}
