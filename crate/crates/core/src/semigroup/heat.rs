use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GridFunction, SymmetricOperator};
use crate::numerics::{axpy, dot, norm, orthogonalize, scale, sym_eig};
use crate::spectral::{dense_eigendecomposition, SpectralData, DEFAULT_DENSE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HeatMethod {
    /// `Σ e^{−tλ_k}⟨v, v_k⟩v_k` from a full decomposition.
    EigenExpansion,
    /// Lanczos approximation with an a posteriori error estimate.
    Krylov,
}

/// `e^{−tA}v` with the method used and an error bound in the weighted norm.
#[derive(Debug, Clone)]
pub struct HeatComputation {
    pub time: f64,
    pub method: HeatMethod,
    pub value: GridFunction,
    pub error_bound: f64,
}

/// Reusable evaluator of `e^{−tA}` for one operator.
#[derive(Debug, Clone)]
pub struct HeatSemigroup {
    op: SymmetricOperator,
    spectral: Option<SpectralData>,
    krylov_tol: f64,
    krylov_dim: usize,
}

impl HeatSemigroup {
    /// Eigen-expansion within the dense budget, Krylov above it.
    pub fn new(a: &SymmetricOperator) -> Result<Self> {
        let method = if a.dim() <= DEFAULT_DENSE_BUDGET { HeatMethod::EigenExpansion } else { HeatMethod::Krylov };
        Self::with_method(a, method)
    }

    pub fn with_method(a: &SymmetricOperator, method: HeatMethod) -> Result<Self> {
        let spectral = match method {
            HeatMethod::EigenExpansion => Some(dense_eigendecomposition(a)?),
            HeatMethod::Krylov => None,
        };
        Ok(HeatSemigroup { op: a.clone(), spectral, krylov_tol: 1e-12, krylov_dim: 120 })
    }

    /// From an existing full decomposition of `a`.
    pub fn from_spectral(a: &SymmetricOperator, s: SpectralData) -> Result<Self> {
        if !s.is_full() {
            return Err(Error::PartialSpectrum);
        }
        Ok(HeatSemigroup { op: a.clone(), spectral: Some(s), krylov_tol: 1e-12, krylov_dim: 120 })
    }

    pub fn method(&self) -> HeatMethod {
        if self.spectral.is_some() {
            HeatMethod::EigenExpansion
        } else {
            HeatMethod::Krylov
        }
    }

    pub fn operator(&self) -> &SymmetricOperator {
        &self.op
    }

    pub fn spectral(&self) -> Option<&SpectralData> {
        self.spectral.as_ref()
    }

    pub fn apply(&self, t: f64, v: &GridFunction) -> Result<HeatComputation> {
        let x = self.op.frame().restrict(v)?;
        let (y, err) = self.apply_values(t, &x)?;
        Ok(HeatComputation { time: t, method: self.method(), value: self.op.frame().extend(&y), error_bound: err })
    }

    /// `e^{−tA}` on active-node values; returns the values and an error bound.
    pub fn apply_values(&self, t: f64, v: &[f64]) -> Result<(Vec<f64>, f64)> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time must be finite and nonnegative, got {t}")));
        }
        if v.len() != self.op.dim() {
            return Err(Error::DimensionMismatch { expected: self.op.dim(), found: v.len() });
        }
        if t == 0.0 {
            return Ok((v.to_vec(), 0.0));
        }
        let w = self.op.cell_measure();
        match &self.spectral {
            Some(s) => {
                let vecs = s.eigenvectors();
                let mut y = vec![0.0; v.len()];
                for k in 0..s.len() {
                    let col = vecs.col_as_slice(k);
                    let c = w * dot(col, v) * (-t * s.eigenvalues()[k]).exp();
                    if c != 0.0 {
                        axpy(c, col, &mut y);
                    }
                }
                let bound = 64.0 * f64::EPSILON * (v.len() as f64).sqrt() * (w * dot(v, v)).sqrt();
                Ok((y, bound))
            }
            None => self.krylov(t, v, 0).map(|(y, e)| (y, e * w.sqrt())),
        }
    }

    /// Lanczos approximation in Euclidean coordinates; halves the step when
    /// the Krylov space is too small for the requested accuracy.
    fn krylov(&self, t: f64, v: &[f64], depth: usize) -> Result<(Vec<f64>, f64)> {
        let beta0 = norm(v);
        if beta0 == 0.0 {
            return Ok((vec![0.0; v.len()], 0.0));
        }
        let n = v.len();
        let max_dim = self.krylov_dim.min(n);
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut cur = v.to_vec();
        scale(1.0 / beta0, &mut cur);
        let mut last_err = f64::INFINITY;
        for m in 1..=max_dim {
            q.push(cur.clone());
            let mut wv = self.op.apply(&cur);
            alpha.push(dot(&wv, &cur));
            let b = orthogonalize(&q, &mut wv);
            let breakdown = b <= 1e-14 * alpha.iter().fold(0.0f64, |s, a| s.max(a.abs())).max(1.0);
            if m % 5 == 0 || breakdown || m == max_dim {
                let (coef, tail) = exp_tridiagonal(&alpha, &beta, t);
                let err = if breakdown { 0.0 } else { beta0 * b * tail.abs() };
                last_err = err;
                if err <= self.krylov_tol * beta0 {
                    let mut y = vec![0.0; n];
                    for (j, qj) in q.iter().enumerate() {
                        axpy(beta0 * coef[j], qj, &mut y);
                    }
                    return Ok((y, err));
                }
            }
            if breakdown {
                break;
            }
            beta.push(b);
            cur = wv;
            scale(1.0 / b, &mut cur);
        }
        if depth >= 24 {
            return Err(Error::NotConverged { residuals: vec![last_err] });
        }
        let (half, e1) = self.krylov(0.5 * t, v, depth + 1)?;
        let (full, e2) = self.krylov(0.5 * t, &half, depth + 1)?;
        Ok((full, e1 + e2))
    }
}

/// First column of `exp(−tT)` for the Lanczos matrix and its last entry.
fn exp_tridiagonal(alpha: &[f64], beta: &[f64], t: f64) -> (Vec<f64>, f64) {
    let m = alpha.len();
    let tm = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let (vals, vecs) = sym_eig(tm.as_ref());
    let mut col = vec![0.0; m];
    for k in 0..m {
        let c = (-t * vals[k]).exp() * vecs[(0, k)];
        for (i, ci) in col.iter_mut().enumerate() {
            *ci += c * vecs[(i, k)];
        }
    }
    let last = col[m - 1];
    (col, last)
}

/// `e^{−tA}v` with the default method for the operator size.
pub fn heat_apply(a: &SymmetricOperator, t: f64, v: &GridFunction) -> Result<GridFunction> {
    Ok(HeatSemigroup::new(a)?.apply(t, v)?.value)
}
