use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{DiscreteMeasure, GridFunction, SymmetricOperator};
use crate::numerics::{axpy, dot, norm, orthogonalize, scale, sym_eig, symmetrize, SpdFactor};
use crate::spectral::lowest_eigenpairs;

/// The negative part of a perturbation, as a potential or a measure.
#[derive(Debug, Clone, Copy)]
pub enum NegativePart<'a> {
    Potential(&'a GridFunction),
    Measure(&'a DiscreteMeasure),
}

/// Result of [`form_bound_estimate`].
#[derive(Debug, Clone, Serialize)]
pub struct FormBoundEstimate {
    /// Smallest `q` with `minus[u] ≤ q·(base[u] + C‖u‖²)` for all `u`.
    pub q: f64,
    pub c: f64,
    /// A unit maximizer on the active nodes of `base` (absent when `minus = 0`).
    pub maximizer: Option<Vec<f64>>,
}

impl FormBoundEstimate {
    /// `C_q = q·C`, the constant in `minus[u] ≤ q·base[u] + C_q‖u‖²`.
    pub fn c_q(&self) -> f64 {
        self.q * self.c
    }
}

/// Largest generalized eigenvalue of the pencil `(M₋, base + C·I)`, where
/// `M₋` is the diagonal form of the negative part on the active nodes.
pub fn form_bound_estimate(minus: NegativePart<'_>, base: &SymmetricOperator, c: f64) -> Result<FormBoundEstimate> {
    let diag = negative_diagonal(minus, base)?;
    pencil_max(&diag, base, c)
}

pub(crate) fn negative_diagonal(minus: NegativePart<'_>, base: &SymmetricOperator) -> Result<Vec<f64>> {
    let frame = base.frame();
    let d: Vec<f64> = match minus {
        NegativePart::Potential(v) => frame.sample(v)?,
        NegativePart::Measure(mu) => {
            if mu.grid() != base.grid() {
                return Err(Error::GridMismatch);
            }
            if mu.has_infinite_part() {
                return Err(Error::InvalidMeasure("negative part must not carry infinite mass".into()));
            }
            let full = mu.form_diagonal();
            frame.active().iter().map(|&i| full[i]).collect()
        }
    };
    if let Some(k) = d.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidPotential(format!("negative part must be finite and >= 0, got {}", d[k])));
    }
    Ok(d)
}

const DENSE_SUPPORT: usize = 2000;
const DENSE_ENTRIES: usize = 20_000_000;

/// Same as [`form_bound_estimate`] with the diagonal already extracted.
pub(crate) fn pencil_max(minus: &[f64], base: &SymmetricOperator, c: f64) -> Result<FormBoundEstimate> {
    let n = base.dim();
    if minus.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: minus.len() });
    }
    let factor = match SpdFactor::new(base, -c) {
        Some(f) => f,
        None => {
            let lambda_min = lowest_eigenpairs(base, 1, 1e-8).map(|s| s.eigenvalues()[0] + c).unwrap_or(f64::NAN);
            return Err(Error::NotPositiveDefinite { lambda_min });
        }
    };
    let support: Vec<usize> = (0..n).filter(|&i| minus[i] > 0.0).collect();
    if support.is_empty() {
        return Ok(FormBoundEstimate { q: 0.0, c, maximizer: None });
    }
    let root: Vec<f64> = support.iter().map(|&i| minus[i].sqrt()).collect();
    let s = support.len();
    let (q, mut u) = if s <= DENSE_SUPPORT && n * s <= DENSE_ENTRIES {
        let mut x = Mat::<f64>::zeros(n, s);
        for (col, (&i, &r)) in support.iter().zip(&root).enumerate() {
            x[(i, col)] = r;
        }
        factor.solve_in_place(x.as_mut());
        let mut sm = Mat::from_fn(s, s, |a, b| root[a] * x[(support[a], b)]);
        symmetrize(&mut sm);
        let (vals, vecs) = sym_eig(sm.as_ref());
        let y = vecs.col_as_slice(s - 1);
        let mut u = vec![0.0; n];
        for (col, &yc) in y.iter().enumerate() {
            axpy(yc, x.col_as_slice(col), &mut u);
        }
        (vals[s - 1], u)
    } else {
        lanczos_max(&factor, &support, &root, n)?
    };
    let nu = norm(&u);
    scale(1.0 / (nu * base.cell_measure().sqrt()), &mut u);
    Ok(FormBoundEstimate { q, c, maximizer: Some(u) })
}

/// Largest eigenvalue of `D^{1/2}(B)^{-1}D^{1/2}` on the support of `D`.
fn lanczos_max(factor: &SpdFactor, support: &[usize], root: &[f64], n: usize) -> Result<(f64, Vec<f64>)> {
    let s = support.len();
    let apply = |y: &[f64]| -> Vec<f64> {
        let mut z = vec![0.0; n];
        for (k, &i) in support.iter().enumerate() {
            z[i] = root[k] * y[k];
        }
        factor.solve_vec(&mut z);
        support.iter().zip(root).map(|(&i, &r)| r * z[i]).collect()
    };
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut v = vec![1.0 / (s as f64).sqrt(); s];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = (f64::NAN, vec![]);
    for m in 0..s.min(400) {
        q.push(v.clone());
        let mut w = apply(&v);
        alpha.push(dot(&w, &v));
        let b = orthogonalize(&q, &mut w);
        let t = Mat::from_fn(m + 1, m + 1, |i, j| {
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
        let (vals, vecs) = sym_eig(t.as_ref());
        let theta = vals[m];
        let resid = b * vecs[(m, m)].abs();
        let mut y = vec![0.0; s];
        for (j, qj) in q.iter().enumerate() {
            axpy(vecs[(j, m)], qj, &mut y);
        }
        last = (theta, y);
        if resid <= 1e-13 * theta.abs().max(f64::MIN_POSITIVE) || b <= 1e-300 {
            break;
        }
        beta.push(b);
        v = w;
        scale(1.0 / b, &mut v);
    }
    let (theta, y) = last;
    let mut u = vec![0.0; n];
    for (k, &i) in support.iter().enumerate() {
        u[i] = root[k] * y[k];
    }
    factor.solve_vec(&mut u);
    Ok((theta, u))
}
