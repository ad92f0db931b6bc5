use serde::Serialize;

use super::heat::HeatSemigroup;
use super::kernel::heat_kernel_norms_from;
use crate::error::{Error, Result};
use crate::lattice::SymmetricOperator;
use crate::numerics::{random_vector, seeded};
use crate::spectral::{dense_eigendecomposition, SpectralData};

fn require_nonnegative(s: &SpectralData) -> Result<()> {
    let lmin = s.eigenvalues().first().copied().unwrap_or(0.0);
    let scale = s.eigenvalues().last().map_or(1.0, |v| v.abs().max(1.0));
    if lmin < -1e-10 * scale {
        return Err(Error::InvalidArgument(format!("operator must be nonnegative, smallest eigenvalue {lmin}")));
    }
    Ok(())
}

struct Weighted<'a> {
    a: &'a SymmetricOperator,
    w: f64,
}

impl Weighted<'_> {
    fn norm2(&self, f: &[f64]) -> f64 {
        self.w * f.iter().map(|x| x * x).sum::<f64>()
    }
    fn norm1(&self, f: &[f64]) -> f64 {
        self.w * f.iter().map(|x| x.abs()).sum::<f64>()
    }
    fn form(&self, f: &[f64]) -> f64 {
        self.w * self.a.form_raw(f)
    }
}

/// `max (‖e^{−tA}f − f‖₂² − 2t·h[f])` over `samples` random unit `f` and all
/// eigenvectors. Spectral calculus gives `(1 − e^{−tλ})² ≤ 2tλ` for `λ ≥ 0`,
/// so the result is nonpositive up to rounding.
pub fn semigroup_form_inequality_check(a: &SymmetricOperator, t: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let s = dense_eigendecomposition(a)?;
    require_nonnegative(&s)?;
    let heat = HeatSemigroup::from_spectral(a, s.clone())?;
    let wt = Weighted { a, w: a.cell_measure() };
    let mut rng = seeded(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut eval = |f: Vec<f64>| -> Result<()> {
        let nf = wt.norm2(&f).sqrt();
        if nf == 0.0 {
            return Ok(());
        }
        let f: Vec<f64> = f.iter().map(|x| x / nf).collect();
        let (tf, _) = heat.apply_values(t, &f)?;
        let diff: Vec<f64> = tf.iter().zip(&f).map(|(a, b)| a - b).collect();
        worst = worst.max(wt.norm2(&diff) - 2.0 * t * wt.form(&f));
        Ok(())
    };
    for _ in 0..samples {
        eval(random_vector(a.dim(), &mut rng))?;
    }
    for k in 0..s.len() {
        eval(s.eigenvector(k))?;
    }
    Ok(worst)
}

/// Certified and observed constants in `‖f‖₂² ≤ r·h[f] + β(r)‖f‖₁²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperPoincare {
    pub r: f64,
    /// Time used for the certificate, `r/4`.
    pub t: f64,
    pub beta_certified: f64,
    pub beta_observed: f64,
    pub c_12: f64,
}

/// With `T = e^{−tA}`, `‖f‖ ≤ ‖f − Tf‖ + ‖Tf‖ ≤ (2t·h[f])^{1/2} + c_12(t)‖f‖₁`;
/// squaring with `(a + b)² ≤ 2a² + 2b²` gives
/// `‖f‖² ≤ 4t·h[f] + 2c_12(t)²‖f‖₁²`, so `t = r/4` and `β = 2c_12(r/4)²`.
///
/// The observed constant is the largest `(‖f‖² − r·h[f]) / ‖f‖₁²` over random
/// vectors, all eigenvectors and all node indicators.
pub fn super_poincare_beta(a: &SymmetricOperator, r: f64, samples: usize, seed: u64) -> Result<SuperPoincare> {
    let s = dense_eigendecomposition(a)?;
    super_poincare_beta_from(a, &s, r, samples, seed)
}

/// Same as [`super_poincare_beta`] with a precomputed full decomposition.
pub fn super_poincare_beta_from(
    a: &SymmetricOperator,
    s: &SpectralData,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<SuperPoincare> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
    }
    require_nonnegative(s)?;
    let t = r / 4.0;
    let norms = heat_kernel_norms_from(s, t)?;
    let beta_certified = 2.0 * norms.c_12 * norms.c_12;
    let wt = Weighted { a, w: a.cell_measure() };
    let ratio = |f: &[f64]| {
        let l1 = wt.norm1(f);
        if l1 == 0.0 {
            f64::NEG_INFINITY
        } else {
            (wt.norm2(f) - r * wt.form(f)) / (l1 * l1)
        }
    };
    let mut observed = f64::NEG_INFINITY;
    let mut rng = seeded(seed);
    for _ in 0..samples {
        observed = observed.max(ratio(&random_vector(a.dim(), &mut rng)));
    }
    for k in 0..s.len() {
        observed = observed.max(ratio(s.eigenvectors().col_as_slice(k)));
    }
    for d in a.diagonal() {
        // Indicator of a node: ‖f‖² = w, h[f] = w·A_ii, ‖f‖₁ = w.
        observed = observed.max((1.0 - r * d) / wt.w);
    }
    Ok(SuperPoincare { r, t, beta_certified, beta_observed: observed, c_12: norms.c_12 })
}
