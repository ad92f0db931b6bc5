use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{
    add_measure, assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, DiscreteMeasure, Grid, GridFunction,
    GridSpec, Klmn, Point, SymmetricOperator,
};
use crate::spectral::{
    counting_function, dense_eigendecomposition, lowest_eigenpairs, tridiagonal_values_up_to, Completeness,
    SpectralData,
};

type Builder = dyn Fn(&Grid) -> Result<SymmetricOperator> + Send + Sync;

/// One operator formula restricted to the boxes `(−R_j, R_j)^d`, all with
/// spacing `h`. Operators are assembled on first use.
pub struct TruncationFamily {
    dim: usize,
    spacing: f64,
    radii: Vec<f64>,
    builder: Arc<Builder>,
    operators: Vec<OnceLock<Result<SymmetricOperator>>>,
}

impl std::fmt::Debug for TruncationFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TruncationFamily")
            .field("dim", &self.dim)
            .field("spacing", &self.spacing)
            .field("radii", &self.radii)
            .finish()
    }
}

impl TruncationFamily {
    /// `2R/h` must be an integer for every radius so that all boxes share `h`.
    pub fn new(
        dim: usize,
        spacing: f64,
        radii: &[f64],
        builder: impl Fn(&Grid) -> Result<SymmetricOperator> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if radii.is_empty() {
            return Err(Error::InvalidArgument("a truncation family needs at least one radius".into()));
        }
        for pair in radii.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidArgument(format!("radii must increase strictly: {radii:?}")));
            }
        }
        for &r in radii {
            let cells = 2.0 * r / spacing;
            if !(r > 0.0) || (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
                return Err(Error::InvalidGrid(format!("2R/h is not an integer for R = {r}, h = {spacing}")));
            }
        }
        Ok(TruncationFamily {
            dim,
            spacing,
            radii: radii.to_vec(),
            builder: Arc::new(builder),
            operators: radii.iter().map(|_| OnceLock::new()).collect(),
        })
    }

    /// `−Δ + V₊ − V₋` on each box.
    pub fn schrodinger(
        dim: usize,
        spacing: f64,
        radii: &[f64],
        vplus: impl Fn(Point) -> f64 + Send + Sync + 'static,
        vminus: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(dim, spacing, radii, move |grid| {
            let lap = assemble_dirichlet_laplacian(grid);
            let vp = GridFunction::from_fn(grid, &vplus);
            let vm = GridFunction::from_fn(grid, &vminus);
            assemble_schrodinger(&lap, &vp, &vm, Klmn::Auto)
        })
    }

    /// `−Δ + μ` on each box, with `μ` built per grid.
    pub fn with_measure(
        dim: usize,
        spacing: f64,
        radii: &[f64],
        measure: impl Fn(&Grid) -> Result<DiscreteMeasure> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(dim, spacing, radii, move |grid| {
            let lap = assemble_dirichlet_laplacian(grid);
            let mu = measure(grid)?;
            add_measure(&lap, &mu, &DiscreteMeasure::zero(grid), Klmn::Auto)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn grid_spec(&self, j: usize) -> GridSpec {
        GridSpec::centered_box(self.dim, self.radii[j], self.spacing)
    }

    /// The operator on box `j`, assembled once.
    pub fn operator(&self, j: usize) -> Result<&SymmetricOperator> {
        let cell = self.operators.get(j).ok_or_else(|| {
            Error::InvalidArgument(format!("radius index {j} out of range ({} radii)", self.radii.len()))
        })?;
        cell.get_or_init(|| build_grid(&self.grid_spec(j)).and_then(|g| (self.builder)(&g)))
            .as_ref()
            .map_err(Clone::clone)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "discrete-below-lambda")]
    DiscreteBelow,
    #[serde(rename = "essential-suspected")]
    EssentialSuspected,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::DiscreteBelow => "discrete-below-lambda",
            Classification::EssentialSuspected => "essential-suspected",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeVerdict {
    pub threshold: f64,
    pub radii: Vec<f64>,
    /// `N_j(Λ)` per radius; `None` where the solver failed.
    pub counts: Vec<Option<usize>>,
    /// The count at radius `j` is only known to be at least the value shown.
    pub lower_bound_only: Vec<bool>,
    /// `cauchy[j][i]`: eigenvalue `i` below `Λ` moved less than the tolerance from radius `j` to `j + 1`.
    pub cauchy: Vec<Vec<bool>>,
    /// Eigenvalues below `Λ` per radius.
    pub eigenvalues: Vec<Vec<f64>>,
    pub classification: Classification,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    /// Relative Cauchy tolerance, applied as `tol·max(|λ|, 1)`.
    pub cauchy_tol: f64,
    pub initial_k: usize,
    /// Largest number of eigenpairs requested before counts become lower bounds.
    pub max_k: usize,
    pub eig_tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { cauchy_tol: 1e-4, initial_k: 16, max_k: 512, eig_tol: 1e-8 }
    }
}

pub fn ess_spectrum_probe(family: &TruncationFamily, lambdas: &[f64]) -> Result<Vec<ProbeVerdict>> {
    ess_spectrum_probe_with(family, lambdas, &ProbeOptions::default())
}

/// Eigenvalues up to `upper` on one box. Returns the values and whether the
/// list may be missing some (budget exhausted).
pub fn eigenvalues_up_to(a: &SymmetricOperator, upper: f64, opts: &ProbeOptions) -> Result<(Vec<f64>, bool)> {
    if let Some(vals) = tridiagonal_values_up_to(a, upper) {
        return Ok((vals, false));
    }
    let n = a.dim();
    let mut k = opts.initial_k.min(n);
    loop {
        let s: SpectralData =
            if k == n { dense_eigendecomposition(a)? } else { lowest_eigenpairs(a, k, opts.eig_tol)? };
        let top = s.eigenvalues().last().copied().unwrap_or(f64::NEG_INFINITY);
        if s.completeness() == Completeness::Full || top > upper {
            let c = counting_function(&s, upper);
            return Ok((s.eigenvalues()[..c.count].to_vec(), false));
        }
        if k >= opts.max_k {
            return Ok((s.eigenvalues().to_vec(), true));
        }
        k = (2 * k).min(opts.max_k).min(n);
    }
}

/// Counts below each `Λ` on every box of the family and the stabilization
/// verdict over the last three radii.
pub fn ess_spectrum_probe_with(
    family: &TruncationFamily,
    lambdas: &[f64],
    opts: &ProbeOptions,
) -> Result<Vec<ProbeVerdict>> {
    if family.len() < 3 {
        return Err(Error::InvalidArgument(format!("the probe needs at least 3 radii, got {}", family.len())));
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument("threshold grid must be nonempty and finite".into()));
    }
    let top = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut spectra: Vec<BoxSpectrum> = Vec::new();
    for j in 0..family.len() {
        let r = family.operator(j).and_then(|a| eigenvalues_up_to(a, top, opts));
        spectra.push(r.map_err(|e| format!("radius {}: {e}", family.radii()[j])));
    }
    Ok(lambdas.iter().map(|&lam| probe_verdict(family.radii(), &spectra, lam, opts.cauchy_tol)).collect())
}

/// Eigenvalues found on one box and the "may be incomplete" flag, or the
/// solver failure message.
pub type BoxSpectrum = std::result::Result<(Vec<f64>, bool), String>;

/// The decision rule applied to precomputed per-box spectra (`radii.len() >= 3`).
pub fn probe_verdict(radii: &[f64], spectra: &[BoxSpectrum], lam: f64, tol: f64) -> ProbeVerdict {
    assert!(radii.len() >= 3 && radii.len() == spectra.len(), "one spectrum per radius, at least 3");
    let mut diagnostics = Vec::new();
    let mut counts = Vec::new();
    let mut lower_bound_only = Vec::new();
    let mut eigenvalues = Vec::new();
    for s in spectra {
        match s {
            Ok((vals, partial)) => {
                let below: Vec<f64> = vals.iter().copied().filter(|&v| v <= lam).collect();
                counts.push(Some(below.len()));
                lower_bound_only.push(*partial && below.len() == vals.len());
                eigenvalues.push(below);
            }
            Err(msg) => {
                diagnostics.push(msg.clone());
                counts.push(None);
                lower_bound_only.push(false);
                eigenvalues.push(vec![]);
            }
        }
    }
    let cauchy: Vec<Vec<bool>> = eigenvalues
        .windows(2)
        .map(|p| p[0].iter().zip(&p[1]).map(|(a, b)| (a - b).abs() < tol * a.abs().max(1.0)).collect())
        .collect();

    let m = radii.len();
    let last = m - 3..m;
    let classification = if last.clone().any(|j| counts[j].is_none()) {
        Classification::Inconclusive
    } else if last.clone().any(|j| lower_bound_only[j]) {
        diagnostics.push("eigenpair budget exhausted; counts are lower bounds".into());
        Classification::Inconclusive
    } else {
        let c: Vec<usize> = last.clone().map(|j| counts[j].unwrap()).collect();
        if c[0] == c[1] && c[1] == c[2] {
            let flags = &cauchy[m - 2];
            if flags.len() == c[2] && flags.iter().all(|&f| f) {
                Classification::DiscreteBelow
            } else {
                diagnostics.push("counts stable but eigenvalues still moving".into());
                Classification::Inconclusive
            }
        } else if c[0] < c[1] && c[1] < c[2] {
            Classification::EssentialSuspected
        } else {
            Classification::Inconclusive
        }
    };
    ProbeVerdict {
        threshold: lam,
        radii: radii.to_vec(),
        counts,
        lower_bound_only,
        cauchy,
        eigenvalues,
        classification,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_validation() {
        let ok = TruncationFamily::schrodinger(1, 0.1, &[1.0, 2.0, 3.0], |_| 0.0, |_| 0.0).unwrap();
        assert_eq!(ok.operator(1).unwrap().dim(), 39);
        assert!(ok.operator(5).is_err());
        assert!(TruncationFamily::schrodinger(1, 0.1, &[2.0, 1.0], |_| 0.0, |_| 0.0).is_err());
        assert!(TruncationFamily::schrodinger(1, 0.3, &[1.0], |_| 0.0, |_| 0.0).is_err());
        let two = TruncationFamily::schrodinger(1, 0.1, &[1.0, 2.0], |_| 0.0, |_| 0.0).unwrap();
        assert!(ess_spectrum_probe(&two, &[1.0]).is_err());
    }

    #[test]
    fn oscillator_is_discrete_and_free_is_essential() {
        let ho = TruncationFamily::schrodinger(1, 0.01, &[6.0, 8.0, 10.0], |p| p[0] * p[0], |_| 0.0).unwrap();
        let v = ess_spectrum_probe(&ho, &[20.0]).unwrap();
        assert_eq!(v[0].classification, Classification::DiscreteBelow);
        assert_eq!(v[0].counts, vec![Some(10); 3]);
        let free = TruncationFamily::schrodinger(1, 0.05, &[10.0, 20.0, 40.0], |_| 0.0, |_| 0.0).unwrap();
        let v = ess_spectrum_probe(&free, &[1.0]).unwrap();
        assert_eq!(v[0].classification, Classification::EssentialSuspected);
    }

    #[test]
    fn decision_rule_edge_cases() {
        let radii = [1.0, 2.0, 3.0];
        let ok = |v: Vec<f64>| Ok((v, false));
        let stable = [ok(vec![1.0, 2.0]), ok(vec![1.0, 2.0]), ok(vec![1.0, 2.0])];
        assert_eq!(probe_verdict(&radii, &stable, 3.0, 1e-4).classification, Classification::DiscreteBelow);
        let moving = [ok(vec![1.0, 2.0]), ok(vec![1.0, 2.0]), ok(vec![1.0, 2.1])];
        assert_eq!(probe_verdict(&radii, &moving, 3.0, 1e-4).classification, Classification::Inconclusive);
        let wobble = [ok(vec![1.0]), ok(vec![1.0, 2.0]), ok(vec![1.0])];
        assert_eq!(probe_verdict(&radii, &wobble, 3.0, 1e-4).classification, Classification::Inconclusive);
        let failed = [ok(vec![1.0]), Err("boom".to_string()), ok(vec![1.0])];
        let v = probe_verdict(&radii, &failed, 3.0, 1e-4);
        assert_eq!(v.classification, Classification::Inconclusive);
        assert_eq!(v.diagnostics.len(), 1);
        let budget = [ok(vec![1.0]), ok(vec![1.0, 2.0]), Ok((vec![1.0, 2.0, 2.5], true))];
        assert_eq!(probe_verdict(&radii, &budget, 3.0, 1e-4).classification, Classification::Inconclusive);
    }
}
