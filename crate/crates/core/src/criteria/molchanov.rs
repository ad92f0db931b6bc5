use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{DiscreteMeasure, NodeSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMass {
    /// Left end of the window `[x, x + window)`.
    pub x: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MolchanovProfile {
    pub window: f64,
    pub stride: f64,
    pub windows: Vec<WindowMass>,
}

impl MolchanovProfile {
    /// Smallest window mass over windows with `|x| ≥ rho`.
    pub fn min_tail(&self, rho: f64) -> Option<f64> {
        self.windows.iter().filter(|w| w.x.abs() >= rho).map(|w| w.mass).reduce(f64::min)
    }
}

/// `μ([x, x + window))` for `x = j·stride` with the window inside the box
/// (`lower < x`, `x + window ≤ upper`).
/// Windows are half-open so that a window of one period holds exactly one
/// atom of a periodic comb.
pub fn molchanov_scan(mu: &DiscreteMeasure, window: f64, stride: f64) -> Result<MolchanovProfile> {
    let grid = mu.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("the window scan needs a 1D grid".into()));
    }
    let h = grid.spacing()[0];
    if !(window >= h * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!("window {window} is smaller than the spacing {h}")));
    }
    if !(stride > 0.0) {
        return Err(Error::InvalidArgument(format!("stride must be positive, got {stride}")));
    }
    let (lo, hi) = (grid.lower()[0], grid.upper()[0]);
    let eps = 1e-9 * h;
    // The left end must be an interior point: the boundary itself carries no node.
    let j0 = ((lo + eps) / stride).floor() as i64 + 1;
    let j1 = ((hi - window + eps) / stride).floor() as i64;
    let mut windows = Vec::new();
    for j in j0..=j1 {
        let x = j as f64 * stride;
        let set = NodeSet::from_predicate(grid, |p| p[0] >= x - eps && p[0] < x + window - eps);
        windows.push(WindowMass { x, mass: mu.mass(&set) });
    }
    Ok(MolchanovProfile { window, stride, windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_grid, GridSpec};

    #[test]
    fn lebesgue_windows_have_unit_mass() {
        let g = build_grid(&GridSpec::centered_box(1, 10.0, 0.01)).unwrap();
        let mu = DiscreteMeasure::lebesgue(&g, 1.0).unwrap();
        let p = molchanov_scan(&mu, 1.0, 0.5).unwrap();
        assert_eq!(p.windows.len(), 38);
        for w in &p.windows {
            assert!((w.mass - 1.0).abs() < 1e-9, "{w:?}");
        }
    }

    #[test]
    fn weighted_comb_diverges() {
        let g = build_grid(&GridSpec::centered_box(1, 30.0, 0.01)).unwrap();
        let mu = DiscreteMeasure::comb(&g, 1.0, |k| k.unsigned_abs() as f64).unwrap();
        let p = molchanov_scan(&mu, 1.0, 0.25).unwrap();
        for rho in [2.0, 5.0, 10.0, 20.0] {
            assert!(p.min_tail(rho).unwrap() >= rho - 1.0);
        }
        let unit = DiscreteMeasure::comb(&g, 1.0, |_| 1.0).unwrap();
        let p = molchanov_scan(&unit, 1.0, 0.25).unwrap();
        assert!(p.windows.iter().all(|w| (w.mass - 1.0).abs() < 1e-12));
    }

    #[test]
    fn narrow_window_rejected() {
        let g = build_grid(&GridSpec::centered_box(1, 2.0, 0.1)).unwrap();
        assert!(molchanov_scan(&DiscreteMeasure::zero(&g), 0.05, 1.0).is_err());
    }
}
