use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GridFunction, NodeSet};

/// Weighted `L²` norm of `f` on one cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubeNorm {
    /// Integer label; the cube is centered at `k·side`.
    pub k: [i64; 2],
    pub norm: f64,
    /// The cube lies inside the closed box.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeProfile {
    pub requested_side: f64,
    /// Side after rounding to a whole number of cells per axis.
    pub side: f64,
    pub rounding_defect: f64,
    pub per_cube: Vec<CubeNorm>,
    /// `sup_k ‖1_{C(k)} f‖₂` over all cubes meeting the box.
    pub sup_norm: f64,
}

impl CubeProfile {
    fn center_distance(&self, c: &CubeNorm) -> f64 {
        self.side * ((c.k[0] * c.k[0] + c.k[1] * c.k[1]) as f64).sqrt()
    }

    /// Largest norm over complete cubes whose center is at distance `≥ rho`
    /// from the origin; `None` if there is no such cube.
    pub fn tail_sup(&self, rho: f64) -> Option<f64> {
        self.per_cube
            .iter()
            .filter(|c| c.complete && self.center_distance(c) >= rho - 1e-9 * self.side)
            .map(|c| c.norm)
            .reduce(f64::max)
    }

    pub fn tail_profile(&self, radii: &[f64]) -> Vec<(f64, Option<f64>)> {
        radii.iter().map(|&r| (r, self.tail_sup(r))).collect()
    }
}

/// Cube norms `‖1_{C(k)} f‖₂` for the cubes `C(k) = k·s + [−s/2, s/2)^d`.
pub fn cube_profile(f: &GridFunction, cube_side: f64) -> Result<CubeProfile> {
    let grid = f.grid();
    let d = grid.dim();
    let h = grid.spacing();
    if !(cube_side >= h.iter().cloned().fold(0.0, f64::max) * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!("cube side {cube_side} is smaller than the spacing")));
    }
    let cells: Vec<f64> = h.iter().map(|&ha| (cube_side / ha).round()).collect();
    let sides: Vec<f64> = cells.iter().zip(h).map(|(c, ha)| c * ha).collect();
    if d == 2 && (sides[0] - sides[1]).abs() > 1e-9 * cube_side {
        return Err(Error::InvalidArgument("cube side rounds differently on the two axes".into()));
    }
    let side = sides[0];
    let rounding_defect = (side - cube_side).abs();

    let label = |x: f64| ((x / side) + 0.5 + 1e-9).floor() as i64;
    let mut mass: std::collections::BTreeMap<[i64; 2], f64> = Default::default();
    for (i, p) in grid.points().enumerate() {
        let mut k = [0i64; 2];
        for a in 0..d {
            k[a] = label(p[a]);
        }
        let v = f.values()[i];
        *mass.entry([k[1], k[0]]).or_insert(0.0) += v * v;
    }
    let w = grid.cell_measure();
    let eps = 1e-9 * side;
    let complete = |k: [i64; 2]| {
        (0..d).all(|a| {
            let c = k[a] as f64 * side;
            c - side / 2.0 >= grid.lower()[a] - eps && c + side / 2.0 <= grid.upper()[a] + eps
        })
    };
    let per_cube: Vec<CubeNorm> = mass
        .into_iter()
        .map(|([k1, k0], m)| {
            let k = [k0, k1];
            CubeNorm { k, norm: (w * m).sqrt(), complete: complete(k) }
        })
        .collect();
    let sup_norm = per_cube.iter().map(|c| c.norm).fold(0.0, f64::max);
    Ok(CubeProfile { requested_side: cube_side, side, rounding_defect, per_cube, sup_norm })
}

/// Cube profile of the indicator of a node set; norms are `|E ∩ C(k)|^{1/2}`.
pub fn set_cube_profile(set: &NodeSet, cube_side: f64) -> Result<CubeProfile> {
    cube_profile(&GridFunction::indicator(set), cube_side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_grid, GridSpec};

    #[test]
    fn constant_has_flat_profile() {
        let g = build_grid(&GridSpec::centered_box(2, 5.0, 0.1)).unwrap();
        let p = cube_profile(&GridFunction::constant(&g, 1.0), 1.0).unwrap();
        assert!(p.rounding_defect < 1e-12);
        let complete: Vec<_> = p.per_cube.iter().filter(|c| c.complete).collect();
        assert_eq!(complete.len(), 81);
        for c in complete {
            assert!((c.norm - 1.0).abs() < 1e-12, "{c:?}");
        }
        assert!((p.tail_sup(3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(p.tail_sup(100.0).is_none());
    }

    #[test]
    fn strip_is_not_thin() {
        let g = build_grid(&GridSpec::centered_box(2, 10.0, 0.1)).unwrap();
        let strip = NodeSet::from_predicate(&g, |p| p[1].abs() <= 1.0);
        let p = set_cube_profile(&strip, 1.0).unwrap();
        for c in p.per_cube.iter().filter(|c| c.complete && c.k[1] == 0) {
            assert!((c.norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn side_rounds_to_cells() {
        let g = build_grid(&GridSpec::centered_box(1, 5.0, 0.1)).unwrap();
        let p = cube_profile(&GridFunction::constant(&g, 1.0), 1.04).unwrap();
        assert!((p.side - 1.0).abs() < 1e-12);
        assert!((p.rounding_defect - 0.04).abs() < 1e-12);
        assert!(cube_profile(&GridFunction::constant(&g, 1.0), 0.05).is_err());
    }
}
