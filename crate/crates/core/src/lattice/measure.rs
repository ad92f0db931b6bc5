use std::collections::BTreeMap;

use super::function::{GridFunction, NodeSet};
use super::grid::{Grid, Point};
use crate::error::{Error, Result};

/// A nonnegative measure on the grid: a density with respect to the cell
/// measure, point masses at nodes, and a set of nodes carrying `∞`.
///
/// The mass of a single cell is `density·h^d + atom weight`; any set that
/// meets `infinite` has infinite mass. Removing the infinite nodes from an
/// operator's domain is the grid version of adding `∞_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    grid: Grid,
    density: Vec<f64>,
    atoms: BTreeMap<usize, f64>,
    infinite: NodeSet,
}

impl DiscreteMeasure {
    pub fn zero(grid: &Grid) -> Self {
        DiscreteMeasure {
            grid: grid.clone(),
            density: vec![0.0; grid.len()],
            atoms: BTreeMap::new(),
            infinite: NodeSet::empty(grid),
        }
    }

    /// `c` times Lebesgue measure.
    pub fn lebesgue(grid: &Grid, c: f64) -> Result<Self> {
        Self::zero(grid).with_density(&GridFunction::constant(grid, c))
    }

    /// `∞_B` for the node set `B`.
    pub fn infinite_on(set: &NodeSet) -> Self {
        let mut m = Self::zero(set.grid());
        m.infinite = set.clone();
        m
    }

    pub fn with_density(mut self, density: &GridFunction) -> Result<Self> {
        if density.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = density.values().iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "density must be finite and nonnegative, node {i} has {}",
                density.values()[i]
            )));
        }
        self.density = density.values().to_vec();
        Ok(self)
    }

    /// Adds a point mass at `node`; weights at the same node accumulate.
    pub fn with_atom(mut self, node: usize, weight: f64) -> Result<Self> {
        if node >= self.grid.len() {
            return Err(Error::InvalidMeasure(format!("atom node {node} is outside the grid")));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidMeasure(format!("atom weight must be finite and >= 0, got {weight}")));
        }
        *self.atoms.entry(node).or_insert(0.0) += weight;
        Ok(self)
    }

    /// Point mass at the node nearest to `point`.
    pub fn with_atom_at(self, point: Point, weight: f64) -> Result<Self> {
        let node = self.grid.nearest_node(point);
        self.with_atom(node, weight)
    }

    /// A periodic comb of atoms at `x = k·spacing` (1D, integers `k`) with
    /// weight `weight(k)`, restricted to the grid box.
    pub fn comb(grid: &Grid, spacing: f64, weight: impl Fn(i64) -> f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::InvalidMeasure("a comb needs a 1D grid".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidMeasure(format!("comb spacing must be positive, got {spacing}")));
        }
        let (lo, hi) = (grid.coord(0)[0], grid.coord(grid.len() - 1)[0]);
        let eps = 1e-9 * grid.spacing()[0];
        let k0 = ((lo - eps) / spacing).ceil() as i64;
        let k1 = ((hi + eps) / spacing).floor() as i64;
        let mut m = Self::zero(grid);
        for k in k0..=k1 {
            m = m.with_atom_at([k as f64 * spacing, 0.0], weight(k))?;
        }
        Ok(m)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn atoms(&self) -> &BTreeMap<usize, f64> {
        &self.atoms
    }

    pub fn infinite_mask(&self) -> &NodeSet {
        &self.infinite
    }

    pub fn has_infinite_part(&self) -> bool {
        !self.infinite.is_empty()
    }

    /// Mass of a node set (`∞` if it meets the infinite mask).
    pub fn mass(&self, set: &NodeSet) -> f64 {
        if !set.intersection(&self.infinite).is_empty() {
            return f64::INFINITY;
        }
        let w = self.grid.cell_measure();
        set.iter()
            .map(|i| self.density[i] * w + self.atoms.get(&i).copied().unwrap_or(0.0))
            .sum()
    }

    /// Mass of a single node.
    pub fn node_mass(&self, node: usize) -> f64 {
        if self.infinite.contains(node) {
            return f64::INFINITY;
        }
        self.density[node] * self.grid.cell_measure() + self.atoms.get(&node).copied().unwrap_or(0.0)
    }

    /// Diagonal of the measure form in the node basis, so that
    /// `h^d Σ dᵢ uᵢ² = ∫ u² dμ`: density plus atom weight divided by `h^d`.
    pub fn form_diagonal(&self) -> Vec<f64> {
        let w = self.grid.cell_measure();
        let mut d = self.density.clone();
        for (&i, &a) in &self.atoms {
            d[i] += a / w;
        }
        for i in self.infinite.iter() {
            d[i] = f64::INFINITY;
        }
        d
    }

    /// `μ[u, u]` for a nodal function.
    pub fn form(&self, u: &GridFunction) -> f64 {
        let w = self.grid.cell_measure();
        self.form_diagonal()
            .iter()
            .zip(u.values())
            .map(|(&d, &x)| if x == 0.0 { 0.0 } else { d * x * x })
            .sum::<f64>()
            * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::{build_grid, GridSpec};

    fn line() -> Grid {
        build_grid(&GridSpec::centered_box(1, 5.0, 0.5)).unwrap()
    }

    #[test]
    fn masses_add_density_and_atoms() {
        let g = line();
        let m = DiscreteMeasure::lebesgue(&g, 2.0).unwrap().with_atom(3, 0.7).unwrap();
        let set = NodeSet::from_indices(&g, [2, 3, 4]);
        assert!((m.mass(&set) - (3.0 * 2.0 * 0.5 + 0.7)).abs() < 1e-14);
        let inf = DiscreteMeasure::infinite_on(&NodeSet::from_indices(&g, [4]));
        assert_eq!(inf.mass(&set), f64::INFINITY);
        assert_eq!(inf.mass(&NodeSet::from_indices(&g, [1])), 0.0);
    }

    #[test]
    fn atom_form_reproduces_point_evaluation() {
        let g = line();
        let m = DiscreteMeasure::zero(&g).with_atom(5, 1.5).unwrap();
        let u = GridFunction::from_fn(&g, |p| 1.0 + p[0]);
        let x5 = g.coord(5)[0];
        assert!((m.form(&u) - 1.5 * (1.0 + x5).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn comb_places_atoms_on_integers() {
        let g = build_grid(&GridSpec::centered_box(1, 4.0, 0.01)).unwrap();
        let m = DiscreteMeasure::comb(&g, 1.0, |k| k.unsigned_abs() as f64).unwrap();
        assert_eq!(m.atoms().len(), 7);
        for (&node, &w) in m.atoms() {
            let x = g.coord(node)[0];
            assert!((x - x.round()).abs() < 1e-9);
            assert!((w - x.round().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_weights() {
        let g = line();
        assert!(DiscreteMeasure::zero(&g).with_atom(0, -1.0).is_err());
        assert!(DiscreteMeasure::lebesgue(&g, -0.1).is_err());
    }
}
