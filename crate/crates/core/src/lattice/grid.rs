use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper limit on the number of grid nodes.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// A physical point; the second coordinate is zero on 1D grids.
pub type Point = [f64; 2];

/// Box bounds and resolution for [`build_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Interior nodes per axis.
    pub nodes: Vec<usize>,
    pub node_budget: usize,
}

impl GridSpec {
    pub fn new(lower: &[f64], upper: &[f64], nodes: &[usize]) -> Self {
        GridSpec {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            nodes: nodes.to_vec(),
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    /// Symmetric box `(-radius, radius)^dim` whose spacing is as close as possible to `spacing`.
    pub fn centered_box(dim: usize, radius: f64, spacing: f64) -> Self {
        let per_axis = ((2.0 * radius / spacing).round() as usize).saturating_sub(1);
        GridSpec::new(&vec![-radius; dim], &vec![radius; dim], &vec![per_axis; dim])
    }

    pub fn with_node_budget(mut self, budget: usize) -> Self {
        self.node_budget = budget;
        self
    }
}

/// Rectangular lattice of interior nodes of an open box; the Dirichlet boundary
/// sits one spacing outside the outermost nodes.
///
/// Nodes are numbered with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
    spacing: Vec<f64>,
}

/// Validates `spec` and builds the grid.
pub fn build_grid(spec: &GridSpec) -> Result<Grid> {
    let dim = spec.lower.len();
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
    }
    if spec.upper.len() != dim || spec.nodes.len() != dim {
        return Err(Error::InvalidGrid(
            "lower, upper and nodes must have one entry per axis".into(),
        ));
    }
    let mut total: usize = 1;
    for axis in 0..dim {
        let (lo, hi) = (spec.lower[axis], spec.upper[axis]);
        if !lo.is_finite() || !hi.is_finite() || hi - lo <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "axis {axis}: box ({lo}, {hi}) has zero or negative extent"
            )));
        }
        if spec.nodes[axis] < 2 {
            return Err(Error::InvalidGrid(format!(
                "axis {axis}: resolution must be at least 2, got {}",
                spec.nodes[axis]
            )));
        }
        total = total
            .checked_mul(spec.nodes[axis])
            .ok_or(Error::NodeBudget { nodes: usize::MAX, budget: spec.node_budget })?;
    }
    if total > spec.node_budget {
        return Err(Error::NodeBudget { nodes: total, budget: spec.node_budget });
    }
    Ok(Grid::from_parts(spec.lower.clone(), spec.upper.clone(), spec.nodes.clone()))
}

impl Grid {
    fn from_parts(lower: Vec<f64>, upper: Vec<f64>, nodes: Vec<usize>) -> Self {
        let spacing = (0..lower.len())
            .map(|a| (upper[a] - lower[a]) / (nodes[a] + 1) as f64)
            .collect();
        Grid { lower, upper, nodes, spacing }
    }

    /// A 1D grid with unit spacing and unit cell measure, so the weighted
    /// inner product is the Euclidean one. Used to wrap plain matrices.
    pub fn unit(n: usize) -> Self {
        Grid::from_parts(vec![0.0], vec![(n + 1) as f64], vec![n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Interior nodes per axis.
    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Volume of one cell, `h^d`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis integer position of a node.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        debug_assert!(idx < self.len());
        match self.dim() {
            1 => [idx, 0],
            _ => [idx % self.nodes[0], idx / self.nodes[0]],
        }
    }

    pub fn linear_index(&self, multi: [usize; 2]) -> usize {
        match self.dim() {
            1 => multi[0],
            _ => multi[0] + self.nodes[0] * multi[1],
        }
    }

    pub fn coord(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut p = [0.0; 2];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dim()) {
            *slot = self.lower[axis] + (m[axis] + 1) as f64 * self.spacing[axis];
        }
        p
    }

    /// Node closest to `point` (clamped to the grid).
    pub fn nearest_node(&self, point: Point) -> usize {
        let mut multi = [0usize; 2];
        for (axis, slot) in multi.iter_mut().enumerate().take(self.dim()) {
            let t = (point[axis] - self.lower[axis]) / self.spacing[axis] - 1.0;
            *slot = t.round().clamp(0.0, (self.nodes[axis] - 1) as f64) as usize;
        }
        self.linear_index(multi)
    }

    /// Neighbors along each axis that lie inside the grid.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.multi_index(idx);
        (0..self.dim()).flat_map(move |axis| {
            let mut out = [None, None];
            if m[axis] > 0 {
                let mut l = m;
                l[axis] -= 1;
                out[0] = Some((axis, self.linear_index(l)));
            }
            if m[axis] + 1 < self.nodes[axis] {
                let mut r = m;
                r[axis] += 1;
                out[1] = Some((axis, self.linear_index(r)));
            }
            out.into_iter().flatten()
        })
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.coord(i))
    }
}
