use super::grid::{Grid, Point};
use crate::error::{Error, Result};

/// Real values on every node of a grid. A value of `f64::INFINITY` stands for
/// the extended value `+∞` and is only meaningful for `V₊` and masks.
///
/// Norms are cell-measure weighted: `‖f‖₂² = Σ h^d f²`, `‖f‖₁ = Σ h^d |f|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(GridFunction { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Grid, f: impl FnMut(Point) -> f64) -> Self {
        let values = grid.points().map(f).collect();
        GridFunction { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        GridFunction { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        GridFunction { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn indicator(set: &NodeSet) -> Self {
        let values = set.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        GridFunction { grid: set.grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Fails on NaN entries.
    pub fn check_defined(&self) -> Result<()> {
        match self.values.iter().position(|v| v.is_nan()) {
            Some(i) => Err(Error::InvalidPotential(format!("undefined value at node {i}"))),
            None => Ok(()),
        }
    }

    pub fn norm_l1(&self) -> f64 {
        self.grid.cell_measure() * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.cell_measure() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Weighted inner product.
    pub fn dot(&self, other: &GridFunction) -> f64 {
        self.grid.cell_measure()
            * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A subset of the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    grid: Grid,
    mask: Vec<bool>,
}

impl NodeSet {
    pub fn empty(grid: &Grid) -> Self {
        NodeSet { grid: grid.clone(), mask: vec![false; grid.len()] }
    }

    pub fn full(grid: &Grid) -> Self {
        NodeSet { grid: grid.clone(), mask: vec![true; grid.len()] }
    }

    pub fn from_mask(grid: &Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: mask.len() });
        }
        Ok(NodeSet { grid: grid.clone(), mask })
    }

    pub fn from_predicate(grid: &Grid, pred: impl FnMut(Point) -> bool) -> Self {
        NodeSet { grid: grid.clone(), mask: grid.points().map(pred).collect() }
    }

    pub fn from_indices(grid: &Grid, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = NodeSet::empty(grid);
        for i in indices {
            set.mask[i] = true;
        }
        set
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, node: usize) -> bool {
        self.mask[node]
    }

    pub fn insert(&mut self, node: usize) {
        self.mask[node] = true;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Lebesgue measure of the set, `|E| h^d`.
    pub fn volume(&self) -> f64 {
        self.len() as f64 * self.grid.cell_measure()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> NodeSet {
        NodeSet { grid: self.grid.clone(), mask: self.mask.iter().map(|b| !b).collect() }
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    fn zip_with(&self, other: &NodeSet, f: impl Fn(bool, bool) -> bool) -> NodeSet {
        debug_assert_eq!(self.grid, other.grid);
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| f(a, b)).collect();
        NodeSet { grid: self.grid.clone(), mask }
    }
}
