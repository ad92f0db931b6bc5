//! Potentials, measures and operators described by the config.

use super::config::{CombWeight, ExperimentConfig, MeasureSpec, OperatorConfig, PotentialSpec};
use crate::error::Result;
use crate::lattice::{
    add_measure, assemble_dirichlet_laplacian, assemble_schrodinger, DiscreteMeasure, FormBoundPair, Grid, GridFunction,
    Klmn, NodeSet, Point, SymmetricOperator,
};

fn radius(p: Point) -> f64 {
    p[0].hypot(p[1])
}

impl PotentialSpec {
    /// Value at a point; `None` for tabulated potentials.
    pub fn eval(&self, p: Point) -> Option<f64> {
        Some(match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Polynomial { terms } => {
                terms.iter().map(|t| t[0] * p[0].powi(t[1] as i32) * p[1].powi(t[2] as i32)).sum()
            }
            PotentialSpec::Power { alpha, scale } => scale * radius(p).powf(*alpha),
            PotentialSpec::ProductSquare { scale } => scale * p[0] * p[0] * p[1] * p[1],
            PotentialSpec::Indicator { radius: r, inside, outside, center } => {
                let c = [center.first().copied().unwrap_or(0.0), center.get(1).copied().unwrap_or(0.0)];
                if radius([p[0] - c[0], p[1] - c[1]]) <= *r {
                    *inside
                } else {
                    *outside
                }
            }
            PotentialSpec::Wells { spacing, radius: r, depth, scale } => {
                let k = (p[0] / spacing).round();
                if k >= 1.0 && radius([p[0] - k * spacing, p[1]]) <= *r {
                    *depth
                } else {
                    scale * (p[0] * p[0] + p[1] * p[1])
                }
            }
            PotentialSpec::Tabulated { .. } => return None,
        })
    }

    pub fn on_grid(&self, grid: &Grid) -> Result<GridFunction> {
        match self {
            PotentialSpec::Tabulated { values } => GridFunction::new(grid, values.clone()),
            _ => Ok(GridFunction::from_fn(grid, |p| self.eval(p).unwrap_or(f64::NAN))),
        }
    }
}

impl MeasureSpec {
    pub fn on_grid(&self, grid: &Grid) -> Result<DiscreteMeasure> {
        match *self {
            MeasureSpec::Comb { spacing, weight, strength } => DiscreteMeasure::comb(grid, spacing, |k| match weight {
                CombWeight::Unit => strength,
                CombWeight::AbsIndex => strength * k.unsigned_abs() as f64,
            }),
            MeasureSpec::Lebesgue { density } => DiscreteMeasure::lebesgue(grid, density),
            MeasureSpec::InfiniteOutside { radius: r } => {
                Ok(DiscreteMeasure::infinite_on(&NodeSet::from_predicate(grid, |p| radius(p) > r)))
            }
        }
    }
}

impl OperatorConfig {
    fn klmn(&self) -> Klmn {
        match self.form_bound {
            Some(fb) => Klmn::Given(FormBoundPair { q: fb.q, c_q: fb.c_q }),
            None => Klmn::Auto,
        }
    }

    /// `−Δ + V₊` with the positive measure, before `V₋` is subtracted.
    pub fn positive_part(&self, grid: &Grid) -> Result<SymmetricOperator> {
        let lap = assemble_dirichlet_laplacian(grid);
        let vp = self.potential.on_grid(grid)?;
        let op = assemble_schrodinger(&lap, &vp, &GridFunction::zeros(grid), Klmn::Auto)?;
        match &self.measure {
            Some(m) => add_measure(&op, &m.on_grid(grid)?, &DiscreteMeasure::zero(grid), Klmn::Auto),
            None => Ok(op),
        }
    }

    /// The full operator `−Δ + V₊ + μ − V₋`.
    pub fn assemble(&self, grid: &Grid) -> Result<SymmetricOperator> {
        let base = self.positive_part(grid)?;
        let vminus = self.negative.on_grid(grid)?;
        if vminus.values().iter().all(|&v| v == 0.0) {
            return Ok(base);
        }
        // `assemble_schrodinger` restricts to the already active nodes of the base.
        assemble_schrodinger(&base, &GridFunction::zeros(grid), &vminus, self.klmn())
    }
}

impl ExperimentConfig {
    /// Operator on the configured grid.
    pub fn operator_on(&self, grid: &Grid) -> Result<SymmetricOperator> {
        self.operator.assemble(grid)
    }
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_grid, GridSpec};

    #[test]
    fn families_evaluate() {
        assert_eq!(PotentialSpec::Polynomial { terms: vec![[2.0, 2.0, 1.0]] }.eval([3.0, 0.5]), Some(9.0));
        assert_eq!(PotentialSpec::ProductSquare { scale: 1.0 }.eval([2.0, 3.0]), Some(36.0));
        assert_eq!(PotentialSpec::Power { alpha: 1.0, scale: 2.0 }.eval([3.0, 4.0]), Some(10.0));
        let ind = PotentialSpec::Indicator { radius: 1.0, inside: 0.0, outside: f64::INFINITY, center: vec![] };
        assert_eq!(ind.eval([1.0, 0.0]), Some(0.0));
        assert_eq!(ind.eval([1.0, 0.1]), Some(f64::INFINITY));
        let wells = PotentialSpec::Wells { spacing: 4.0, radius: 0.5, depth: 0.0, scale: 1.0 };
        assert_eq!(wells.eval([8.2, 0.0]), Some(0.0));
        assert_eq!(wells.eval([0.0, 0.0]), Some(0.0));
        assert_eq!(wells.eval([6.0, 0.0]), Some(36.0));
    }

    #[test]
    fn oscillator_assembles_with_and_without_negative_part() {
        let g = build_grid(&GridSpec::centered_box(1, 4.0, 0.1)).unwrap();
        let op = OperatorConfig {
            potential: PotentialSpec::Power { alpha: 2.0, scale: 1.0 },
            ..Default::default()
        };
        let a = op.assemble(&g).unwrap();
        assert_eq!(a.dim(), g.len());
        let with_minus = OperatorConfig { negative: PotentialSpec::Power { alpha: 0.0, scale: 0.5 }, ..op };
        let b = with_minus.assemble(&g).unwrap();
        assert!((a.entry(3, 3) - b.entry(3, 3) - 0.5).abs() < 1e-12);
    }
}
