use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GridFunction, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallIntegral {
    pub x: Point,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenciProfile {
    pub c: f64,
    pub ball_radius: f64,
    pub stride: f64,
    pub balls: Vec<BallIntegral>,
}

impl BenciProfile {
    /// Largest ball integral with center at distance `≥ rho` from the origin.
    pub fn sup_tail(&self, rho: f64) -> Option<f64> {
        self.balls
            .iter()
            .filter(|b| (b.x[0] * b.x[0] + b.x[1] * b.x[1]).sqrt() >= rho)
            .map(|b| b.integral)
            .reduce(f64::max)
    }
}

/// `∫_{B(x, r)} (V₁ + C)^{−1}` by nodal quadrature, for centers on the
/// lattice `stride·Z^d` whose ball lies inside the box. Nodes with `V₁ = ∞`
/// contribute zero.
pub fn benci_fortunato_scan(v1: &GridFunction, c: f64, ball_radius: f64, stride: f64) -> Result<BenciProfile> {
    v1.check_defined()?;
    let grid = v1.grid();
    let d = grid.dim();
    if !(ball_radius > 0.0) || !(stride > 0.0) {
        return Err(Error::InvalidArgument("ball radius and stride must be positive".into()));
    }
    let integrand: Vec<f64> = v1
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v == f64::INFINITY {
                Ok(0.0)
            } else if v + c > 0.0 {
                Ok(1.0 / (v + c))
            } else {
                Err(Error::InvalidPotential(format!("V1 + C = {} <= 0 at node {i}", v + c)))
            }
        })
        .collect::<Result<_>>()?;

    let h = grid.spacing();
    let n = grid.nodes_per_axis();
    let eps = 1e-9 * ball_radius;
    let axis_centers = |a: usize| -> Vec<f64> {
        let j0 = ((grid.lower()[a] + ball_radius - eps) / stride).ceil() as i64;
        let j1 = ((grid.upper()[a] - ball_radius + eps) / stride).floor() as i64;
        (j0..=j1).map(|j| j as f64 * stride).collect()
    };
    let cx = axis_centers(0);
    let cy = if d == 2 { axis_centers(1) } else { vec![0.0] };
    // Index window of nodes with |x_a − c_a| ≤ r.
    let range = |a: usize, center: f64| -> (usize, usize) {
        let t0 = ((center - ball_radius - grid.lower()[a]) / h[a] - 1.0 - 1e-9).ceil().max(0.0) as usize;
        let t1 = (((center + ball_radius - grid.lower()[a]) / h[a] - 1.0 + 1e-9).floor() as i64).min(n[a] as i64 - 1);
        (t0, t1.max(0) as usize)
    };
    let w = grid.cell_measure();
    let r2 = ball_radius * ball_radius * (1.0 + 1e-12);
    let mut balls = Vec::new();
    for &y in &cy {
        for &x in &cx {
            let center = [x, y];
            let (i0, i1) = range(0, x);
            let (j0, j1) = if d == 2 { range(1, y) } else { (0, 0) };
            let mut acc = 0.0;
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let idx = grid.linear_index([i, j]);
                    let p = grid.coord(idx);
                    let dist2: f64 = (0..d).map(|a| (p[a] - center[a]).powi(2)).sum();
                    if dist2 <= r2 {
                        acc += integrand[idx];
                    }
                }
            }
            balls.push(BallIntegral { x: center, integral: w * acc });
        }
    }
    Ok(BenciProfile { c, ball_radius, stride, balls })
}
