use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GridFunction, NodeSet, SymmetricOperator};
use crate::numerics::{gershgorin_lower, SpdFactor};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub cap: f64,
    #[serde(skip)]
    pub minimizer: GridFunction,
    /// Multipliers nonnegative and the obstacle respected at the returned point.
    pub kkt_ok: bool,
    pub iterations: usize,
    /// Nodes of `U` where the minimizer touches the obstacle.
    pub contact: usize,
}

/// `inf { E[φ] + ‖φ‖² : φ ≥ 1 on U }` over functions on the active nodes of `a`.
pub fn capacity(u: &NodeSet, a: &SymmetricOperator) -> Result<CapacityResult> {
    capacity_with(u, a, 200)
}

/// Primal-dual active set iteration starting from the equality solve
/// `φ = 1` on `U`; for operators obeying a maximum principle the first
/// iterate is already optimal.
pub fn capacity_with(u: &NodeSet, a: &SymmetricOperator, max_iterations: usize) -> Result<CapacityResult> {
    if u.grid() != a.grid() {
        return Err(Error::GridMismatch);
    }
    let frame = a.frame();
    let n = a.dim();
    let mut in_u = vec![false; n];
    for node in u.iter() {
        match frame.position(node) {
            Some(k) => in_u[k] = true,
            None => return Err(Error::Support { node }),
        }
    }
    if !in_u.iter().any(|&b| b) {
        return Ok(CapacityResult { cap: 0.0, minimizer: GridFunction::zeros(a.grid()), kkt_ok: true, iterations: 0, contact: 0 });
    }

    let mut contact = in_u.clone();
    let mut phi = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut iterations = 0;
    let converged = loop {
        if iterations == max_iterations {
            break false;
        }
        iterations += 1;
        phi = solve_with_contact(a, &contact)?;
        a.apply_into(&phi, &mut z);
        for (zi, p) in z.iter_mut().zip(&phi) {
            *zi += p;
        }
        let ztol = 1e-10 * z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut next = contact.clone();
        for k in 0..n {
            if !in_u[k] {
                continue;
            }
            if contact[k] && z[k] < -ztol {
                next[k] = false;
            } else if !contact[k] && phi[k] < 1.0 - 1e-12 {
                next[k] = true;
            }
        }
        if next == contact {
            break true;
        }
        contact = next;
    };
    if !converged {
        return Err(Error::NotConverged { residuals: vec![violation(&in_u, &contact, &phi, &z)] });
    }
    let ztol = 1e-10 * z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let kkt_ok = (0..n).all(|k| {
        if !in_u[k] {
            true
        } else if contact[k] {
            z[k] >= -ztol
        } else {
            phi[k] >= 1.0 - 1e-10
        }
    });
    let w = a.cell_measure();
    let cap = w * (a.form_raw(&phi) + phi.iter().map(|v| v * v).sum::<f64>());
    Ok(CapacityResult {
        cap,
        minimizer: frame.extend(&phi),
        kkt_ok,
        iterations,
        contact: contact.iter().filter(|&&b| b).count(),
    })
}

fn violation(in_u: &[bool], contact: &[bool], phi: &[f64], z: &[f64]) -> f64 {
    (0..phi.len())
        .filter(|&k| in_u[k])
        .map(|k| if contact[k] { (-z[k]).max(0.0) } else { (1.0 - phi[k]).max(0.0) })
        .fold(0.0, f64::max)
}

/// `φ = 1` on `contact`, `(A + I)φ = 0` elsewhere.
fn solve_with_contact(a: &SymmetricOperator, contact: &[bool]) -> Result<Vec<f64>> {
    let n = a.dim();
    let one: Vec<f64> = contact.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
    let free: Vec<usize> = (0..n).filter(|&k| !contact[k]).collect();
    if free.is_empty() {
        return Ok(one);
    }
    let active = a.frame().active();
    let free_set = NodeSet::from_indices(a.grid(), free.iter().map(|&k| active[k]));
    let sub = a.compress(&free_set)?;
    let factor = SpdFactor::new(&sub, -1.0)
        .ok_or_else(|| Error::NotPositiveDefinite { lambda_min: gershgorin_lower(&sub) + 1.0 })?;
    let coupling = a.apply(&one);
    let mut rhs: Vec<f64> = free.iter().map(|&k| -coupling[k]).collect();
    factor.solve_vec(&mut rhs);
    let mut phi = one;
    for (&k, v) in free.iter().zip(rhs) {
        phi[k] = v;
    }
    Ok(phi)
}
