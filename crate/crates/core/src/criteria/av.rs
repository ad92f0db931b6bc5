use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{DiscreteMeasure, GridFunction, NodeSet, SymmetricOperator};
use crate::numerics::{dot, norm, norm_bound, sym_eig};
use crate::spectral::lowest_eigenpairs;
use faer::Mat;

/// Bounds on `inf { μ[u, u] : ‖u‖₂ = 1, E[u] ≤ λ, supp u ⊆ G }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvResult {
    pub lambda: f64,
    #[serde(skip)]
    pub region: NodeSet,
    pub dual_lower: f64,
    /// `∞` if no feasible point was found.
    pub primal_upper: f64,
    #[serde(skip)]
    pub witness: Option<GridFunction>,
    pub beta_star: f64,
    /// Every evaluated `(β, d(β))`.
    pub dual_profile: Vec<(f64, f64)>,
}

impl AvResult {
    /// `primal_upper` is the reported value of `Av`.
    pub fn value(&self) -> f64 {
        self.primal_upper
    }

    pub fn is_infeasible(&self) -> bool {
        self.dual_lower == f64::INFINITY
    }

    /// `(primal − dual) / max(|primal|, tiny)`; zero when both are infinite.
    pub fn relative_gap(&self) -> f64 {
        if self.is_infeasible() {
            return 0.0;
        }
        (self.primal_upper - self.dual_lower) / self.primal_upper.abs().max(1e-300)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AvOptions {
    /// Golden-section stops when the bracket is shorter than this times its right end.
    pub beta_rel_tol: f64,
    pub max_doublings: usize,
    pub max_sections: usize,
}

impl Default for AvOptions {
    fn default() -> Self {
        AvOptions { beta_rel_tol: 1e-12, max_doublings: 200, max_sections: 200 }
    }
}

pub fn av_lambda(mu: &DiscreteMeasure, g: &NodeSet, lambda: f64, a0: &SymmetricOperator) -> Result<AvResult> {
    av_lambda_with(mu, g, lambda, a0, &AvOptions::default())
}

struct Point {
    beta: f64,
    value: f64,
    vector: Vec<f64>,
    energy: f64,
}

/// Lagrangian dual `d(β) = λ_min(M + βA) − βλ` maximized over `β ≥ 0`
/// (concave, so golden-section after a doubling bracket on the slope
/// `E[u(β)] − λ`), and a primal bound from the best feasible point among the
/// eigenvectors and exact two-mode mixtures.
pub fn av_lambda_with(
    mu: &DiscreteMeasure,
    g: &NodeSet,
    lambda: f64,
    a0: &SymmetricOperator,
    opts: &AvOptions,
) -> Result<AvResult> {
    if mu.grid() != a0.grid() || g.grid() != a0.grid() {
        return Err(Error::GridMismatch);
    }
    if g.is_empty() {
        return Err(Error::InvalidArgument("region G is empty".into()));
    }
    if let Some(node) = g.iter().find(|&i| a0.frame().position(i).is_none()) {
        return Err(Error::Support { node });
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    let support = g.difference(mu.infinite_mask());
    let infeasible = |profile| AvResult {
        lambda,
        region: g.clone(),
        dual_lower: f64::INFINITY,
        primal_upper: f64::INFINITY,
        witness: None,
        beta_star: f64::INFINITY,
        dual_profile: profile,
    };
    if support.is_empty() {
        return Ok(infeasible(vec![]));
    }
    let a = a0.compress(&support)?;
    let m: Vec<f64> = {
        let d = mu.form_diagonal();
        a.frame().active().iter().map(|&i| d[i]).collect()
    };
    let w = a.cell_measure();
    let witness_of = |x: &[f64]| a.frame().extend(&x.iter().map(|v| v / w.sqrt()).collect::<Vec<_>>());
    let mform = |x: &[f64]| x.iter().zip(&m).map(|(v, d)| d * v * v).sum::<f64>();

    let (lam0, ground) = lowest(&a)?;
    let scale = lam0.abs().max(1.0);
    if lambda < lam0 - 1e-12 * scale {
        return Ok(infeasible(vec![]));
    }

    // β = 0: minimizers of M are the vectors supported where M is smallest.
    let mmin = m.iter().cloned().fold(f64::INFINITY, f64::min);
    let mmax = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bottom_tol = 1e-14 * mmin.abs().max(1.0);
    let bottom: Vec<usize> = (0..m.len()).filter(|&k| m[k] <= mmin + bottom_tol).collect();
    let bottom_state = if bottom.len() == m.len() {
        Some((lam0, ground.clone()))
    } else {
        let active = a.frame().active();
        let set = NodeSet::from_indices(a.grid(), bottom.iter().map(|&k| active[k]));
        let sub = a.compress(&set)?;
        let (e, v) = lowest(&sub)?;
        let mut x = vec![0.0; m.len()];
        for (&k, val) in bottom.iter().zip(v) {
            x[k] = val;
        }
        Some((e, x))
    };
    if let Some((e, x)) = bottom_state {
        if e <= lambda {
            return Ok(AvResult {
                lambda,
                region: g.clone(),
                dual_lower: mmin,
                primal_upper: mform(&x),
                witness: Some(witness_of(&x)),
                beta_star: 0.0,
                dual_profile: vec![(0.0, mmin)],
            });
        }
    }

    let mut profile = vec![(0.0, mmin)];
    let evaluate = |profile: &mut Vec<(f64, f64)>, beta: f64| -> Result<Point> {
        let op = a.scaled(beta).add_diagonal(&m)?;
        let (theta, x) = lowest(&op)?;
        let energy = a.form_raw(&x);
        let value = theta - beta * lambda;
        profile.push((beta, value));
        Ok(Point { beta, value, vector: x, energy })
    };

    let a_norm = norm_bound(&a).max(1e-300);
    let mut beta = ((mmax - mmin).max(f64::MIN_POSITIVE) / a_norm).max(1e-300);
    let mut lo_beta = 0.0;
    let mut infeasible_side: Option<Point> = None;
    let mut hi = None;
    for _ in 0..opts.max_doublings {
        let p = evaluate(&mut profile, beta)?;
        if p.energy - lambda <= 0.0 {
            hi = Some(p);
            break;
        }
        lo_beta = beta;
        infeasible_side = Some(p);
        beta *= 2.0;
    }
    let Some(hi) = hi else {
        return Err(Error::Bracketing { profile });
    };
    let mut feasible_side = hi;

    // Golden-section search for the maximum of the concave dual on [lo, hi].
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut up) = (lo_beta, feasible_side.beta);
    let mut best = Point { beta: feasible_side.beta, value: feasible_side.value, vector: vec![], energy: 0.0 };
    let mut x1 = up - ratio * (up - lo);
    let mut x2 = lo + ratio * (up - lo);
    let mut p1 = evaluate(&mut profile, x1)?;
    let mut p2 = evaluate(&mut profile, x2)?;
    let note = |p: &Point, best: &mut Point, inf: &mut Option<Point>, feas: &mut Point| {
        if p.value > best.value {
            *best = Point { beta: p.beta, value: p.value, vector: p.vector.clone(), energy: p.energy };
        }
        let copy = Point { beta: p.beta, value: p.value, vector: p.vector.clone(), energy: p.energy };
        if p.energy > lambda {
            if inf.as_ref().map_or(true, |q| p.beta > q.beta) {
                *inf = Some(copy);
            }
        } else if p.beta < feas.beta {
            *feas = copy;
        }
    };
    note(&p1, &mut best, &mut infeasible_side, &mut feasible_side);
    note(&p2, &mut best, &mut infeasible_side, &mut feasible_side);
    for _ in 0..opts.max_sections {
        if up - lo <= opts.beta_rel_tol * up {
            break;
        }
        if p1.value < p2.value {
            lo = x1;
            x1 = x2;
            p1 = p2;
            x2 = lo + ratio * (up - lo);
            p2 = evaluate(&mut profile, x2)?;
            note(&p2, &mut best, &mut infeasible_side, &mut feasible_side);
        } else {
            up = x2;
            x2 = x1;
            p2 = p1;
            x1 = up - ratio * (up - lo);
            p1 = evaluate(&mut profile, x1)?;
            note(&p1, &mut best, &mut infeasible_side, &mut feasible_side);
        }
    }
    let dual_lower = profile.iter().map(|&(_, d)| d).fold(mmin, f64::max);

    let energy = |x: &[f64]| a.form_raw(x);
    let mut candidates: Vec<Vec<f64>> = vec![feasible_side.vector.clone()];
    if let Some(inf) = &infeasible_side {
        candidates.extend(mix(&inf.vector, &feasible_side.vector, &m, &a, lambda));
        candidates.extend(mix(&inf.vector, &ground, &m, &a, lambda));
    }
    if !best.vector.is_empty() {
        candidates.extend(mix(&best.vector, &ground, &m, &a, lambda));
    }
    candidates.push(ground.clone());
    let feasible_tol = 1e-12 * a_norm.max(lambda.abs()).max(1.0);
    let chosen = candidates
        .into_iter()
        .filter(|x| energy(x) <= lambda + feasible_tol)
        .map(|x| (mform(&x), x))
        .min_by(|p, q| p.0.total_cmp(&q.0));
    let (primal_upper, witness) = match chosen {
        Some((v, x)) => (v, Some(witness_of(&x))),
        None => (f64::INFINITY, None),
    };
    Ok(AvResult {
        lambda,
        region: g.clone(),
        dual_lower,
        primal_upper,
        witness,
        beta_star: best.beta,
        dual_profile: profile,
    })
}

/// Lowest eigenpair, Euclidean-unit vector.
fn lowest(op: &SymmetricOperator) -> Result<(f64, Vec<f64>)> {
    let tol = 1e-12 * norm_bound(op).max(1.0);
    let s = lowest_eigenpairs(op, 1, tol)?;
    let v = s.euclidean_vectors();
    Ok((s.eigenvalues()[0], (0..op.dim()).map(|i| v[(i, 0)]).collect()))
}

/// Exact minimizer of `xᵀMx` over unit `x ∈ span{p, q}` with `xᵀAx ≤ λ`;
/// returns every critical candidate (unconstrained minimizers and boundary points).
fn mix(p: &[f64], q: &[f64], m: &[f64], a: &SymmetricOperator, lambda: f64) -> Vec<Vec<f64>> {
    let np = norm(p);
    if np == 0.0 {
        return vec![];
    }
    let e1: Vec<f64> = p.iter().map(|v| v / np).collect();
    let mut e2 = q.to_vec();
    let c = dot(&e1, &e2);
    for (x, y) in e2.iter_mut().zip(&e1) {
        *x -= c * y;
    }
    let n2 = norm(&e2);
    if n2 <= 1e-10 * norm(q) {
        return vec![e1];
    }
    e2.iter_mut().for_each(|v| *v /= n2);
    let basis = [&e1, &e2];
    let ae: Vec<Vec<f64>> = basis.iter().map(|e| a.apply(e)).collect();
    let mut ms = Mat::<f64>::zeros(2, 2);
    let mut as_ = Mat::<f64>::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            ms[(i, j)] = basis[i].iter().zip(basis[j]).zip(m).map(|((x, y), d)| x * y * d).sum();
            as_[(i, j)] = dot(basis[i], &ae[j]);
        }
    }
    as_[(0, 1)] = 0.5 * (as_[(0, 1)] + as_[(1, 0)]);
    as_[(1, 0)] = as_[(0, 1)];
    ms[(0, 1)] = 0.5 * (ms[(0, 1)] + ms[(1, 0)]);
    ms[(1, 0)] = ms[(0, 1)];
    let mut coefs: Vec<[f64; 2]> = Vec::new();
    let (_, mv) = sym_eig(ms.as_ref());
    coefs.push([mv[(0, 0)], mv[(1, 0)]]);
    let mut shifted = as_.clone();
    shifted[(0, 0)] -= lambda;
    shifted[(1, 1)] -= lambda;
    let (nu, r) = sym_eig(shifted.as_ref());
    if nu[0] < 0.0 && nu[1] > 0.0 {
        // In the eigenbasis of A_s − λ: ν₀c₀² + ν₁c₁² = 0 on the unit circle.
        let c0 = (nu[1] / (nu[1] - nu[0])).sqrt();
        let c1 = (-nu[0] / (nu[1] - nu[0])).sqrt();
        for s in [1.0, -1.0] {
            let y = [c0, s * c1];
            coefs.push([r[(0, 0)] * y[0] + r[(0, 1)] * y[1], r[(1, 0)] * y[0] + r[(1, 1)] * y[1]]);
        }
    }
    coefs
        .into_iter()
        .map(|c| {
            let mut x: Vec<f64> = e1.iter().zip(&e2).map(|(u, v)| c[0] * u + c[1] * v).collect();
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble_dirichlet_laplacian, build_grid, GridSpec};

    fn setup() -> (crate::lattice::Grid, SymmetricOperator) {
        let g = build_grid(&GridSpec::centered_box(1, 6.0, 0.05)).unwrap();
        let a = assemble_dirichlet_laplacian(&g);
        (g, a)
    }

    #[test]
    fn zero_and_constant_measures() {
        let (g, a) = setup();
        let region = NodeSet::from_predicate(&g, |p| p[0].abs() > 2.0);
        let r = av_lambda(&DiscreteMeasure::zero(&g), &region, 4.0, &a).unwrap();
        assert_eq!(r.primal_upper, 0.0);
        assert!(r.witness.is_some());
        let r = av_lambda(&DiscreteMeasure::lebesgue(&g, 2.5).unwrap(), &region, 4.0, &a).unwrap();
        assert!((r.primal_upper - 2.5).abs() < 1e-12 && (r.dual_lower - 2.5).abs() < 1e-12);
    }

    #[test]
    fn empty_feasible_set_is_infinite() {
        let (g, a) = setup();
        let region = NodeSet::from_predicate(&g, |p| p[0].abs() > 2.0);
        let r = av_lambda(&DiscreteMeasure::zero(&g), &region, 0.01, &a).unwrap();
        assert!(r.is_infeasible());
        assert_eq!(r.primal_upper, f64::INFINITY);
        assert!(r.witness.is_none());
    }

    #[test]
    fn comb_bounds_and_witness() {
        let (g, a) = setup();
        let mu = DiscreteMeasure::comb(&g, 1.0, |k| k.unsigned_abs() as f64).unwrap();
        let region = NodeSet::from_predicate(&g, |p| p[0].abs() > 2.0);
        let r = av_lambda(&mu, &region, 4.0, &a).unwrap();
        assert!(r.dual_lower <= r.primal_upper + 1e-8);
        assert!(r.relative_gap() < 1e-3, "{} {}", r.dual_lower, r.primal_upper);
        let u = r.witness.as_ref().unwrap();
        assert!((u.norm_l2() - 1.0).abs() < 1e-10);
        assert!(crate::lattice::quadratic_form(&a, u).unwrap() <= 4.0 + 1e-8);
        assert!((mu.form(u) - r.primal_upper).abs() < 1e-8);
        assert!(u.values().iter().enumerate().all(|(i, &v)| v == 0.0 || region.contains(i)));
    }

    #[test]
    fn infinite_mask_is_excluded_from_support() {
        let (g, a) = setup();
        let region = NodeSet::from_predicate(&g, |p| p[0] > 2.0);
        let mask = NodeSet::from_predicate(&g, |p| p[0] > 4.0);
        let mu = DiscreteMeasure::infinite_on(&mask);
        let r = av_lambda(&mu, &region, 20.0, &a).unwrap();
        let u = r.witness.unwrap();
        assert!(mask.iter().all(|i| u.values()[i] == 0.0));
        assert_eq!(r.primal_upper, 0.0);
    }
}
