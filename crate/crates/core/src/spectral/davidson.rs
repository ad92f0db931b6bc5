//! Block Davidson iteration with explicit Rayleigh–Ritz and full
//! reorthogonalization. Corrections are preconditioned by a Cholesky solve
//! with `A − σI` (σ below the spectrum) when a factorization is available,
//! otherwise by the diagonal.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::lattice::SymmetricOperator;
use crate::numerics::{gershgorin_lower, norm_bound, random_vector, seeded, sym_eig, symmetrize, SpdFactor};

pub(crate) struct DavidsonOptions {
    pub max_iterations: usize,
    pub seed: u64,
    pub shift_invert: bool,
}

enum Preconditioner {
    Factor(SpdFactor),
    Diagonal(Vec<f64>),
}

impl Preconditioner {
    fn build(a: &SymmetricOperator, shift_invert: bool) -> Self {
        if shift_invert {
            let g = gershgorin_lower(a);
            let sigma = g - 1.0f64.max(1e-3 * g.abs());
            if let Some(f) = SpdFactor::new(a, sigma) {
                return Preconditioner::Factor(f);
            }
        }
        Preconditioner::Diagonal(a.diagonal())
    }

    fn apply(&self, block: &mut Mat<f64>, thetas: &[f64]) {
        match self {
            Preconditioner::Factor(f) => f.solve_in_place(block.as_mut()),
            Preconditioner::Diagonal(d) => {
                for (j, &theta) in thetas.iter().enumerate() {
                    for (i, &di) in d.iter().enumerate() {
                        let floor = 1e-8 * di.abs().max(1.0);
                        let mut den = di - theta;
                        if den.abs() < floor {
                            den = floor;
                        }
                        block[(i, j)] /= den;
                    }
                }
            }
        }
    }
}

/// Orthonormal basis `V` with `AV` kept alongside.
struct Basis {
    v: Mat<f64>,
    av: Mat<f64>,
}

impl Basis {
    fn new(n: usize) -> Self {
        Basis { v: Mat::zeros(n, 0), av: Mat::zeros(n, 0) }
    }

    fn len(&self) -> usize {
        self.v.ncols()
    }

    /// Orthogonalizes the columns of `block` against the basis and each
    /// other, drops dependent ones and appends the rest.
    fn extend(&mut self, a: &SymmetricOperator, mut block: Mat<f64>) {
        let n = self.v.nrows();
        for j in 0..block.ncols() {
            let s = block.col_as_slice(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            if s > 0.0 && s.is_finite() {
                for i in 0..n {
                    block[(i, j)] /= s;
                }
            }
        }
        for _ in 0..2 {
            if self.len() > 0 {
                let c = self.v.transpose() * &block;
                block -= &self.v * &c;
            }
        }
        let mut kept: Vec<Vec<f64>> = Vec::new();
        for j in 0..block.ncols() {
            let mut x = block.col_as_slice(j).to_vec();
            if !x.iter().all(|v| v.is_finite()) {
                continue;
            }
            for _ in 0..2 {
                for q in &kept {
                    let c: f64 = q.iter().zip(&x).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(q).for_each(|(xi, qi)| *xi -= c * qi);
                }
                if self.len() > 0 {
                    let col = Mat::from_fn(n, 1, |i, _| x[i]);
                    let c = self.v.transpose() * &col;
                    let p = &self.v * &c;
                    x.iter_mut().enumerate().for_each(|(i, xi)| *xi -= p[(i, 0)]);
                }
            }
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nx < 1e-8 || self.len() + kept.len() >= n {
                continue;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            kept.push(x);
        }
        if kept.is_empty() {
            return;
        }
        let m = self.len();
        let add = kept.len();
        let mut v = Mat::zeros(n, m + add);
        let mut av = Mat::zeros(n, m + add);
        v.as_mut().subcols_mut(0, m).copy_from(self.v.as_ref());
        av.as_mut().subcols_mut(0, m).copy_from(self.av.as_ref());
        for (j, x) in kept.iter().enumerate() {
            let ax = a.apply(x);
            for i in 0..n {
                v[(i, m + j)] = x[i];
                av[(i, m + j)] = ax[i];
            }
        }
        self.v = v;
        self.av = av;
    }

    fn reset_to(&mut self, a: &SymmetricOperator, block: Mat<f64>) {
        let n = self.v.nrows();
        *self = Basis::new(n);
        self.extend(a, block);
    }
}

fn columns(m: MatRef<'_, f64>, count: usize) -> Mat<f64> {
    m.subcols(0, count).to_owned()
}

/// Lowest `k` eigenpairs (Euclidean-orthonormal vectors).
pub(crate) fn lowest_pairs(
    a: &SymmetricOperator,
    k: usize,
    tol: f64,
    opts: &DavidsonOptions,
) -> Result<(Vec<f64>, Mat<f64>, Vec<f64>)> {
    let n = a.dim();
    let nb = (k + (k / 4).max(4)).min(n);
    let max_basis = (3 * nb).max(nb + 40).min(n);
    let tol = tol.max(1e-14 * norm_bound(a));
    let pre = Preconditioner::build(a, opts.shift_invert);
    let mut rng = seeded(opts.seed);

    let mut basis = Basis::new(n);
    let mut start = Mat::from_fn(n, nb, |_, _| 0.0);
    for j in 0..nb {
        let r = random_vector(n, &mut rng);
        for i in 0..n {
            start[(i, j)] = r[i];
        }
    }
    pre.apply(&mut start, &vec![0.0; nb]);
    basis.extend(a, start);

    let mut best = vec![f64::INFINITY; k];
    for _ in 0..opts.max_iterations {
        let m = basis.len();
        let mut h = basis.v.transpose() * &basis.av;
        symmetrize(&mut h);
        let (theta, y) = sym_eig(h.as_ref());
        let want = nb.min(m);
        let yw = columns(y.as_ref(), want);
        let x = &basis.v * &yw;
        let ax = &basis.av * &yw;
        let mut resid = ax.clone();
        let mut rnorm = vec![0.0; want];
        for c in 0..want {
            let mut s = 0.0;
            for i in 0..n {
                let r = ax[(i, c)] - theta[c] * x[(i, c)];
                resid[(i, c)] = r;
                s += r * r;
            }
            rnorm[c] = s.sqrt();
        }
        for i in 0..k.min(want) {
            best[i] = rnorm[i];
        }
        if want >= k && rnorm[..k].iter().all(|&r| r <= tol) {
            return Ok((theta[..k].to_vec(), columns(x.as_ref(), k), rnorm[..k].to_vec()));
        }
        let pending: Vec<usize> = (0..want).filter(|&c| rnorm[c] > tol).collect();
        if m + pending.len() > max_basis {
            basis.reset_to(a, x);
        }
        let mut corr = Mat::from_fn(n, pending.len(), |i, j| resid[(i, pending[j])]);
        let th: Vec<f64> = pending.iter().map(|&c| theta[c]).collect();
        pre.apply(&mut corr, &th);
        let before = basis.len();
        basis.extend(a, corr);
        if basis.len() == before {
            let extra = nb.min(n - basis.len());
            if extra == 0 {
                break;
            }
            let mut r = Mat::zeros(n, extra);
            for j in 0..extra {
                let v = random_vector(n, &mut rng);
                for i in 0..n {
                    r[(i, j)] = v[i];
                }
            }
            basis.extend(a, r);
            if basis.len() == before {
                break;
            }
        }
    }
    Err(Error::NotConverged { residuals: best })
}
