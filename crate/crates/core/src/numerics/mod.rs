//! Dense and sparse kernels shared by the solvers.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Cholesky as SparseCholesky;
use faer::sparse::SparseColMat;
use faer::{Mat, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{CsrMatrix, SymmetricOperator};

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn sym_eig(m: MatRef<'_, f64>) -> (Vec<f64>, Mat<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], Mat::zeros(0, 0));
    }
    let evd = m.selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.read(a).total_cmp(&s.read(b)));
    let vals = order.iter().map(|&i| s.read(i)).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u.read(i, order[j]));
    (vals, vecs)
}

/// Eigenvalues only, sorted ascending.
pub fn sym_eigvals(m: MatRef<'_, f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return vec![];
    }
    let mut v = m.selfadjoint_eigenvalues(Side::Lower);
    v.sort_by(f64::total_cmp);
    v
}

/// Copies the strictly upper triangle onto the lower one after averaging,
/// so the result is bitwise symmetric.
pub fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gram–Schmidt of `v` against the columns of `basis` (two passes).
/// Returns the norm of `v` after projection.
pub fn orthogonalize(basis: &[Vec<f64>], v: &mut [f64]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
    norm(v)
}

pub fn csr_to_faer(m: &CsrMatrix, shift: f64) -> SparseColMat<usize, f64> {
    let mut t = Vec::with_capacity(m.nnz() + m.dim());
    for i in 0..m.dim() {
        let mut has_diag = false;
        for (j, v) in m.row(i) {
            if i == j {
                has_diag = true;
                t.push((i, j, v - shift));
            } else {
                t.push((i, j, v));
            }
        }
        if !has_diag {
            t.push((i, i, -shift));
        }
    }
    SparseColMat::try_new_from_triplets(m.dim(), m.dim(), &t).expect("valid triplets")
}

/// Cholesky factorization of `A − σI`, dense or sparse depending on storage.
pub enum SpdFactor {
    Dense(faer::linalg::solvers::Cholesky<f64>),
    Sparse(SparseCholesky<usize, f64>),
}

impl SpdFactor {
    /// `None` when `A − σI` is not positive definite.
    pub fn new(a: &SymmetricOperator, sigma: f64) -> Option<SpdFactor> {
        match a.csr() {
            Some(m) => csr_to_faer(m, sigma).sp_cholesky(Side::Lower).ok().map(SpdFactor::Sparse),
            None => {
                let mut d = a.to_dense();
                for i in 0..d.nrows() {
                    d[(i, i)] -= sigma;
                }
                d.cholesky(Side::Lower).ok().map(SpdFactor::Dense)
            }
        }
    }

    pub fn solve_in_place(&self, rhs: faer::MatMut<'_, f64>) {
        match self {
            SpdFactor::Dense(c) => c.solve_in_place(rhs),
            SpdFactor::Sparse(c) => c.solve_in_place(rhs),
        }
    }

    pub fn solve_vec(&self, b: &mut [f64]) {
        let n = b.len();
        let mut m = Mat::from_fn(n, 1, |i, _| b[i]);
        self.solve_in_place(m.as_mut());
        for (i, v) in b.iter_mut().enumerate() {
            *v = m[(i, 0)];
        }
    }
}

/// Gershgorin lower bound `min_i (a_ii − Σ_{j≠i} |a_ij|)`.
pub fn gershgorin_lower(a: &SymmetricOperator) -> f64 {
    match a.csr() {
        Some(m) => (0..m.dim())
            .map(|i| {
                let mut d = 0.0;
                let mut off = 0.0;
                for (j, v) in m.row(i) {
                    if i == j {
                        d += v;
                    } else {
                        off += v.abs();
                    }
                }
                d - off
            })
            .fold(f64::INFINITY, f64::min),
        None => {
            let d = a.to_dense();
            (0..d.nrows())
                .map(|i| d[(i, i)] - (0..d.ncols()).filter(|&j| j != i).map(|j| d[(i, j)].abs()).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Upper bound on `‖A‖₂` by the maximal absolute row sum.
pub fn norm_bound(a: &SymmetricOperator) -> f64 {
    match a.csr() {
        Some(m) => (0..m.dim()).map(|i| m.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max),
        None => {
            let d = a.to_dense();
            (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| d[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_is_sorted_and_reconstructs() {
        let m = Mat::from_fn(4, 4, |i, j| if i == j { [3.0, -1.0, 2.0, 0.5][i] } else { 0.1 });
        let (vals, vecs) = sym_eig(m.as_ref());
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let rec = &vecs * Mat::from_fn(4, 4, |i, j| if i == j { vals[i] } else { 0.0 }) * vecs.transpose();
        assert!((&rec - &m).norm_l2() < 1e-12);
    }
}
