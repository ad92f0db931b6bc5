//! Lowest eigenpairs of a symmetric tridiagonal matrix: Sturm-sequence
//! bisection for the eigenvalues, inverse iteration for the vectors.

use faer::Mat;

use crate::numerics::{axpy, dot, norm, random_vector, scale, seeded};

pub(crate) struct Tridiagonal<'a> {
    diag: &'a [f64],
    off: &'a [f64],
    norm: f64,
    pivmin: f64,
}

impl<'a> Tridiagonal<'a> {
    pub fn new(diag: &'a [f64], off: &'a [f64]) -> Self {
        let n = diag.len();
        let mut tnorm = 0.0f64;
        let mut emax = 0.0f64;
        for i in 0..n {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            tnorm = tnorm.max(diag[i].abs() + l + r);
            emax = emax.max(l * l);
        }
        Tridiagonal { diag, off, norm: tnorm, pivmin: f64::MIN_POSITIVE * emax.max(1.0) }
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let e2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { e2 / q } else { 0.0 };
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = 2.0 * f64::EPSILON * self.norm + self.pivmin;
        (lo - pad, hi + pad)
    }

    /// Eigenvalues with indices `0..k` (ascending).
    pub fn lowest_values(&self, k: usize) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(k);
        let mut lo = glo;
        for j in 0..k {
            let (mut a, mut b) = (lo, ghi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) + self.pivmin || mid <= a || mid >= b {
                    break;
                }
                if self.sturm_count(mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let v = 0.5 * (a + b);
            out.push(v);
            lo = a;
        }
        out
    }

    /// Eigenvalues in `(−∞, upper]`.
    pub fn values_up_to(&self, upper: f64) -> Vec<f64> {
        let m = self.sturm_count(upper.next_up());
        self.lowest_values(m.min(self.diag.len()))
    }

    /// Lowest `k` eigenpairs; vectors are Euclidean-orthonormal.
    pub fn lowest_pairs(&self, k: usize, tol: f64) -> (Vec<f64>, Mat<f64>, Vec<f64>) {
        let n = self.diag.len();
        let values = self.lowest_values(k);
        let floor = 16.0 * f64::EPSILON * self.norm;
        let cluster = 1e-3 * self.norm;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        let mut last_shift = f64::NEG_INFINITY;
        let mut cluster_start = 0;
        let mut rng = seeded(0x7d1a_90a1);
        for (j, &lam) in values.iter().enumerate() {
            let pert = 10.0 * f64::EPSILON * lam.abs().max(self.norm * f64::EPSILON);
            let shift = if lam - last_shift < pert { last_shift + pert } else { lam };
            last_shift = shift;
            if j > 0 && lam - values[j - 1] > cluster {
                cluster_start = j;
            }
            let lu = ShiftedLu::new(self.diag, self.off, shift, self.norm);
            let mut x = random_vector(n, &mut rng);
            let mut best = (f64::INFINITY, x.clone());
            for _ in 0..6 {
                lu.solve(&mut x);
                for v in &vectors[cluster_start..] {
                    let c = dot(v, &x);
                    axpy(-c, v, &mut x);
                }
                let nx = norm(&x);
                if nx == 0.0 || !nx.is_finite() {
                    x = random_vector(n, &mut rng);
                    continue;
                }
                scale(1.0 / nx, &mut x);
                let r = self.residual(&x, lam);
                if r < best.0 {
                    best = (r, x.clone());
                }
                if r <= tol.max(floor) {
                    break;
                }
            }
            // One more pass keeps the vector orthogonal to the whole cluster.
            let (_, mut x) = best;
            for v in &vectors[cluster_start..] {
                let c = dot(v, &x);
                axpy(-c, v, &mut x);
            }
            let nx = norm(&x);
            scale(1.0 / nx, &mut x);
            residuals.push(self.residual(&x, lam));
            vectors.push(x);
        }
        let mat = Mat::from_fn(n, k, |i, j| vectors[j][i]);
        (values, mat, residuals)
    }

    pub fn residual(&self, x: &[f64], lam: f64) -> f64 {
        let n = self.diag.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut y = (self.diag[i] - lam) * x[i];
            if i > 0 {
                y += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += self.off[i] * x[i + 1];
            }
            acc += y * y;
        }
        acc.sqrt()
    }
}

/// Gaussian elimination with partial pivoting of `T − σI`.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swap: Vec<bool>,
}

impl ShiftedLu {
    fn new(d: &[f64], e: &[f64], sigma: f64, tnorm: f64) -> Self {
        let n = d.len();
        let tiny = f64::EPSILON * tnorm.max(f64::MIN_POSITIVE);
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        let mut swap = vec![false; n.saturating_sub(1)];
        // Remaining row holds (cur_d, cur_r) at columns (i, i+1).
        let mut cur_d = d[0] - sigma;
        let mut cur_r = if n > 1 { e[0] } else { 0.0 };
        for i in 0..n.saturating_sub(1) {
            let sub = e[i];
            let next_d = d[i + 1] - sigma;
            let next_r = if i + 2 < n { e[i + 1] } else { 0.0 };
            if cur_d.abs() >= sub.abs() {
                let piv = if cur_d == 0.0 { tiny } else { cur_d };
                u0[i] = piv;
                u1[i] = cur_r;
                u2[i] = 0.0;
                let m = sub / piv;
                mult[i] = m;
                cur_d = next_d - m * cur_r;
                cur_r = next_r;
            } else {
                swap[i] = true;
                u0[i] = sub;
                u1[i] = next_d;
                u2[i] = next_r;
                let m = cur_d / sub;
                mult[i] = m;
                cur_d = cur_r - m * next_d;
                cur_r = -m * next_r;
            }
        }
        u0[n - 1] = cur_d;
        for v in u0.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        ShiftedLu { u0, u1, u2, mult, swap }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * b[i + 2];
            }
            b[i] = s / self.u0[i];
        }
    }
}
