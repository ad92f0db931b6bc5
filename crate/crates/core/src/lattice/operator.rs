use std::sync::Arc;

use faer::Mat;

use super::function::{GridFunction, NodeSet};
use super::grid::Grid;
use super::measure::DiscreteMeasure;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Grid plus the list of active nodes an operator acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    grid: Grid,
    active: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl Frame {
    fn new(grid: Grid, active: Vec<usize>) -> Self {
        let mut position = vec![None; grid.len()];
        for (k, &i) in active.iter().enumerate() {
            position[i] = Some(k);
        }
        Frame { grid, active, position }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Grid indices of the active nodes, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn position(&self, node: usize) -> Option<usize> {
        self.position[node]
    }

    pub fn active_set(&self) -> NodeSet {
        NodeSet::from_indices(&self.grid, self.active.iter().copied())
    }

    /// Values on the active nodes; fails if `f` is nonzero elsewhere.
    pub fn restrict(&self, f: &GridFunction) -> Result<Vec<f64>> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        for (i, &v) in f.values().iter().enumerate() {
            if v != 0.0 && self.position[i].is_none() {
                return Err(Error::Support { node: i });
            }
        }
        Ok(self.active.iter().map(|&i| f.values()[i]).collect())
    }

    /// Values on the active nodes, ignoring everything else.
    pub fn sample(&self, f: &GridFunction) -> Result<Vec<f64>> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.active.iter().map(|&i| f.values()[i]).collect())
    }

    /// Extends active-node values by zero.
    pub fn extend(&self, v: &[f64]) -> GridFunction {
        let mut out = vec![0.0; self.grid.len()];
        for (&i, &x) in self.active.iter().zip(v) {
            out[i] = x;
        }
        GridFunction::new(&self.grid, out).expect("frame length matches grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Sparse(CsrMatrix),
    Dense(Mat<f64>),
}

/// Form-bound constants `(q, C_q)` with `V₋[u] ≤ q·base[u] + C_q‖u‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormBoundPair {
    pub q: f64,
    pub c_q: f64,
}

/// Real symmetric matrix over the active nodes of a grid. The matrix acts on
/// nodal values; its quadratic form in the weighted inner product is
/// `h[u] = h^d uᵀAu`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    frame: Arc<Frame>,
    storage: Storage,
    lower_bound: Option<f64>,
    form_bound: Option<FormBoundPair>,
}

impl SymmetricOperator {
    fn sparse(frame: Arc<Frame>, m: CsrMatrix) -> Self {
        SymmetricOperator { frame, storage: Storage::Sparse(m), lower_bound: None, form_bound: None }
    }

    /// Wraps a dense matrix on the active nodes of `frame`. The matrix is
    /// symmetrized so that `(i, j)` and `(j, i)` are bitwise equal.
    pub fn from_dense_on(frame: Arc<Frame>, mut m: Mat<f64>) -> Result<Self> {
        let n = frame.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
        for j in 0..n {
            for i in (j + 1)..n {
                let s = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
        }
        Ok(SymmetricOperator { frame, storage: Storage::Dense(m), lower_bound: None, form_bound: None })
    }

    /// A plain symmetric matrix viewed as an operator on a unit-spacing grid
    /// (cell measure 1, so weighted and Euclidean norms coincide).
    pub fn from_matrix(m: Mat<f64>) -> Result<Self> {
        let n = m.nrows();
        let frame = Arc::new(Frame::new(Grid::unit(n), (0..n).collect()));
        Self::from_dense_on(frame, m)
    }

    pub fn diagonal_matrix(d: &[f64]) -> Self {
        let n = d.len();
        let frame = Arc::new(Frame::new(Grid::unit(n), (0..n).collect()));
        let m = CsrMatrix::from_triplets(n, d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect());
        Self::sparse(frame, m)
    }

    pub fn zero_on(frame: Arc<Frame>) -> Self {
        let n = frame.dim();
        Self::sparse(frame, CsrMatrix::from_triplets(n, vec![]))
    }

    pub fn identity_on(frame: Arc<Frame>) -> Self {
        let n = frame.dim();
        Self::sparse(frame, CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect()))
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn grid(&self) -> &Grid {
        &self.frame.grid
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn cell_measure(&self) -> f64 {
        self.frame.grid.cell_measure()
    }

    /// Known lower bound `γ` of the quadratic form, if any.
    pub fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }

    pub fn with_lower_bound(mut self, gamma: Option<f64>) -> Self {
        self.lower_bound = gamma;
        self
    }

    /// Form-bound constants used when a negative part was subtracted.
    pub fn form_bound(&self) -> Option<FormBoundPair> {
        self.form_bound
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Sparse(m) => m.get(i, j),
            Storage::Dense(m) => m[(i, j)],
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Sparse(m) => m.diagonal(),
            Storage::Dense(m) => (0..m.nrows()).map(|i| m[(i, i)]).collect(),
        }
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        match &self.storage {
            Storage::Sparse(m) => m.matvec(x, y),
            Storage::Dense(m) => {
                let n = m.nrows();
                y[..n].iter_mut().for_each(|v| *v = 0.0);
                for j in 0..n {
                    let xj = x[j];
                    if xj == 0.0 {
                        continue;
                    }
                    let col = m.col_as_slice(j);
                    for (yi, &a) in y.iter_mut().zip(col) {
                        *yi += a * xj;
                    }
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    /// `uᵀAu` on active-node values (unweighted).
    pub fn form_raw(&self, u: &[f64]) -> f64 {
        let au = self.apply(u);
        u.iter().zip(&au).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        match &self.storage {
            Storage::Sparse(m) => m.to_dense(),
            Storage::Dense(m) => m.clone(),
        }
    }

    /// Sparse storage, if the operator has it.
    pub fn csr(&self) -> Option<&CsrMatrix> {
        match &self.storage {
            Storage::Sparse(m) => Some(m),
            Storage::Dense(_) => None,
        }
    }

    pub fn tridiagonal_parts(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        self.csr().and_then(|m| m.tridiagonal_parts())
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        match &self.storage {
            Storage::Sparse(m) => m.is_symmetric(),
            Storage::Dense(m) => (0..m.nrows())
                .all(|i| (0..i).all(|j| m[(i, j)].to_bits() == m[(j, i)].to_bits())),
        }
    }

    /// Frobenius norm of the matrix (the Hilbert–Schmidt norm of the operator).
    pub fn frobenius_norm(&self) -> f64 {
        match &self.storage {
            Storage::Sparse(m) => {
                (0..m.dim()).flat_map(|i| m.row(i).map(|(_, v)| v * v)).sum::<f64>().sqrt()
            }
            Storage::Dense(m) => m.norm_l2(),
        }
    }

    /// Restriction to the active nodes that also lie in `set`; rows and
    /// columns of the other nodes are deleted (Dirichlet condition there).
    pub fn compress(&self, set: &NodeSet) -> Result<SymmetricOperator> {
        if set.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let keep_pos: Vec<usize> = (0..self.dim())
            .filter(|&k| set.contains(self.frame.active[k]))
            .collect();
        let active: Vec<usize> = keep_pos.iter().map(|&k| self.frame.active[k]).collect();
        let frame = Arc::new(Frame::new(self.grid().clone(), active));
        let storage = match &self.storage {
            Storage::Sparse(m) => Storage::Sparse(m.principal_submatrix(&keep_pos)),
            Storage::Dense(m) => {
                Storage::Dense(Mat::from_fn(keep_pos.len(), keep_pos.len(), |i, j| m[(keep_pos[i], keep_pos[j])]))
            }
        };
        // Compression keeps lower bounds: the Rayleigh quotient is taken over a subspace.
        Ok(SymmetricOperator { frame, storage, lower_bound: self.lower_bound, form_bound: None })
    }

    /// `A + diag(d)` on the active nodes.
    pub fn add_diagonal(&self, d: &[f64]) -> Result<SymmetricOperator> {
        if d.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: d.len() });
        }
        let storage = match &self.storage {
            Storage::Sparse(m) => Storage::Sparse(m.add_diagonal(d)),
            Storage::Dense(m) => {
                let mut m = m.clone();
                for (i, &v) in d.iter().enumerate() {
                    m[(i, i)] += v;
                }
                Storage::Dense(m)
            }
        };
        Ok(SymmetricOperator { frame: self.frame.clone(), storage, lower_bound: None, form_bound: None })
    }

    /// `c·A`; a lower bound scales when `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> SymmetricOperator {
        let storage = match &self.storage {
            Storage::Sparse(m) => Storage::Sparse(m.scaled(c)),
            Storage::Dense(m) => Storage::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| c * m[(i, j)])),
        };
        let lower_bound = if c >= 0.0 { self.lower_bound.map(|g| c * g) } else { None };
        SymmetricOperator { frame: self.frame.clone(), storage, lower_bound, form_bound: None }
    }

    /// `A²` on the same nodes.
    pub fn squared(&self) -> SymmetricOperator {
        let storage = match &self.storage {
            Storage::Sparse(m) => Storage::Sparse(m.gram()),
            Storage::Dense(m) => {
                let mut sq = m * m;
                crate::numerics::symmetrize(&mut sq);
                Storage::Dense(sq)
            }
        };
        SymmetricOperator { frame: self.frame.clone(), storage, lower_bound: Some(0.0), form_bound: None }
    }

    /// `A + c·I`; shifts the known lower bound by `c`.
    pub fn shifted(&self, c: f64) -> SymmetricOperator {
        let d = vec![c; self.dim()];
        let gamma = self.lower_bound.map(|g| g + c);
        self.add_diagonal(&d).expect("length matches").with_lower_bound(gamma)
    }
}

/// Discrete `−Δ` with Dirichlet boundary conditions: the 3-point (1D) or
/// 5-point (2D) stencil on all grid nodes, `γ = 0`.
///
/// Its form is `h^d uᵀAu = Σ_edges h^{d−2}(uᵢ − uⱼ)²` plus the same terms for
/// edges to the (zero) boundary.
pub fn assemble_dirichlet_laplacian(grid: &Grid) -> SymmetricOperator {
    let n = grid.len();
    let inv_h2: Vec<f64> = grid.spacing().iter().map(|h| 1.0 / (h * h)).collect();
    let diag: f64 = inv_h2.iter().map(|v| 2.0 * v).sum();
    let mut triplets = Vec::with_capacity(n * (1 + 2 * grid.dim()));
    for i in 0..n {
        triplets.push((i, i, diag));
        for (axis, j) in grid.neighbors(i) {
            triplets.push((i, j, -inv_h2[axis]));
        }
    }
    let frame = Arc::new(Frame::new(grid.clone(), (0..n).collect()));
    SymmetricOperator::sparse(frame, CsrMatrix::from_triplets(n, triplets)).with_lower_bound(Some(0.0))
}

/// How the form bound of the negative part is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Klmn {
    /// Scan `C ∈ {0, 1, 2, 4, …, 2¹⁶}` and take the first `C` with `q(C) < 1`.
    Auto,
    /// Caller-supplied constants; they are verified against the operator.
    Given(FormBoundPair),
}

/// The ladder of shifts scanned by [`Klmn::Auto`].
pub fn klmn_ladder() -> impl Iterator<Item = f64> {
    std::iter::once(0.0).chain((0..=16).map(|k| (1u64 << k) as f64))
}

/// `H₀ + V₊ − V₋` in the form sense. Nodes with `V₊ = ∞` leave the domain.
pub fn assemble_schrodinger(
    h0: &SymmetricOperator,
    vplus: &GridFunction,
    vminus: &GridFunction,
    klmn: Klmn,
) -> Result<SymmetricOperator> {
    if vplus.grid() != h0.grid() || vminus.grid() != h0.grid() {
        return Err(Error::GridMismatch);
    }
    vplus.check_defined()?;
    if let Some(i) = vplus.values().iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidPotential(format!("V+ is negative at node {i}")));
    }
    let domain = NodeSet::from_predicate_values(vplus, |v| v < f64::INFINITY);
    let base = h0.compress(&domain)?;
    let vp = base.frame.sample(vplus)?;
    let base = base.add_diagonal(&vp)?.with_lower_bound(h0.lower_bound);
    let vm = base.frame.sample(vminus)?;
    if let Some(k) = vm.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidPotential(format!(
            "V- must be finite and nonnegative, node {} has {}",
            base.frame.active[k], vm[k]
        )));
    }
    subtract_form_small(base, &vm, klmn)
}

/// `H₀ + μ⁺ − μ⁻` in the form sense. Nodes in the infinite mask of `μ⁺`
/// leave the domain.
pub fn add_measure(
    h0: &SymmetricOperator,
    mu_plus: &DiscreteMeasure,
    mu_minus: &DiscreteMeasure,
    klmn: Klmn,
) -> Result<SymmetricOperator> {
    if mu_plus.grid() != h0.grid() || mu_minus.grid() != h0.grid() {
        return Err(Error::GridMismatch);
    }
    if mu_minus.has_infinite_part() {
        return Err(Error::InvalidMeasure("mu- must not carry infinite mass".into()));
    }
    for &node in mu_plus.atoms().keys() {
        if h0.frame.position(node).is_none() {
            return Err(Error::InvalidMeasure(format!("atom of mu+ on inactive node {node}")));
        }
    }
    let base = h0.compress(&mu_plus.infinite_mask().complement())?;
    for &node in mu_minus.atoms().keys() {
        if base.frame.position(node).is_none() {
            return Err(Error::InvalidMeasure(format!("atom of mu- on inactive node {node}")));
        }
    }
    let dp: Vec<f64> = {
        let d = mu_plus.form_diagonal();
        base.frame.active.iter().map(|&i| d[i]).collect()
    };
    let base = base.add_diagonal(&dp)?.with_lower_bound(h0.lower_bound);
    let dm: Vec<f64> = {
        let d = mu_minus.form_diagonal();
        base.frame.active.iter().map(|&i| d[i]).collect()
    };
    subtract_form_small(base, &dm, klmn)
}

fn subtract_form_small(base: SymmetricOperator, minus: &[f64], klmn: Klmn) -> Result<SymmetricOperator> {
    let gamma0 = base.lower_bound;
    let pair = if minus.iter().all(|&v| v == 0.0) {
        FormBoundPair { q: 0.0, c_q: 0.0 }
    } else {
        match klmn {
            Klmn::Auto => auto_form_bound(&base, minus)?,
            Klmn::Given(pair) => {
                verify_form_bound(&base, minus, pair)?;
                pair
            }
        }
    };
    let neg: Vec<f64> = minus.iter().map(|v| -v).collect();
    let mut out = base.add_diagonal(&neg)?;
    out.lower_bound = gamma0.map(|g| (1.0 - pair.q) * g - pair.c_q);
    out.form_bound = Some(pair);
    Ok(out)
}

fn auto_form_bound(base: &SymmetricOperator, minus: &[f64]) -> Result<FormBoundPair> {
    let mut best_q = f64::INFINITY;
    let mut best_c = 0.0;
    for c in klmn_ladder() {
        let q = match crate::criteria::form_bound::pencil_max(minus, base, c) {
            Ok(est) => est.q,
            Err(Error::NotPositiveDefinite { .. }) => continue,
            Err(e) => return Err(e),
        };
        if q < 1.0 {
            return Ok(FormBoundPair { q, c_q: q * c });
        }
        if q < best_q {
            best_q = q;
            best_c = c;
        }
    }
    Err(Error::KlmnViolation { q: best_q, c: best_c })
}

fn verify_form_bound(base: &SymmetricOperator, minus: &[f64], pair: FormBoundPair) -> Result<()> {
    let FormBoundPair { q, c_q } = pair;
    if !(0.0..1.0).contains(&q) || !c_q.is_finite() {
        return Err(Error::KlmnViolation { q, c: c_q });
    }
    let holds = if q == 0.0 {
        minus.iter().all(|&v| v <= c_q)
    } else {
        let needed = crate::criteria::form_bound::pencil_max(minus, base, c_q / q)?.q;
        needed <= q * (1.0 + 1e-12)
    };
    if holds {
        Ok(())
    } else {
        Err(Error::KlmnViolation { q, c: c_q })
    }
}

impl NodeSet {
    /// Nodes where `pred(f(x))` holds.
    pub fn from_predicate_values(f: &GridFunction, pred: impl Fn(f64) -> bool) -> NodeSet {
        let mask = f.values().iter().map(|&v| pred(v)).collect();
        NodeSet::from_mask(f.grid(), mask).expect("lengths match")
    }
}

/// `h[u] = h^d uᵀAu` for `u` supported on the active nodes.
pub fn quadratic_form(a: &SymmetricOperator, u: &GridFunction) -> Result<f64> {
    let v = a.frame.restrict(u)?;
    Ok(a.cell_measure() * a.form_raw(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::{build_grid, GridSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(r: f64, h: f64) -> Grid {
        build_grid(&GridSpec::centered_box(1, r, h)).unwrap()
    }

    #[test]
    fn laplacian_is_symmetric_and_dirichlet() {
        for grid in [
            line(1.0, 0.1),
            build_grid(&GridSpec::new(&[0.0, 0.0], &[1.0, 2.0], &[6, 9])).unwrap(),
        ] {
            let a = assemble_dirichlet_laplacian(&grid);
            assert!(a.is_exactly_symmetric());
            assert_eq!(a.lower_bound(), Some(0.0));
            let one = GridFunction::constant(&grid, 1.0);
            assert!(quadratic_form(&a, &one).unwrap() > 0.0);
        }
    }

    #[test]
    fn laplacian_form_is_edge_sum() {
        let grid = build_grid(&GridSpec::new(&[0.0, 0.0], &[1.0, 1.0], &[5, 4])).unwrap();
        let a = assemble_dirichlet_laplacian(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = GridFunction::from_fn(&grid, |_| rng.gen_range(-1.0..1.0));
        let w = grid.cell_measure();
        let mut edges = 0.0;
        for i in 0..grid.len() {
            let m = grid.multi_index(i);
            for axis in 0..2 {
                let h = grid.spacing()[axis];
                let ui = u.values()[i];
                let mut right = m;
                right[axis] += 1;
                let uj = if right[axis] < grid.nodes_per_axis()[axis] {
                    u.values()[grid.linear_index(right)]
                } else {
                    0.0
                };
                edges += w / (h * h) * (ui - uj).powi(2);
                if m[axis] == 0 {
                    edges += w / (h * h) * ui * ui;
                }
            }
        }
        assert!((quadratic_form(&a, &u).unwrap() - edges).abs() < 1e-10 * edges);
    }

    #[test]
    fn random_forms_are_nonnegative() {
        let grid = build_grid(&GridSpec::new(&[0.0, 0.0], &[1.0, 1.0], &[8, 8])).unwrap();
        let a = assemble_dirichlet_laplacian(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = GridFunction::from_fn(&grid, |_| rng.gen_range(-1.0..1.0));
            assert!(quadratic_form(&a, &u).unwrap() >= 0.0);
        }
    }

    #[test]
    fn zero_potential_returns_laplacian() {
        let grid = line(2.0, 0.25);
        let h0 = assemble_dirichlet_laplacian(&grid);
        let z = GridFunction::zeros(&grid);
        let h = assemble_schrodinger(&h0, &z, &z, Klmn::Auto).unwrap();
        assert_eq!(h.to_dense(), h0.to_dense());
        assert_eq!(h.form_bound(), Some(FormBoundPair { q: 0.0, c_q: 0.0 }));
        assert_eq!(h.lower_bound(), Some(0.0));
    }

    #[test]
    fn infinite_potential_is_dirichlet_restriction() {
        let grid = line(3.0, 0.1);
        let h0 = assemble_dirichlet_laplacian(&grid);
        let vp = GridFunction::from_fn(&grid, |p| if p[0].abs() > 1.0 + 1e-9 { f64::INFINITY } else { 0.0 });
        let h = assemble_schrodinger(&h0, &vp, &GridFunction::zeros(&grid), Klmn::Auto).unwrap();
        // Nodes at ±1 stay active, so the Dirichlet boundary sits one spacing further out.
        assert_eq!(h.dim(), 21);
        for &i in h.frame().active() {
            assert!(grid.coord(i)[0].abs() <= 1.0 + 1e-9);
        }
        let small = assemble_dirichlet_laplacian(&line(1.1, 0.1));
        assert_eq!(h.to_dense(), small.to_dense());
        let closed = GridFunction::from_fn(&grid, |p| if p[0].abs() > 1.0 - 1e-9 { f64::INFINITY } else { 0.0 });
        let open = assemble_schrodinger(&h0, &closed, &GridFunction::zeros(&grid), Klmn::Auto).unwrap();
        assert_eq!(open.to_dense(), assemble_dirichlet_laplacian(&line(1.0, 0.1)).to_dense());

        let inf = DiscreteMeasure::infinite_on(&NodeSet::from_predicate(&grid, |p| p[0].abs() > 1.0 + 1e-9));
        let hm = add_measure(&h0, &inf, &DiscreteMeasure::zero(&grid), Klmn::Auto).unwrap();
        assert_eq!(hm.to_dense(), h.to_dense());
        assert_eq!(hm.frame().active(), h.frame().active());
    }

    #[test]
    fn negative_vplus_rejected() {
        let grid = line(1.0, 0.25);
        let h0 = assemble_dirichlet_laplacian(&grid);
        let vp = GridFunction::constant(&grid, -1.0);
        assert!(matches!(
            assemble_schrodinger(&h0, &vp, &GridFunction::zeros(&grid), Klmn::Auto),
            Err(Error::InvalidPotential(_))
        ));
    }

    #[test]
    fn atom_raises_one_diagonal_entry() {
        let grid = line(1.0, 0.1);
        let h0 = assemble_dirichlet_laplacian(&grid);
        let mu = DiscreteMeasure::zero(&grid).with_atom(4, 0.3).unwrap();
        let h = add_measure(&h0, &mu, &DiscreteMeasure::zero(&grid), Klmn::Auto).unwrap();
        let w = grid.cell_measure();
        for i in 0..grid.len() {
            let expected = h0.entry(i, i) + if i == 4 { 0.3 / w } else { 0.0 };
            assert!((h.entry(i, i) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn atom_on_inactive_node_rejected() {
        let grid = line(1.0, 0.1);
        let h0 = assemble_dirichlet_laplacian(&grid).compress(&NodeSet::from_indices(&grid, 0..10)).unwrap();
        let mu = DiscreteMeasure::zero(&grid).with_atom(15, 1.0).unwrap();
        assert!(add_measure(&h0, &mu, &DiscreteMeasure::zero(&grid), Klmn::Auto).is_err());
        assert!(add_measure(&h0, &DiscreteMeasure::zero(&grid), &mu, Klmn::Auto).is_err());
    }

    #[test]
    fn klmn_gate_and_given_pairs() {
        let grid = line(5.0, 0.1);
        let h0 = assemble_dirichlet_laplacian(&grid);
        let vp = GridFunction::from_fn(&grid, |p| p[0] * p[0]);
        let half = vp.scaled(0.5);
        let h = assemble_schrodinger(&h0, &vp, &half, Klmn::Auto).unwrap();
        let pair = h.form_bound().unwrap();
        assert!(pair.q < 1.0 && pair.q <= 0.5 + 1e-10);
        assert!(h.lower_bound().unwrap() <= 0.0 + 1e-12);

        let twice = vp.scaled(2.0);
        let mut rejected = false;
        for c in [0.0] {
            let base = assemble_schrodinger(&h0, &vp, &GridFunction::zeros(&grid), Klmn::Auto).unwrap();
            let q = crate::criteria::form_bound::pencil_max(twice.values(), &base, c).unwrap().q;
            rejected = q >= 1.0;
        }
        assert!(rejected);
        // The ladder only tops out at C = 2^16, where the shift dominates V₋ = 2x² ≤ 50.
        assert!(assemble_schrodinger(&h0, &vp, &twice, Klmn::Auto).is_ok());

        let ok = FormBoundPair { q: 0.5, c_q: 0.0 };
        assert!(assemble_schrodinger(&h0, &vp, &half, Klmn::Given(ok)).is_ok());
        let bad = FormBoundPair { q: 0.4, c_q: 0.0 };
        assert!(matches!(
            assemble_schrodinger(&h0, &vp, &half, Klmn::Given(bad)),
            Err(Error::KlmnViolation { .. })
        ));
    }
}
