//! Randomized invariants. Instances are generated from a proptest-drawn seed
//! so each case is a whole random operator, set or measure.

use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectra_lab::criteria::{av_lambda, capacity, form_bound_estimate, weyl_residual, NegativePart};
use spectra_lab::lattice::{
    add_measure, assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, DiscreteMeasure, Grid, GridFunction,
    GridSpec, Klmn, NodeSet, SymmetricOperator,
};
use spectra_lab::runner::format_float;
use spectra_lab::semigroup::{heat_kernel_norms, super_poincare_beta, HeatSemigroup};
use spectra_lab::spectral::{
    dense_eigendecomposition, functional_calculus, lowest_eigenpairs_with, singular_values, spectral_projector,
    EigenOptions, Interval, Method, Multiplier, SpectralData, TIE_TOLERANCE,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A 1D or 2D grid with at most a few hundred nodes and spacing of order 0.3.
fn small_grid(r: &mut ChaCha8Rng) -> Grid {
    if r.gen_bool(0.5) {
        let n = r.gen_range(8..60);
        let len = r.gen_range(0.25..0.45) * (n + 1) as f64;
        build_grid(&GridSpec::new(&[-len / 2.0], &[len / 2.0], &[n])).unwrap()
    } else {
        let (n, m) = (r.gen_range(3..12), r.gen_range(3..12));
        build_grid(&GridSpec::new(&[0.0, 0.0], &[0.3 * (n + 1) as f64, 0.35 * (m + 1) as f64], &[n, m])).unwrap()
    }
}

fn random_potential(g: &Grid, r: &mut ChaCha8Rng, p_inf: f64) -> GridFunction {
    GridFunction::from_fn(g, |_| if r.gen_bool(p_inf) { f64::INFINITY } else { r.gen_range(0.0..5.0) })
}

fn schrodinger(g: &Grid, vplus: &GridFunction) -> SymmetricOperator {
    assemble_schrodinger(&assemble_dirichlet_laplacian(g), vplus, &GridFunction::zeros(g), Klmn::Auto).unwrap()
}

fn random_symmetric(n: usize, r: &mut ChaCha8Rng) -> SymmetricOperator {
    let m = Mat::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    SymmetricOperator::from_matrix(&m + m.transpose()).unwrap()
}

fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

fn has_tie(s: &SpectralData, iv: &Interval) -> bool {
    s.eigenvalues().iter().any(|&l| iv.near_boundary(l, TIE_TOLERANCE))
}

fn random_interval(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Interval {
    let a = r.gen_range(lo..hi);
    let b = r.gen_range(lo..hi);
    Interval::new(a.min(b), a.max(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // lattice

    #[test]
    fn assembled_operators_are_exactly_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let vp = random_potential(&g, &mut r, 0.2);
        let vm = GridFunction::from_fn(&g, |_| r.gen_range(0.0..1.0));
        let a = assemble_schrodinger(&assemble_dirichlet_laplacian(&g), &vp, &vm, Klmn::Auto).unwrap();
        prop_assert!(a.is_exactly_symmetric());
        let mut mu = DiscreteMeasure::lebesgue(&g, r.gen_range(0.0..2.0)).unwrap();
        for &node in a.frame().active() {
            if r.gen_bool(0.1) {
                mu = mu.with_atom(node, r.gen_range(0.0..3.0)).unwrap();
            }
        }
        let b = add_measure(&a, &mu, &DiscreteMeasure::zero(&g), Klmn::Auto).unwrap();
        prop_assert!(b.is_exactly_symmetric());
    }

    #[test]
    fn enlarging_the_infinite_region_raises_eigenvalues(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let vp = random_potential(&g, &mut r, 0.1);
        let masked = GridFunction::from_fn(&g, |_| 0.0);
        let mut more = vp.clone();
        for (v, _) in more.values_mut().iter_mut().zip(masked.values()) {
            if r.gen_bool(0.25) {
                *v = f64::INFINITY;
            }
        }
        let a = schrodinger(&g, &vp);
        let b = schrodinger(&g, &more);
        prop_assume!(b.dim() > 0);
        let (sa, sb) = (dense_eigendecomposition(&a).unwrap(), dense_eigendecomposition(&b).unwrap());
        for k in 0..b.dim() {
            prop_assert!(sb.eigenvalues()[k] >= sa.eigenvalues()[k] - 1e-10, "k = {}", k);
        }
    }

    #[test]
    fn lebesgue_measure_shifts_the_spectrum(seed in any::<u64>(), c in 0.0f64..10.0) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.1));
        prop_assume!(a.dim() > 0);
        let b = add_measure(&a, &DiscreteMeasure::lebesgue(&g, c).unwrap(), &DiscreteMeasure::zero(&g), Klmn::Auto).unwrap();
        let (sa, sb) = (dense_eigendecomposition(&a).unwrap(), dense_eigendecomposition(&b).unwrap());
        for (x, y) in sa.eigenvalues().iter().zip(sb.eigenvalues()) {
            prop_assert!((y - x - c).abs() <= 1e-12, "{} vs {} + {}", y, x, c);
        }
    }

    #[test]
    fn indicator_norm_is_active_volume(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.3));
        let one = a.frame().extend(&vec![1.0; a.dim()]);
        prop_assert!((one.norm_l2().powi(2) - a.frame().active_set().volume()).abs() <= 1e-12 * g.len() as f64);
    }

    // spectral engine

    #[test]
    fn projectors_multiply_like_intervals(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_symmetric(r.gen_range(5..30), &mut r);
        let s = dense_eigendecomposition(&a).unwrap();
        let (i1, i2) = (random_interval(&mut r, -8.0, 8.0), random_interval(&mut r, -8.0, 8.0));
        let both = i1.intersect(&i2);
        prop_assume!(!has_tie(&s, &i1) && !has_tie(&s, &i2) && !has_tie(&s, &both));
        let p1 = spectral_projector(&s, i1).unwrap().operator.to_dense();
        let p2 = spectral_projector(&s, i2).unwrap().operator.to_dense();
        let p12 = spectral_projector(&s, both).unwrap().operator.to_dense();
        prop_assert!(max_abs_diff(&(&p1 * &p2), &p12) <= 1e-10);
        prop_assert!(max_abs_diff(&(&p1 * &p1), &p1) <= 1e-10);
    }

    #[test]
    fn calculus_is_multiplicative(seed in any::<u64>(), t in 0.01f64..1.0) {
        let mut r = rng(seed);
        let a = random_symmetric(30, &mut r);
        let s = dense_eigendecomposition(&a).unwrap();
        let phi = |x: f64| (-t * x).exp();
        let psi = |x: f64| 1.0 / (1.0 + x * x);
        let lhs = functional_calculus(&s, |x| phi(x) * psi(x)).unwrap().to_dense();
        let rhs = functional_calculus(&s, phi).unwrap().to_dense() * functional_calculus(&s, psi).unwrap().to_dense();
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn spectral_cutoff_factors_through_the_semigroup(seed in any::<u64>(), t in 0.05f64..0.5) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.0));
        let s = dense_eigendecomposition(&a).unwrap();
        let top = *s.eigenvalues().last().unwrap();
        let iv = random_interval(&mut r, 0.0, top);
        prop_assume!(!has_tie(&s, &iv));
        let keep: Vec<bool> = (0..a.dim()).map(|_| r.gen_bool(0.4)).collect();
        let b = Mat::from_fn(a.dim(), a.dim(), |i, j| if i == j && keep[i] { 1.0 } else { 0.0 });
        let lhs = &b * spectral_projector(&s, iv).unwrap().operator.to_dense();
        let cut = functional_calculus(&s, |x| if iv.contains(x) { (t * x).exp() } else { 0.0 }).unwrap().to_dense();
        let rhs = &b * functional_calculus(&s, |x| (-t * x).exp()).unwrap().to_dense() * cut;
        // rounding in the product is amplified by the largest factor e^{t sup I}
        let amp = (t * iv.upper).exp() * a.dim() as f64;
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-13 * amp.max(1e3));
    }

    #[test]
    fn semigroup_singular_values_split_at_a_cutoff(seed in any::<u64>(), t in 0.05f64..1.0) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.0));
        let s = dense_eigendecomposition(&a).unwrap();
        let n = r.gen_range(s.eigenvalues()[0]..*s.eigenvalues().last().unwrap());
        let iv = Interval::new(0.0, n);
        prop_assume!(!has_tie(&s, &iv));
        let set = NodeSet::from_predicate(&g, |_| r.gen_bool(0.5));
        let b = Multiplier::Indicator(set.clone());
        let sv_heat = singular_values(&b, &a, |x| (-t * x).exp()).unwrap();
        let sv_cut = singular_values(&b, &a, |x| if iv.contains(x) { 1.0 } else { 0.0 }).unwrap();
        let b_norm = if set.is_empty() { 0.0 } else { 1.0 };
        let tail = s.eigenvalues().iter().filter(|&&x| !iv.contains(x)).map(|&x| (-t * x).exp()).fold(0.0, f64::max);
        for (j, (&h, &c)) in sv_heat.iter().zip(&sv_cut).enumerate() {
            prop_assert!(h <= tail * b_norm + c + 1e-10, "j = {}: {} > {}·{} + {}", j, h, tail, b_norm, c);
        }
    }

    #[test]
    fn iterative_and_dense_lowest_eigenvalues_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.05));
        prop_assume!(a.dim() >= 30);
        let opts = EigenOptions { method: Method::Davidson { shift_invert: true }, seed, ..EigenOptions::default() };
        let it = lowest_eigenpairs_with(&a, 10, 1e-10, &opts).unwrap();
        let dense = dense_eigendecomposition(&a).unwrap();
        for k in 0..10 {
            prop_assert!((it.eigenvalues()[k] - dense.eigenvalues()[k]).abs() <= 1e-8);
        }
    }

    // semigroup

    #[test]
    fn heat_flow_is_a_positive_contraction_semigroup(seed in any::<u64>(), t in 0.0f64..2.0, u in 0.0f64..2.0) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.1));
        prop_assume!(a.dim() > 0);
        let heat = HeatSemigroup::new(&a).unwrap();
        let w = a.cell_measure();
        let l2 = |v: &[f64]| (w * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let mut v: Vec<f64> = (0..a.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let nv = l2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let (tv, _) = heat.apply_values(t, &v).unwrap();
        let (utv, _) = heat.apply_values(u, &tv).unwrap();
        let (sum, _) = heat.apply_values(t + u, &v).unwrap();
        let diff: Vec<f64> = utv.iter().zip(&sum).map(|(p, q)| p - q).collect();
        prop_assert!(l2(&diff) <= 1e-8);
        prop_assert!(l2(&tv) <= 1.0 + 1e-12);
        let pos: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let (tp, _) = heat.apply_values(t, &pos).unwrap();
        prop_assert!(tp.iter().all(|&x| x >= -1e-10));
    }

    #[test]
    fn kernel_norms_are_dual(seed in any::<u64>(), t in 0.01f64..2.0) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.1));
        prop_assume!(a.dim() > 0);
        let k = heat_kernel_norms(&a, t).unwrap();
        prop_assert!((k.c_12 - k.c_2inf).abs() <= 1e-8 * k.c_12.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn super_poincare_certificate_holds(seed in any::<u64>(), lr in -3.0f64..1.0) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.1));
        prop_assume!(a.dim() > 0);
        let sp = super_poincare_beta(&a, lr.exp(), 20, seed).unwrap();
        prop_assert!(sp.beta_observed <= sp.beta_certified + 1e-8);
    }
}

/// Random 1D instance for the `Av` properties: Laplacian plus `V₊` on a box,
/// a measure with density and atoms, and a region `G`.
fn av_instance(seed: u64) -> (Grid, SymmetricOperator, DiscreteMeasure, NodeSet, f64) {
    let mut r = rng(seed);
    let n = r.gen_range(15..60);
    let g = build_grid(&GridSpec::new(&[-4.0], &[4.0], &[n])).unwrap();
    let a0 = schrodinger(&g, &GridFunction::from_fn(&g, |_| if r.gen_bool(0.3) { r.gen_range(0.0..3.0) } else { 0.0 }));
    let mut mu = DiscreteMeasure::zero(&g)
        .with_density(&GridFunction::from_fn(&g, |_| if r.gen_bool(0.5) { r.gen_range(0.0..4.0) } else { 0.0 }))
        .unwrap();
    for node in 0..n {
        if r.gen_bool(0.15) {
            mu = mu.with_atom(node, r.gen_range(0.0..2.0)).unwrap();
        }
    }
    let cut = r.gen_range(0.0..3.0);
    let gset = NodeSet::from_predicate(&g, |p| p[0].abs() > cut || r.gen_bool(0.2));
    let lambda = r.gen_range(0.0..40.0);
    (g, a0, mu, gset, lambda)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn av_weak_duality(seed in any::<u64>()) {
        let (_, a0, mu, gset, lambda) = av_instance(seed);
        prop_assume!(!gset.is_empty());
        let res = av_lambda(&mu, &gset, lambda, &a0).unwrap();
        prop_assert!(res.dual_lower <= res.primal_upper + 1e-8, "{} > {}", res.dual_lower, res.primal_upper);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn av_is_monotone_in_region_and_energy(seed in any::<u64>(), extra in 0.0f64..20.0) {
        let (g, a0, mu, gset, lambda) = av_instance(seed);
        let mut r = rng(seed ^ 1);
        let smaller = gset.intersection(&NodeSet::from_predicate(&g, |_| r.gen_bool(0.7)));
        prop_assume!(!smaller.is_empty());
        let big = av_lambda(&mu, &gset, lambda, &a0).unwrap();
        let small = av_lambda(&mu, &smaller, lambda, &a0).unwrap();
        prop_assert!(small.value() >= big.value() - 1e-8, "G' ⊆ G: {} < {}", small.value(), big.value());
        let more = av_lambda(&mu, &gset, lambda + extra, &a0).unwrap();
        prop_assert!(more.value() <= big.value() + 1e-8, "λ' ≥ λ: {} > {}", more.value(), big.value());
    }

    #[test]
    fn weyl_residual_with_empty_k_is_distance_to_spectrum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.1));
        prop_assume!(a.dim() > 0);
        let s = dense_eigendecomposition(&a).unwrap();
        let lam = r.gen_range(-5.0..s.eigenvalues().last().unwrap() + 5.0);
        let dist = s.eigenvalues().iter().map(|e| (e - lam).abs()).fold(f64::INFINITY, f64::min);
        let res = weyl_residual(&a, lam, &NodeSet::empty(&g)).unwrap();
        prop_assert!((res - dist).abs() <= 1e-8, "{} vs {}", res, dist);
    }

    #[test]
    fn capacity_is_subadditive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let a = schrodinger(&g, &random_potential(&g, &mut r, 0.1));
        let pick = |r: &mut ChaCha8Rng| {
            let nodes: Vec<usize> = a.frame().active().iter().copied().filter(|_| r.gen_bool(0.15)).collect();
            NodeSet::from_indices(&g, nodes)
        };
        let (u1, u2) = (pick(&mut r), pick(&mut r));
        let c1 = capacity(&u1, &a).unwrap().cap;
        let c2 = capacity(&u2, &a).unwrap().cap;
        let c12 = capacity(&u1.union(&u2), &a).unwrap().cap;
        prop_assert!(c12 <= c1 + c2 + 1e-8, "{} > {} + {}", c12, c1, c2);
        prop_assert!(c12 >= c1.max(c2) - 1e-10);
    }

    #[test]
    fn form_bound_decreases_with_the_shift(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = small_grid(&mut r);
        let base = schrodinger(&g, &random_potential(&g, &mut r, 0.0));
        let vm = GridFunction::from_fn(&g, |_| r.gen_range(0.0..10.0));
        let mut last = f64::INFINITY;
        for c in [0.0, 1.0, 4.0, 16.0] {
            let q = form_bound_estimate(NegativePart::Potential(&vm), &base, c).unwrap().q;
            prop_assert!(q <= last + 1e-12);
            last = q;
        }
    }

    // report encoding

    #[test]
    fn float_text_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}
