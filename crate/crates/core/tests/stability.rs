//! Probe-level invariants: verdicts under form-small nonnegative measures,
//! and the location of the essential-spectrum threshold with a form-small `V₋`.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectra_lab::criteria::{
    ess_spectrum_probe, form_bound_estimate, set_cube_profile, sublevel_set, thm_main1_threshold, Classification,
    NegativePart, TruncationFamily,
};
use spectra_lab::lattice::{
    add_measure, assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, DiscreteMeasure, GridFunction, GridSpec,
    Klmn,
};

const H: f64 = 0.1;

/// A bounded bump density `b·1_{|x - x0| < w}`.
#[derive(Debug, Clone, Copy)]
struct Bump {
    height: f64,
    center: f64,
    width: f64,
}

impl Bump {
    fn at(&self, x: f64) -> f64 {
        if (x - self.center).abs() < self.width {
            self.height
        } else {
            0.0
        }
    }
}

fn family(a: f64, radii: &[f64], bump: Option<Bump>) -> TruncationFamily {
    TruncationFamily::new(1, H, radii, move |grid| {
        let lap = assemble_dirichlet_laplacian(grid);
        let vp = GridFunction::from_fn(grid, |p| a * p[0] * p[0]);
        let base = assemble_schrodinger(&lap, &vp, &GridFunction::zeros(grid), Klmn::Auto)?;
        match bump {
            None => Ok(base),
            Some(b) => {
                let mu = DiscreteMeasure::zero(grid).with_density(&GridFunction::from_fn(grid, |p| b.at(p[0])))?;
                add_measure(&base, &mu, &DiscreteMeasure::zero(grid), Klmn::Auto)
            }
        }
    })
    .unwrap()
}

fn conclusive(c: Classification) -> bool {
    c != Classification::Inconclusive
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn form_small_measures_keep_the_verdict(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let confining = r.gen_bool(0.5);
        let (a, radii, lambdas): (f64, Vec<f64>, Vec<f64>) = if confining {
            let a = r.gen_range(0.5..2.0);
            (a, vec![8.0, 10.0, 12.0], (0..3).map(|_| r.gen_range(1.0..12.0)).collect())
        } else {
            (0.0, vec![10.0, 20.0, 40.0], (0..3).map(|_| r.gen_range(0.5..2.0)).collect())
        };
        let bump = Bump { height: r.gen_range(0.0..3.0), center: r.gen_range(-3.0..3.0), width: r.gen_range(0.2..2.0) };

        // μ must be form-small against H on the largest box, at some shift on the ladder.
        let g = build_grid(&GridSpec::centered_box(1, radii[2], H)).unwrap();
        let base = family(a, &radii, None);
        let mu = DiscreteMeasure::zero(&g).with_density(&GridFunction::from_fn(&g, |p| bump.at(p[0]))).unwrap();
        let q = [0.0, 1.0, 4.0, 16.0, 64.0]
            .iter()
            .map(|&c| form_bound_estimate(NegativePart::Measure(&mu), base.operator(2).unwrap(), c).unwrap().q)
            .fold(f64::INFINITY, f64::min);
        prop_assume!(q <= 0.5);

        let plain = ess_spectrum_probe(&base, &lambdas).unwrap();
        let shifted = ess_spectrum_probe(&family(a, &radii, Some(bump)), &lambdas).unwrap();
        for (p, s) in plain.iter().zip(&shifted) {
            if conclusive(p.classification) && conclusive(s.classification) {
                prop_assert_eq!(p.classification, s.classification, "Λ = {}", p.threshold);
            }
            if p.classification == Classification::DiscreteBelow {
                prop_assert_ne!(s.classification, Classification::EssentialSuspected, "Λ = {}", p.threshold);
            }
            if confining {
                prop_assert_ne!(p.classification, Classification::EssentialSuspected);
            }
        }
    }

    #[test]
    fn no_essential_verdict_below_the_threshold(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let radii = [8.0, 10.0, 12.0];
        let well = Bump { height: r.gen_range(0.5..20.0), center: r.gen_range(-1.0..1.0), width: r.gen_range(0.3..1.5) };
        let s = r.gen_range(2.0..20.0);

        // (q, C_q) of V₋ against −Δ + x² on the largest box; γ = 0 is the bottom of −Δ.
        let g = build_grid(&GridSpec::centered_box(1, radii[2], H)).unwrap();
        let free = assemble_dirichlet_laplacian(&g);
        let vm = GridFunction::from_fn(&g, |p| well.at(p[0]));
        let bound = [0.0, 1.0, 4.0, 16.0, 64.0, 256.0]
            .iter()
            .map(|&c| form_bound_estimate(NegativePart::Potential(&vm), &free, c).unwrap())
            .filter(|b| b.q < 1.0)
            .map(|b| thm_main1_threshold(b.q, b.c_q(), 0.0, s).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(bound > 0.5);

        // {x² < s} is bounded, so its cube tail vanishes inside the box.
        let vplus = GridFunction::from_fn(&g, |p| p[0] * p[0]);
        let profile = set_cube_profile(&sublevel_set(&vplus, s).unwrap(), 1.0).unwrap();
        prop_assert_eq!(profile.tail_sup(s.sqrt() + 1.0), Some(0.0));

        let fam = TruncationFamily::schrodinger(1, H, &radii, |p| p[0] * p[0], move |p| well.at(p[0])).unwrap();
        let lambdas: Vec<f64> = (1..=4).map(|i| bound * i as f64 / 4.0).collect();
        for v in ess_spectrum_probe(&fam, &lambdas).unwrap() {
            prop_assert_ne!(v.classification, Classification::EssentialSuspected, "Λ = {} below {}", v.threshold, bound);
        }
    }
}
