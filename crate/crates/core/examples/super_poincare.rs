//! Certified super-Poincaré profile `β(r)` from the kernel norm, against the
//! largest value seen on random trial functions.

use spectra_lab::lattice::{assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, GridFunction, GridSpec, Klmn};
use spectra_lab::semigroup::super_poincare_beta;

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 8.0, 0.05))?;
    let v = GridFunction::from_fn(&grid, |p| p[0] * p[0]);
    let h = assemble_schrodinger(&assemble_dirichlet_laplacian(&grid), &v, &GridFunction::zeros(&grid), Klmn::Auto)?;
    println!("{:>8} {:>10} {:>14} {:>14}", "r", "t", "certified", "observed");
    for (i, r) in [0.01, 0.03, 0.1, 0.3, 1.0].into_iter().enumerate() {
        let sp = super_poincare_beta(&h, r, 40, i as u64)?;
        println!("{r:>8} {:>10.4} {:>14.6e} {:>14.6e}", sp.t, sp.beta_certified, sp.beta_observed);
    }
    Ok(())
}
