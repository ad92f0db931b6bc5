//! Lowest eigenvalues of `−u'' + x²u` on a truncated box, against `2k + 1`.

use spectra_lab::lattice::{assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, GridFunction, GridSpec, Klmn};
use spectra_lab::spectral::lowest_eigenpairs;

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 8.0, 0.01))?;
    let v = GridFunction::from_fn(&grid, |p| p[0] * p[0]);
    let h = assemble_schrodinger(&assemble_dirichlet_laplacian(&grid), &v, &GridFunction::zeros(&grid), Klmn::Auto)?;
    let s = lowest_eigenpairs(&h, 8, 1e-10)?;
    println!("{:>3} {:>14} {:>11} {:>10}", "k", "lambda_k", "2k+1", "residual");
    for (k, (&lam, &res)) in s.eigenvalues().iter().zip(s.residuals()).enumerate() {
        println!("{k:>3} {lam:>14.8} {:>11} {res:>10.2e}", 2 * k + 1);
    }
    // O(h²) discretization error
    Ok(())
}
