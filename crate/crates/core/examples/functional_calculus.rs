//! Spectral projectors and `g(H)` for a small Schrödinger matrix.

use spectra_lab::lattice::{assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, GridFunction, GridSpec, Klmn};
use spectra_lab::spectral::{composition_identity_check, dense_eigendecomposition, functional_calculus, spectral_projector, Interval};

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 5.0, 0.1))?;
    let v = GridFunction::from_fn(&grid, |p| p[0] * p[0]);
    let h = assemble_schrodinger(&assemble_dirichlet_laplacian(&grid), &v, &GridFunction::zeros(&grid), Klmn::Auto)?;
    let s = dense_eigendecomposition(&h)?;

    let p = spectral_projector(&s, Interval::new(0.0, 6.0))?;
    println!("rank of 1_[0,6](H): {}", p.rank);
    let m = p.operator.to_dense();
    println!("||P^2 - P||_F = {:.2e}", (&m * &m - &m).norm_l2());

    let resolvent = functional_calculus(&s, |x| 1.0 / (1.0 + x))?;
    println!("||(1 + H)^-1||_F = {:.6}", resolvent.frobenius_norm());

    // g(H) 1_I = 1_I g(H) 1_I, checked in the eigenbasis
    let err = composition_identity_check(&s, |x| (-x).exp(), Interval::new(2.0, 8.0))?;
    println!("composition identity error {err:.2e}");
    Ok(())
}
