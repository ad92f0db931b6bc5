//! Weyl residual `inf ‖(H − λ)u‖` over unit `u` vanishing on `K`. For `−Δ`
//! it is limited by the level spacing of the box left outside `K`, so it
//! shrinks as the box grows; for `−Δ + x²` it grows like `K²`.

use spectra_lab::criteria::weyl_residual;
use spectra_lab::lattice::{assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, GridFunction, GridSpec, Klmn, NodeSet};

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 15.0, 0.05))?;
    let free = assemble_dirichlet_laplacian(&grid);
    let vp = GridFunction::from_fn(&grid, |p| p[0] * p[0]);
    let osc = assemble_schrodinger(&free, &vp, &GridFunction::zeros(&grid), Klmn::Auto)?;
    let lambda = 2.0;
    println!("{:>4} {:>12} {:>12}", "K", "free", "oscillator");
    for k in [0.0, 2.0, 4.0, 6.0] {
        let ball = NodeSet::from_predicate(&grid, |p| p[0].abs() <= k);
        println!("{k:>4} {:>12.6} {:>12.6}", weyl_residual(&free, lambda, &ball)?, weyl_residual(&osc, lambda, &ball)?);
    }
    Ok(())
}
