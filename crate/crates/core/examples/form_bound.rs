//! Form bound of a square well `V₋` against `−u'' + x²`, and the lower end of
//! the region where essential spectrum may sit.

use spectra_lab::criteria::{form_bound_estimate, thm_main1_threshold, NegativePart};
use spectra_lab::lattice::{assemble_dirichlet_laplacian, assemble_schrodinger, build_grid, GridFunction, GridSpec, Klmn};

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 10.0, 0.05))?;
    let vp = GridFunction::from_fn(&grid, |p| p[0] * p[0]);
    let vm = GridFunction::from_fn(&grid, |p| if p[0].abs() <= 1.0 { 20.0 } else { 0.0 });
    let base = assemble_schrodinger(&assemble_dirichlet_laplacian(&grid), &vp, &GridFunction::zeros(&grid), Klmn::Auto)?;
    println!("{:>5} {:>10} {:>10} {:>12}", "C", "q", "C_q", "s=100 edge");
    for c in [0.0, 4.0, 16.0, 64.0, 256.0] {
        let fb = form_bound_estimate(NegativePart::Potential(&vm), &base, c)?;
        let edge = thm_main1_threshold(fb.q, fb.c_q(), 0.0, 100.0).map_or("q >= 1".into(), |t| format!("{t:.4}"));
        println!("{c:>5} {:>10.5} {:>10.4} {edge:>12}", fb.q, fb.c_q());
    }
    Ok(())
}
