//! Discrete capacity `inf { E[φ] + ‖φ‖² : φ ≥ 1 on U }` of centered balls,
//! with `E` the Dirichlet form of `−Δ` in the plane.

use spectra_lab::criteria::capacity;
use spectra_lab::lattice::{assemble_dirichlet_laplacian, build_grid, GridSpec, NodeSet};

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(2, 3.0, 0.1))?;
    let a = assemble_dirichlet_laplacian(&grid);
    println!("{:>6} {:>6} {:>12} {:>6} {:>5}", "r", "nodes", "cap", "kkt", "iter");
    for r in [0.25, 0.5, 1.0, 1.5] {
        let u = NodeSet::from_predicate(&grid, |p| p[0].hypot(p[1]) <= r);
        let c = capacity(&u, &a)?;
        println!("{r:>6} {:>6} {:>12.6} {:>6} {:>5}", u.len(), c.cap, c.kkt_ok, c.iterations);
    }
    Ok(())
}
