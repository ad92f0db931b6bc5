//! `Av^λ_{G_n}(μ)` for the weighted comb with `G_n = {|x| > n}`. Increasing
//! values are the computable sign of a discrete spectrum.

use spectra_lab::criteria::av_lambda;
use spectra_lab::lattice::{assemble_dirichlet_laplacian, build_grid, DiscreteMeasure, GridSpec, NodeSet};

fn main() -> spectra_lab::Result<()> {
    let lambda = 4.0;
    println!("{:>3} {:>10} {:>12} {:>12}", "n", "Av", "dual", "gap");
    for n in [5.0, 10.0, 15.0, 20.0] {
        let grid = build_grid(&GridSpec::centered_box(1, 2.0 * n, 0.05))?;
        let mu = DiscreteMeasure::comb(&grid, 1.0, |k| k.unsigned_abs() as f64)?;
        let g = NodeSet::from_predicate(&grid, |p| p[0].abs() > n);
        let res = av_lambda(&mu, &g, lambda, &assemble_dirichlet_laplacian(&grid))?;
        println!("{n:>3} {:>10.5} {:>12.5} {:>12.1e}", res.value(), res.dual_lower, res.relative_gap());
    }
    Ok(())
}
