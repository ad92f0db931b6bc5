//! `e^{-tH}` on a Gaussian bump, and the kernel norms `‖e^{-tH}‖_{1→2}`
//! and `‖e^{-tH}‖_{2→∞}` as `t` grows.

use spectra_lab::lattice::{assemble_dirichlet_laplacian, build_grid, GridFunction, GridSpec};
use spectra_lab::semigroup::{heat_kernel_norms, HeatSemigroup};

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 6.0, 0.05))?;
    let h = assemble_dirichlet_laplacian(&grid);
    let heat = HeatSemigroup::new(&h)?;
    let bump = GridFunction::from_fn(&grid, |p| (-4.0 * p[0] * p[0]).exp());

    println!("{:>6} {:>12} {:>12} {:>10} {:>12} {:>12}", "t", "||u||_2", "max u", "bound", "c_12", "c_2inf");
    for t in [0.0, 0.1, 0.5, 1.0, 4.0] {
        let out = heat.apply(t, &bump)?;
        let k = heat_kernel_norms(&h, t.max(1e-3))?;
        println!(
            "{t:>6} {:>12.6} {:>12.6} {:>10.1e} {:>12.6} {:>12.6}",
            out.value.norm_l2(),
            out.value.norm_linf(),
            out.error_bound,
            k.c_12,
            k.c_2inf
        );
    }
    // c_12 = c_2inf by duality, both ~ (8 pi t)^{-1/4} for small t
    Ok(())
}
