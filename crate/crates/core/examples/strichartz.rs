//! `‖h(−Δ + 1)^{-p}‖ / ‖h‖₂` for weights on unit cells. The ratio stays
//! bounded, consistent with the Strichartz-type estimate for `p > d/4`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra_lab::criteria::ResolventPower;
use spectra_lab::lattice::{assemble_dirichlet_laplacian, build_grid, GridFunction, GridSpec};
use spectra_lab::spectral::dense_eigendecomposition;

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 10.0, 0.05))?;
    let s = dense_eigendecomposition(&assemble_dirichlet_laplacian(&grid))?;
    let rp = ResolventPower::new(&s, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut max = 0.0f64;
    for _ in 0..20 {
        let w: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = GridFunction::from_fn(&grid, |p| w[((p[0] + 10.0).floor() as usize).min(19)]);
        max = max.max(rp.ratio(&h)?);
    }
    println!("max ratio over 20 random cell weights: {max:.5}");
    Ok(())
}
