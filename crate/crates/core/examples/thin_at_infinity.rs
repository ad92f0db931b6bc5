//! `V = (xy)²` in the plane: not coercive, yet its sublevel sets thin out
//! along the axes, so unit-cube norms of `1_{V<s}` decay away from the origin.
//! Ball integrals of `(V + 1)^{-1}` show the same from the potential side.

use spectra_lab::criteria::{benci_fortunato_scan, set_cube_profile, sublevel_set};
use spectra_lab::lattice::{build_grid, GridFunction, GridSpec};

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(2, 8.0, 0.05))?;
    let v = GridFunction::from_fn(&grid, |p| (p[0] * p[1]).powi(2));
    for s in [1.0, 4.0] {
        let prof = set_cube_profile(&sublevel_set(&v, s)?, 1.0)?;
        let tails: Vec<String> = [1.0, 3.0, 5.0, 7.0]
            .iter()
            .map(|&r| prof.tail_sup(r).map_or("-".into(), |x| format!("{x:.4}")))
            .collect();
        println!("s = {s}: sup cube norm beyond 1, 3, 5, 7 = {}", tails.join(", "));
    }
    let ben = benci_fortunato_scan(&v, 1.0, 1.0, 1.0)?;
    for r in [2.0, 4.0, 6.0] {
        println!("sup ball integral of (V + 1)^-1 beyond {r}: {:.4}", ben.sup_tail(r).unwrap_or(0.0));
    }
    Ok(())
}
