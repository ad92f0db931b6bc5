//! Unit-window masses of two delta combs. Constant mass keeps `Av` bounded
//! and the spectrum banded; masses `|k|` grow and the spectrum turns discrete.

use spectra_lab::criteria::{ess_spectrum_probe, molchanov_scan, TruncationFamily};
use spectra_lab::lattice::{build_grid, DiscreteMeasure, GridSpec};

fn main() -> spectra_lab::Result<()> {
    let grid = build_grid(&GridSpec::centered_box(1, 20.0, 0.01))?;
    let radii = [20.0, 40.0, 80.0];
    for (name, weight) in [("unit", (|_| 1.0) as fn(i64) -> f64), ("|k|", |k: i64| k.unsigned_abs() as f64)] {
        let mu = DiscreteMeasure::comb(&grid, 1.0, weight)?;
        let prof = molchanov_scan(&mu, 1.0, 0.5)?;
        let tails: Vec<String> = [5.0, 10.0, 15.0].iter().map(|&r| format!("{:?}", prof.min_tail(r))).collect();
        println!("{name} comb: min window mass beyond 5, 10, 15 = {}", tails.join(", "));

        let fam = TruncationFamily::with_measure(1, 0.01, &radii, move |g| DiscreteMeasure::comb(g, 1.0, weight))?;
        let v = &ess_spectrum_probe(&fam, &[5.0])?[0];
        println!("  probe at 5: counts {:?} -> {}", v.counts, v.classification);
    }
    Ok(())
}
