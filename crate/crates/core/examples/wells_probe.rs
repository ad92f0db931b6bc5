//! `V = x²` except on unit wells around `x = 6k`. The wells escape to
//! infinity and each carries a bound state near `(π/2)²`, so the probe
//! counts keep growing just above that level.

use spectra_lab::criteria::{ess_spectrum_probe, TruncationFamily};

fn well_potential(x: f64) -> f64 {
    let k = (x / 6.0).round();
    if k != 0.0 && (x - 6.0 * k).abs() < 1.0 { 0.0 } else { x * x }
}

fn main() -> spectra_lab::Result<()> {
    let fam = TruncationFamily::schrodinger(1, 0.02, &[20.0, 40.0, 80.0], |p| well_potential(p[0]), |_| 0.0)?;
    for v in ess_spectrum_probe(&fam, &[1.0, 3.0])? {
        println!("L = {}: counts {:?} -> {}", v.threshold, v.counts, v.classification);
    }
    Ok(())
}
