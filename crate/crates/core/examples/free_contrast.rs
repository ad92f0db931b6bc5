//! The truncation probe on `−Δ` and on `−Δ + x²`: box counts below `Λ`
//! grow without bound in the first case and settle in the second.

use spectra_lab::criteria::{ess_spectrum_probe, TruncationFamily};

fn main() -> spectra_lab::Result<()> {
    let free = TruncationFamily::schrodinger(1, 0.05, &[10.0, 20.0, 40.0], |_| 0.0, |_| 0.0)?;
    let confined = TruncationFamily::schrodinger(1, 0.05, &[6.0, 8.0, 10.0], |p| p[0] * p[0], |_| 0.0)?;
    for (name, fam, lam) in [("free, L = 1", &free, 1.0), ("oscillator, L = 20", &confined, 20.0)] {
        let v = &ess_spectrum_probe(fam, &[lam])?[0];
        println!("{name}: radii {:?} counts {:?} -> {}", v.radii, v.counts, v.classification);
        for d in &v.diagnostics {
            println!("  {d}");
        }
    }
    // free counts are close to R sqrt(L) / pi per half
    Ok(())
}
