//! Worst-case integration error of spherical-ensemble points in H^s of the sphere.

use coulomb_lab::deviations::{l_max_for, spherical_expected_wce_sq, wce, wce_pairwise};
use coulomb_lab::geometry::HarmonicBasis;
use coulomb_lab::sampling::spherical_batch;

fn main() -> coulomb_lab::Result<()> {
    let s: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2.5);
    println!(
        "{:>5} {:>6} {:>12} {:>12} {:>10}",
        "N", "l_max", "median wce", "rms exact", "N * wce"
    );
    for n in [16, 32, 64, 128, 256] {
        let expected = spherical_expected_wce_sq(n, s);
        let l_max = l_max_for(s, 2e-3 * expected);
        let draws = spherical_batch(n, 21, n as u64)?;
        let mut w = Vec::new();
        if n > l_max {
            let basis = HarmonicBasis::new(l_max);
            for c in &draws {
                w.push(wce(c, s, &basis)?.wce);
            }
        } else {
            for c in &draws {
                w.push(wce_pairwise(c, s, l_max)?.wce);
            }
        }
        w.sort_by(f64::total_cmp);
        let med = w[10];
        println!(
            "{n:5} {l_max:6} {med:12.5e} {:12.5e} {:10.4}",
            expected.sqrt(),
            n as f64 * med
        );
    }
    Ok(())
}
