//! Error sequence of a bumped Fubini-Study potential against its a priori bound.

use coulomb_lab::determinantal::{error_bound, error_sequence_beta1};
use coulomb_lab::potentials::Potential;

fn main() -> coulomb_lab::Result<()> {
    let amplitude: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let phi = Potential::fs_bump(amplitude, 0.5, 1.0);
    println!("{:>5} {:>12} {:>12} {:>12}", "N", "eps_N", "N eps_N", "bound");
    for n in [4, 8, 16, 32, 64, 128] {
        let e = error_sequence_beta1(&phi, n)?;
        let b = error_bound(&phi, n)?;
        println!("{n:5} {:12.6} {:12.6} {:12.6}", e.total, n as f64 * e.total, b.bound);
    }
    let flat = error_sequence_beta1(&Potential::fs(), 64)?;
    println!("psi0 itself: eps_64 = {:.2e}", flat.total);
    Ok(())
}
