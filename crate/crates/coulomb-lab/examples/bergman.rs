//! Bergman measures at beta = 1 and their distance to the equilibrium measure.

use coulomb_lab::determinantal::{bergman_density, h_minus1_distance};
use coulomb_lab::equilibrium::{Measure, SphereGrid};
use coulomb_lab::geometry::{mu0_density, pt};
use coulomb_lab::potentials::{Convention, Potential};

fn main() -> coulomb_lab::Result<()> {
    // psi0 reproduces mu0 exactly at every N
    let b = bergman_density(&Potential::fs(), 6, Convention::AdjointNPlus1)?;
    for z in [pt(0.0, 0.0), pt(0.7, -0.2), pt(3.0, 4.0)] {
        println!("B_6({z}) = {:.15}  mu0 = {:.15}", b.eval(z), mu0_density(z));
    }

    let grid = SphereGrid::new(1.0 / 64.0);
    let disk = Measure::uniform_disk(&grid, 1.0);
    let quad = Potential::quad(1.0);
    let mut prev: Option<(f64, f64)> = None;
    for n in [8, 16, 32, 64, 128] {
        let bn = bergman_density(&quad, n, Convention::ExteriorNPhi)?;
        let d = h_minus1_distance(&bn.to_measure(&grid), &disk)?;
        let rate = prev.map(|(m, e)| (d / e).ln() / (n as f64 / m).ln());
        println!(
            "N = {n:4}  mass {:.6}  H^-1 distance {d:.4e}  local slope {}",
            bn.total_mass(),
            rate.map_or("-".into(), |r| format!("{r:.3}"))
        );
        prev = Some((n as f64, d));
    }
    Ok(())
}
