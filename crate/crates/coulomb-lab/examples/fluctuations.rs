//! Bulk and mesoscopic fluctuations of linear statistics in the Ginibre ensemble.

use coulomb_lab::deviations::{bulk_bump, mesoscopic_statistic, radial_variance_ginibre};
use coulomb_lab::equilibrium::{solve_radial, SphereGrid};
use coulomb_lab::geometry::pt;
use coulomb_lab::potentials::{h1_norm_sq, Potential};
use coulomb_lab::sampling::{ginibre_batch, ginibre_moduli_batch};
use std::sync::Arc;

fn mean_var(y: &[f64]) -> (f64, f64) {
    let k = y.len() as f64;
    let m = y.iter().sum::<f64>() / k;
    (m, y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0))
}

fn main() -> coulomb_lab::Result<()> {
    let u = bulk_bump(pt(0.0, 0.0), 0.6);
    let sigma2 = h1_norm_sq(&u)?;
    println!("limiting variance {sigma2:.5}");
    for n in [50, 100, 200, 400] {
        let y: Vec<f64> = ginibre_moduli_batch(n, 1000, 3)
            .iter()
            .map(|r| r.iter().map(|&x| u.eval(pt(x, 0.0))).sum())
            .collect();
        let (_, var) = mean_var(&y);
        println!(
            "N = {n:4}  sampled {var:.5}  exact {:.5}",
            radial_variance_ginibre(n, &u)?
        );
    }

    // zoom in on a disk of radius 1/2 around z0 = 0.3
    let phi = Potential::quad(1.0);
    let grid = Arc::new(SphereGrid::new(1.0 / 64.0));
    let eq = solve_radial(&phi, 1e-4)?.to_result(&phi, &grid);
    let z0 = pt(0.3, 0.0);
    let v = bulk_bump(z0, 0.4);
    let draws = ginibre_batch(100, 150, 4)?;
    let stats: Vec<f64> = draws
        .iter()
        .map(|c| mesoscopic_statistic(c, &eq, &v, z0, 0.5))
        .collect::<Result<_, _>>()?;
    let (m, var) = mean_var(&stats);
    println!("mesoscopic at scale 1/2: mean {m:.2e}, sd {:.2e}", var.sqrt());
    Ok(())
}
