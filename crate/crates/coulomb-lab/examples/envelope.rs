//! Envelope of a few potentials on the sphere grid, checked against closed forms.
//!
//! cargo run --release --example envelope -- 128

use coulomb_lab::equilibrium::{project_envelope, solve_radial, SolverOptions, SphereGrid};
use coulomb_lab::geometry::pt;
use coulomb_lab::potentials::{Charge, Potential};
use std::sync::Arc;
use std::time::Instant;

fn main() -> coulomb_lab::Result<()> {
    let inv_h: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64.0);
    let grid = Arc::new(SphereGrid::new(1.0 / inv_h));
    println!("n_theta = {}, cells = {}", grid.n_theta, grid.len());

    let t = Instant::now();
    let quad = Potential::quad(1.0);
    let res = project_envelope(&quad, &grid, &SolverOptions::default())?;
    let exact = |r: f64| if r <= 1.0 { r * r } else { 2.0 * r.ln() + 1.0 };
    let err = grid
        .nodes()
        .iter()
        .zip(&res.p_phi.values)
        .map(|(z, p)| (p - exact(z.norm())).abs())
        .fold(0.0, f64::max);
    println!(
        "|z|^2: sup error {err:.3e}, F = {:.6}, {:?}, {:.1?}",
        res.free_energy,
        res.residuals,
        t.elapsed()
    );

    let t = Instant::now();
    let annulus = Potential::quad_charge(1.0, &[Charge::new(pt(0.0, 0.0), 0.5)])?;
    let res = project_envelope(&annulus, &grid, &SolverOptions::default())?;
    let (a, b) = res.support_radii();
    println!(
        "annulus: radii ({a:.4}, {b:.4}) vs ({:.4}, {:.4}), F = {:.6} (radial {:.6}), {:.1?}",
        0.5f64.sqrt(),
        1.5f64.sqrt(),
        res.free_energy,
        solve_radial(&annulus, 1e-4)?.free_energy,
        t.elapsed()
    );

    let res = project_envelope(&Potential::fs(), &grid, &SolverOptions::default())?;
    println!("fs: F = {:.6}", res.free_energy);
    Ok(())
}
