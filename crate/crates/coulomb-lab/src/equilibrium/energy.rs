use super::{project_envelope, solve_radial, EquilibriumResult, GridFunction, Measure, SolverOptions, SphereGrid};
use crate::geometry::{fs_potential, sup_neg_g0, GREEN_SHIFT};
use crate::potentials::{h1_norm_sq, Potential, TestFunction};
use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// `E_0(mu) = -1/2 int log|z - w|^2 dmu dmu`.
pub fn log_energy_e0(mu: &Measure) -> Result<f64> {
    if mu.has_atoms() {
        return Err(Error::Atoms);
    }
    let rings = mu.grid()?;
    Ok(-0.5 * rings.log_interaction(&mu.masses, &mu.masses))
}

/// `E_{0, phi + u}(mu)` in the form renormalized by `psi_0`.
pub fn weighted_energy(phi: &Potential, u: &TestFunction, mu: &Measure) -> Result<f64> {
    if mu.has_atoms() {
        return Err(Error::Atoms);
    }
    let rings = mu.grid()?;
    let total: f64 = mu.masses.iter().sum();
    let mut linear = 0.0;
    let mut fs_part = 0.0;
    for (z, &m) in rings.nodes().zip(&mu.masses) {
        if m == 0.0 {
            continue;
        }
        let psi0 = fs_potential(z);
        fs_part += m * psi0;
        linear += m * (phi.eval(z) + u.eval(z) - psi0);
    }
    let value = -0.5 * rings.log_interaction(&mu.masses, &mu.masses) + total * fs_part + linear;
    if value.is_nan() {
        return Err(Error::Divergent("weighted energy".into()));
    }
    Ok(value)
}

/// Resolution used by [`free_energy`] when the potential is not radial.
pub const DEFAULT_H: f64 = 1.0 / 64.0;

/// `F(phi + u)`: radial potentials use the one-dimensional envelope, others the grid solver.
pub fn free_energy(phi: &Potential, u: &TestFunction) -> Result<f64> {
    free_energy_with(phi, u, DEFAULT_H, &SolverOptions::default())
}

pub fn free_energy_with(phi: &Potential, u: &TestFunction, h: f64, opts: &SolverOptions) -> Result<f64> {
    let total = phi.plus_test(u);
    if total.is_radial() {
        return Ok(solve_radial(&total, 1e-4)?.free_energy);
    }
    let grid = Arc::new(SphereGrid::new(h));
    Ok(project_envelope(&total, &grid, opts)?.free_energy)
}

fn curvature(psi: &GridFunction) -> Vec<f64> {
    let grid = &psi.grid;
    let fs = grid.fs_values();
    let w: Vec<f64> = psi.values.iter().zip(&fs).map(|(a, b)| a - b).collect();
    grid.curvature_masses(&w)
}

/// Relative curvature deficit tolerated before a field counts as non-subharmonic.
pub const CURVATURE_TOL: f64 = 1e-4;

/// `E(psi) = 1/2 int (psi - psi0)(dd^c psi + dd^c psi0)`.
pub fn energy_functional_e(psi: &GridFunction, psi0: &GridFunction) -> Result<f64> {
    if !Arc::ptr_eq(&psi.grid, &psi0.grid) {
        return Err(Error::Config("fields live on different grids".into()));
    }
    let (c, c0) = (curvature(psi), curvature(psi0));
    let area = &psi.grid.sphere_area;
    for (k, (&a, &b)) in c.iter().zip(&c0).enumerate() {
        let floor = -CURVATURE_TOL * area[k];
        if a < floor || b < floor {
            return Err(Error::Inadmissible(format!("negative curvature at cell {k}")));
        }
    }
    Ok((0..c.len())
        .map(|k| 0.5 * (psi.values[k] - psi0.values[k]) * (c[k] + c0[k]))
        .sum())
}

/// `J(u) = 1/2 ||u||^2_{H^1}`.
pub fn dirichlet_j(u: &TestFunction) -> Result<f64> {
    Ok(0.5 * h1_norm_sq(u)?)
}

/// Reference measure for [`entropy`].
#[derive(Clone, Copy, Debug)]
pub enum Reference<'a> {
    Lebesgue,
    Measure(&'a Measure),
}

/// Relative entropy `int log(dmu/dref) dmu`.
pub fn entropy(mu: &Measure, reference: Reference<'_>) -> Result<f64> {
    if mu.has_atoms() {
        return Ok(f64::INFINITY);
    }
    let rings = mu.grid()?;
    let mut s = 0.0;
    match reference {
        Reference::Lebesgue => {
            let ring_of = rings.ring_of();
            for (k, &m) in mu.masses.iter().enumerate() {
                if m <= 0.0 {
                    continue;
                }
                let i = ring_of[k];
                let a = rings.area[i];
                if a.is_finite() {
                    s += m * (m / a).ln();
                } else {
                    // cell through infinity: use the mu0 chart
                    let r2 = rings.radii[i] * rings.radii[i];
                    s += m * ((m / rings.mu0_mass[i]).ln() - PI.ln() - 2.0 * r2.ln_1p());
                }
            }
        }
        Reference::Measure(nu) => {
            if nu.has_atoms() || nu.masses.len() != mu.masses.len() {
                return Err(Error::Config("reference must be a density on the same grid".into()));
            }
            for (&m, &r) in mu.masses.iter().zip(&nu.masses) {
                if m <= 0.0 {
                    continue;
                }
                if r <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                s += m * (m / r).ln();
            }
        }
    }
    Ok(s)
}

/// Mabuchi functional `M(mu) = -2 E_0(mu) + D_{dlambda}(mu)`.
pub fn mabuchi(mu: &Measure) -> Result<f64> {
    Ok(-2.0 * log_energy_e0(mu)? + entropy(mu, Reference::Lebesgue)?)
}

/// `|int (phi - P phi) dd^c P phi|` on the result's grid.
pub fn orthogonality_residual(result: &EquilibriumResult, phi: &Potential) -> f64 {
    let grid = &result.p_phi.grid;
    let raw = grid.curvature_masses(&result.v.values);
    grid.rings
        .nodes()
        .zip(result.p_phi.values.iter().zip(&raw))
        .map(|(z, (p, m))| (phi.eval(z) - p) * m)
        .filter(|x| x.is_finite())
        .sum::<f64>()
        .abs()
}

/// Bounded harmonic extension of `u` from the droplet.
#[derive(Clone, Debug)]
pub struct HarmonicExtension {
    pub values: GridFunction,
    /// `(1/4pi) int |grad u^S|^2`.
    pub sigma2: f64,
    pub function: TestFunction,
}

pub fn harmonic_extension(u: &TestFunction, result: &EquilibriumResult) -> Result<HarmonicExtension> {
    let grid = result.p_phi.grid.clone();
    let mask = &result.support_mask;
    if !mask.iter().any(|&b| b) {
        return Err(Error::Config("empty droplet".into()));
    }
    let nodes = grid.nodes();
    let inside: Vec<f64> = nodes
        .iter()
        .zip(mask)
        .filter(|(_, &b)| b)
        .map(|(&z, _)| u.eval(z))
        .collect();
    let mean = inside.iter().sum::<f64>() / inside.len() as f64;
    let mut w: Vec<f64> = nodes
        .iter()
        .zip(mask)
        .map(|(&z, &b)| if b { u.eval(z) } else { mean })
        .collect();
    let free: Vec<usize> = (0..grid.len()).filter(|&i| !mask[i]).collect();
    let omega = 2.0 / (1.0 + PI / grid.n_theta as f64);
    let max_sweeps = 200_000;
    let mut converged = free.is_empty();
    let mut change = 0.0;
    for _ in 0..max_sweeps {
        if converged {
            break;
        }
        change = 0.0f64;
        for &i in &free {
            let target = grid.neighbour_sum(&w, i) / grid.diag(i);
            let d = omega * (target - w[i]);
            w[i] += d;
            change = change.max(d.abs());
        }
        converged = change < 1e-13;
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: max_sweeps,
            residual: change,
        });
    }
    let sigma2 = 2.0 * grid.dirichlet_j(&w);
    let values = GridFunction::new(grid, w);
    let f = values.clone();
    let function = TestFunction::from_fn(&format!("{}^S", u.name), move |z| f.interpolate(z), None);
    Ok(HarmonicExtension {
        values,
        sigma2,
        function,
    })
}

/// Right-hand side `int v dmu + osc(phi_mu) + C_0` of the sup estimate for an
/// `omega_0`-subharmonic `v`, where `mu` is the equilibrium measure of `result`
/// and `phi_mu = P phi - psi_0` its potential.
pub fn sup_estimate_rhs(v: &[f64], result: &EquilibriumResult) -> f64 {
    let integral: f64 = v.iter().zip(&result.masses).map(|(a, m)| a * m).sum();
    let phi_mu = &result.v.values;
    let (lo, hi) = phi_mu
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    integral + (hi - lo) + sup_estimate_c0()
}

/// `sup(-G)` for the Green function normalized to mean zero against `mu0`.
pub fn sup_estimate_c0() -> f64 {
    sup_neg_g0() + GREEN_SHIFT
}
