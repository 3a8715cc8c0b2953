use super::{EquilibriumResult, GridFunction, Residuals, SphereGrid};
use crate::geometry::Point;
use crate::potentials::{outer_radius_bound, GrowthClass, Potential};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Controls for the projected SOR solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Complementarity tolerance, in units of the potential.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor; chosen from the grid size when absent.
    pub omega: Option<f64>,
    /// Solve on coarser grids first and interpolate.
    pub continuation: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_sweeps: 100_000,
            omega: None,
            continuation: true,
        }
    }
}

fn default_omega(n_theta: usize) -> f64 {
    2.0 / (1.0 + PI / n_theta as f64)
}

/// Checks admissibility and that the grid resolves the droplet.
pub fn check_admissible(phi: &Potential, grid: &SphereGrid) -> Result<()> {
    if phi.growth == GrowthClass::Inadmissible {
        return Err(Error::Inadmissible(format!("{} grows slower than log|z|^2", phi.name)));
    }
    if phi.growth == GrowthClass::StrictlySuperLog {
        if let Ok(r) = outer_radius_bound(phi, 1.0) {
            if r > 1.0 && !grid.resolves(r) {
                return Err(Error::Config(format!(
                    "grid with spacing {:.3e} does not resolve droplet radius bound {r:.3}",
                    grid.h
                )));
            }
        }
    }
    Ok(())
}

/// Obstacle `phi - psi_0` at cell centres.
pub fn obstacle(phi: &Potential, grid: &SphereGrid) -> Vec<f64> {
    grid.rings
        .nodes()
        .map(|z: Point| phi.eval(z) - crate::geometry::fs_potential(z))
        .collect()
}

/// Projected SOR for `v <= g`, `A + L v >= 0`, `(g - v)(A + L v) = 0`,
/// started from `v`. Returns the number of sweeps and the final residual.
pub fn psor(grid: &SphereGrid, g: &[f64], v: &mut [f64], opts: &SolverOptions) -> Result<(usize, f64)> {
    let n = grid.len();
    let omega = opts.omega.unwrap_or_else(|| default_omega(grid.n_theta));
    let area = &grid.sphere_area;
    for (vi, gi) in v.iter_mut().zip(g) {
        *vi = vi.min(*gi);
    }
    let mut residual = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        let check = sweep % 16 == 0;
        let mut res: f64 = 0.0;
        for i in 0..n {
            let target = (area[i] + grid.neighbour_sum(v, i)) / grid.diag(i);
            let old = v[i];
            if check {
                res = res.max((g[i] - old).min(target - old).abs());
            }
            v[i] = (old + omega * (target - old)).min(g[i]);
        }
        if check {
            residual = res;
            if !residual.is_finite() {
                break;
            }
            if residual <= opts.tol {
                return Ok((sweep, residual));
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_sweeps,
        residual,
    })
}

/// Envelope `P phi` by projected SOR on the sphere grid.
pub fn project_envelope(phi: &Potential, grid: &Arc<SphereGrid>, opts: &SolverOptions) -> Result<EquilibriumResult> {
    check_admissible(phi, grid)?;
    let v = solve_levels(phi, grid, opts)?;
    let g = obstacle(phi, grid);
    Ok(EquilibriumResult::from_solution(grid.clone(), g, v))
}

fn solve_levels(phi: &Potential, grid: &SphereGrid, opts: &SolverOptions) -> Result<Vec<f64>> {
    let g = obstacle(phi, grid);
    let mut v = match grid.coarser().filter(|_| opts.continuation) {
        Some(coarse) => {
            let loose = SolverOptions {
                tol: opts.tol.max(1e-9) * 4.0,
                ..opts.clone()
            };
            let vc = solve_levels(phi, &coarse, &loose)?;
            grid.prolong(&coarse, &vc)
        }
        None => {
            let m = g.iter().copied().fold(f64::INFINITY, f64::min);
            vec![m; grid.len()]
        }
    };
    psor(grid, &g, &mut v, opts)?;
    Ok(v)
}

impl EquilibriumResult {
    /// Assembles a result from the obstacle `g` and converged `v = P phi - psi_0`.
    pub fn from_solution(grid: Arc<SphereGrid>, g: Vec<f64>, v: Vec<f64>) -> Self {
        let raw = grid.curvature_masses(&v);
        let n = grid.len();
        let coincide: Vec<bool> = (0..n).map(|i| g[i] - v[i] <= 1e-12 * (1.0 + g[i].abs())).collect();
        let masses: Vec<f64> = (0..n)
            .map(|i| if coincide[i] { raw[i].max(0.0) } else { 0.0 })
            .collect();
        let support_mask: Vec<bool> = masses.iter().map(|&m| m > 0.0).collect();
        let mut complementarity: f64 = 0.0;
        for i in 0..n {
            let t = raw[i] * 4.0 * PI / grid.diag(i);
            complementarity = complementarity.max((g[i] - v[i]).min(t).abs());
        }
        let total: f64 = masses.iter().sum();
        let orthogonality = (0..n)
            .map(|i| (g[i] - v[i]) * raw[i])
            .filter(|x| x.is_finite())
            .sum::<f64>()
            .abs();
        let fe = free_energy_from_grid(&grid, &v);
        let residuals = Residuals {
            complementarity,
            mass: (total - 1.0).abs(),
            orthogonality,
        };
        Self::assemble(grid, g, v, masses, support_mask, fe, residuals)
    }

    pub(crate) fn assemble(
        grid: Arc<SphereGrid>,
        g: Vec<f64>,
        v: Vec<f64>,
        masses: Vec<f64>,
        support_mask: Vec<bool>,
        free_energy: f64,
        residuals: Residuals,
    ) -> Self {
        let fs = grid.fs_values();
        let p: Vec<f64> = v.iter().zip(&fs).map(|(a, b)| a + b).collect();
        let area = grid.rings.areas();
        let density: Vec<f64> = masses
            .iter()
            .zip(&area)
            .map(|(m, a)| if a.is_finite() { m / a } else { 0.0 })
            .collect();
        EquilibriumResult {
            p_phi: GridFunction::new(grid.clone(), p),
            density: GridFunction::new(grid.clone(), density),
            support_mask,
            free_energy,
            residuals,
            v: GridFunction::new(grid.clone(), v),
            obstacle: GridFunction::new(grid, g),
            masses,
        }
    }
}

/// `F = 1/2 + int v dmu0 - J(v)` for `v = P phi - psi_0` on the grid.
pub fn free_energy_from_grid(grid: &SphereGrid, v: &[f64]) -> f64 {
    let mean: f64 = v.iter().zip(&grid.sphere_area).map(|(a, b)| a * b).sum::<f64>() / (4.0 * PI);
    0.5 + mean - grid.dirichlet_j(v)
}
