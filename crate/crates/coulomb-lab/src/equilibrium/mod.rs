//! Envelopes, equilibrium measures and the energy functionals around them.

mod energy;
mod measure;
mod obstacle;
mod radial;
mod sphere_grid;

pub use energy::{
    dirichlet_j, energy_functional_e, entropy, free_energy, free_energy_with, harmonic_extension, log_energy_e0,
    mabuchi, orthogonality_residual, sup_estimate_c0, sup_estimate_rhs, weighted_energy, HarmonicExtension, Reference,
    CURVATURE_TOL, DEFAULT_H,
};
pub use measure::Measure;
pub use obstacle::{check_admissible, free_energy_from_grid, obstacle, project_envelope, psor, SolverOptions};
pub use radial::{solve_radial, RadialEnvelope};
pub use sphere_grid::SphereGrid;

use crate::geometry::Point;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// Cell-centred values on a sphere grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub grid: Arc<SphereGrid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len());
        GridFunction { grid, values }
    }

    pub fn sample(grid: Arc<SphereGrid>, f: impl Fn(Point) -> f64) -> Self {
        let values = grid.sample(f);
        GridFunction { grid, values }
    }

    pub fn interpolate(&self, z: Point) -> f64 {
        self.grid.interpolate(&self.values, z)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Writes `h,R,n` metadata followed by `x,y,value` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "h,R,n")?;
        writeln!(
            w,
            "{:.17e},{:.17e},{}",
            self.grid.h,
            self.grid.outer_radius(),
            self.values.len()
        )?;
        writeln!(w, "x,y,value")?;
        for (z, v) in self.grid.rings.nodes().zip(&self.values) {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", z.re, z.im, v)?;
        }
        Ok(())
    }
}

/// Residuals of a solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub complementarity: f64,
    pub mass: f64,
    pub orthogonality: f64,
}

/// Envelope, equilibrium measure and droplet.
#[derive(Clone, Debug)]
pub struct EquilibriumResult {
    pub p_phi: GridFunction,
    /// Density of `mu_phi` against Lebesgue measure.
    pub density: GridFunction,
    pub support_mask: Vec<bool>,
    pub free_energy: f64,
    pub residuals: Residuals,
    /// `P phi - psi_0`.
    pub v: GridFunction,
    /// `phi - psi_0`.
    pub obstacle: GridFunction,
    /// Cell masses of `mu_phi`.
    pub masses: Vec<f64>,
}

#[derive(Serialize)]
struct Report<'a> {
    free_energy: f64,
    residuals: &'a Residuals,
    h: f64,
    cells: usize,
    droplet_cells: usize,
    support_radii: (f64, f64),
}

impl EquilibriumResult {
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.p_phi.grid
    }

    /// Smallest and largest cell-centre radius in the droplet.
    pub fn support_radii(&self) -> (f64, f64) {
        let rings = &self.grid().rings;
        let ring_of = rings.ring_of();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (k, &b) in self.support_mask.iter().enumerate() {
            if b {
                let r = rings.radii[ring_of[k]];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (lo, hi)
    }

    /// Writes pphi.csv, density.csv, mask.csv and report.json into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.p_phi.write_csv(&dir.join("pphi.csv"))?;
        self.density.write_csv(&dir.join("density.csv"))?;
        let mask = GridFunction::new(
            self.grid().clone(),
            self.support_mask.iter().map(|&b| b as u8 as f64).collect(),
        );
        mask.write_csv(&dir.join("mask.csv"))?;
        let report = Report {
            free_energy: self.free_energy,
            residuals: &self.residuals,
            h: self.grid().h,
            cells: self.masses.len(),
            droplet_cells: self.support_mask.iter().filter(|&&b| b).count(),
            support_radii: self.support_radii(),
        };
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
        Ok(())
    }
}
