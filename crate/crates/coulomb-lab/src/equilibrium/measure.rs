use super::{EquilibriumResult, SphereGrid};
use crate::geometry::{Point, RingGrid};
use crate::{Error, Result};
use std::sync::Arc;

/// A measure given by cell masses on a ring grid plus optional atoms.
#[derive(Clone, Debug)]
pub struct Measure {
    pub rings: Option<Arc<RingGrid>>,
    pub masses: Vec<f64>,
    pub atoms: Vec<(Point, f64)>,
}

impl Measure {
    pub fn on_rings(rings: Arc<RingGrid>, masses: Vec<f64>) -> Self {
        assert_eq!(rings.len(), masses.len());
        Measure {
            rings: Some(rings),
            masses,
            atoms: Vec::new(),
        }
    }

    pub fn atomic(atoms: Vec<(Point, f64)>) -> Self {
        Measure {
            rings: None,
            masses: Vec::new(),
            atoms,
        }
    }

    /// Normalized area measure of the disk `|z| <= radius`, with exact cell fractions.
    pub fn uniform_disk(grid: &SphereGrid, radius: f64) -> Self {
        let rings = &grid.rings;
        let r2 = radius * radius;
        let per_ring: Vec<f64> = (0..rings.n_rings())
            .map(|i| {
                let a = grid.edge_radii[i].min(radius);
                let b = grid.edge_radii[i + 1].min(radius);
                (b * b - a * a) / r2 / rings.n_phi[i] as f64
            })
            .collect();
        Self::on_rings(rings.clone(), rings.expand(&per_ring))
    }

    /// The Fubini–Study measure `mu0`.
    pub fn mu0(grid: &SphereGrid) -> Self {
        Self::on_rings(grid.rings.clone(), grid.rings.mu0_masses())
    }

    /// The equilibrium measure of a solve.
    pub fn from_result(res: &EquilibriumResult) -> Self {
        Self::on_rings(res.p_phi.grid.rings.clone(), res.masses.clone())
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum::<f64>() + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    pub fn has_atoms(&self) -> bool {
        self.atoms.iter().any(|a| a.1 != 0.0)
    }

    /// Push-forward under `z -> c z`.
    pub fn push_forward_dilation(&self, c: f64) -> Self {
        Measure {
            rings: self.rings.as_ref().map(|r| Arc::new(r.dilated(c))),
            masses: self.masses.clone(),
            atoms: self.atoms.iter().map(|&(z, m)| (z * c, m)).collect(),
        }
    }

    /// Density with respect to Lebesgue measure, cell by cell.
    pub fn density(&self) -> Option<Vec<f64>> {
        let rings = self.rings.as_ref()?;
        let area = rings.areas();
        Some(self.masses.iter().zip(&area).map(|(m, a)| m / a).collect())
    }

    /// `(1 - t) self + t other` on a shared grid.
    pub fn mix(&self, other: &Measure, t: f64) -> Result<Self> {
        match (&self.rings, &other.rings) {
            (Some(a), Some(b)) if Arc::ptr_eq(a, b) => {
                let masses = self
                    .masses
                    .iter()
                    .zip(&other.masses)
                    .map(|(x, y)| (1.0 - t) * x + t * y)
                    .collect();
                let mut atoms: Vec<(Point, f64)> = self.atoms.iter().map(|&(z, m)| (z, (1.0 - t) * m)).collect();
                atoms.extend(other.atoms.iter().map(|&(z, m)| (z, t * m)));
                Ok(Measure {
                    rings: Some(a.clone()),
                    masses,
                    atoms,
                })
            }
            _ => Err(Error::Config("measures live on different grids".into())),
        }
    }

    pub(crate) fn grid(&self) -> Result<&Arc<RingGrid>> {
        self.rings
            .as_ref()
            .ok_or_else(|| Error::Config("measure has no continuous part".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_masses_are_exact() {
        let g = SphereGrid::with_rings(56);
        let m = Measure::uniform_disk(&g, 0.7);
        assert!((m.total_mass() - 1.0).abs() < 1e-13);
        let d = m.density().unwrap();
        let inner = g.rings.index(3, 0);
        assert!((d[inner] - 1.0 / (std::f64::consts::PI * 0.49)).abs() < 1e-10);
        assert!(Measure::mu0(&g).total_mass() - 1.0 < 1e-13);
    }
}
