use super::{monomial_gram, GramFactor};
use crate::equilibrium::{Measure, SphereGrid};
use crate::geometry::{fs_potential, gauss_legendre_on, mu0_density, LogRule, Point};
use crate::potentials::{Convention, Potential};
use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Normalized Bergman measure `B_N = (1/N) sum |Psi_i|^2 e^{-m phi} dlambda`
/// for the monomials orthonormalized against `e^{-m phi}`.
#[derive(Clone, Debug)]
pub struct BergmanDensity {
    pub n: usize,
    pub m: f64,
    phi: Potential,
    factor: GramFactor,
}

pub fn bergman_density(phi: &Potential, n: usize, convention: Convention) -> Result<BergmanDensity> {
    convention.check(phi, n, 1.0)?;
    let m = convention.exponent(n, 1.0)?;
    let factor = monomial_gram(phi, n, m)?.factor()?;
    Ok(BergmanDensity {
        n,
        m,
        phi: phi.clone(),
        factor,
    })
}

impl BergmanDensity {
    /// Density against Lebesgue measure.
    pub fn eval(&self, z: Point) -> f64 {
        let m_phi = self.m * self.phi.eval(z);
        if m_phi == f64::INFINITY {
            return 0.0;
        }
        let r = z.norm();
        self.factor.kernel_diagonal(r.ln(), z.arg(), m_phi) / self.n as f64
    }

    /// Total mass, by a log-radial rule in `|z|` and the trapezoid rule in angle.
    pub fn total_mass(&self) -> f64 {
        let rule = LogRule::radial();
        let n_a = if self.phi.is_radial() { 1 } else { (4 * self.n).max(64) };
        let mut s = 0.0;
        for (&x, &w) in rule.s.iter().zip(&rule.weights) {
            let r = x.exp();
            let ring: f64 = (0..n_a)
                .map(|j| self.eval(Point::from_polar(r, 2.0 * PI * j as f64 / n_a as f64)))
                .sum();
            s += w * r * r * 2.0 * PI * ring / n_a as f64;
        }
        s
    }

    /// Cell masses on a sphere grid. Radial weights get exact ring integrals;
    /// otherwise the density is sampled at cell centres in the `mu0` chart.
    pub fn to_measure(&self, grid: &SphereGrid) -> Measure {
        let rings = &grid.rings;
        let nr = rings.n_rings();
        if self.phi.is_radial() {
            let per_ring: Vec<f64> = (0..nr)
                .map(|i| {
                    let lo = grid.edge_radii[i];
                    let hi = grid.edge_radii[i + 1];
                    let (a, b) = (
                        if lo > 0.0 { lo.ln() } else { -40.0 },
                        if hi.is_finite() { hi.ln() } else { 40.0 },
                    );
                    let pieces = ((b - a) / 0.05).ceil().max(1.0) as usize;
                    let mut m = 0.0;
                    for p in 0..pieces {
                        let (x0, x1) = (
                            a + (b - a) * p as f64 / pieces as f64,
                            a + (b - a) * (p + 1) as f64 / pieces as f64,
                        );
                        let (x, w) = gauss_legendre_on(12, x0, x1);
                        for (xs, ws) in x.iter().zip(&w) {
                            let r = xs.exp();
                            m += ws * 2.0 * PI * r * r * self.eval(Point::new(r, 0.0));
                        }
                    }
                    m / rings.n_phi[i] as f64
                })
                .collect();
            Measure::on_rings(rings.clone(), rings.expand(&per_ring))
        } else {
            let mu0 = rings.mu0_masses();
            let masses = rings
                .nodes()
                .zip(&mu0)
                .map(|(z, w)| w * self.eval(z) / mu0_density(z))
                .collect();
            Measure::on_rings(rings.clone(), masses)
        }
    }
}

/// `||mu1 - mu2||_{H^{-1}}`, the square root of `int int G0 (mu1 - mu2)^{(x)2}`.
pub fn h_minus1_distance(mu1: &Measure, mu2: &Measure) -> Result<f64> {
    if mu1.has_atoms() || mu2.has_atoms() {
        return Err(Error::Atoms);
    }
    let (Some(a), Some(b)) = (&mu1.rings, &mu2.rings) else {
        return Err(Error::Config("measures need a continuous part".into()));
    };
    if !(Arc::ptr_eq(a, b) || a.radii == b.radii && a.n_phi == b.n_phi) {
        return Err(Error::Config("measures live on different grids".into()));
    }
    let sigma: Vec<f64> = mu1.masses.iter().zip(&mu2.masses).map(|(x, y)| x - y).collect();
    let net: f64 = sigma.iter().sum();
    let fs: f64 = a.nodes().zip(&sigma).map(|(z, s)| s * fs_potential(z)).sum();
    let sq = 2.0 * net * fs - a.log_interaction(&sigma, &sigma);
    Ok(sq.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn fs_bergman_is_mu0() {
        let b = bergman_density(&Potential::fs(), 8, Convention::AdjointNPlus1).unwrap();
        for k in 0..40 {
            let z = Point::from_polar(0.05 + 0.2 * k as f64, 0.3 * k as f64);
            let exact = mu0_density(z);
            assert!((b.eval(z) - exact).abs() <= 1e-10 * exact, "{z}");
        }
        assert!((b.total_mass() - 1.0).abs() < 1e-8);
        let grid = SphereGrid::new(1.0 / 32.0);
        let d = h_minus1_distance(&b.to_measure(&grid), &Measure::mu0(&grid)).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn ginibre_bulk_density() {
        let b = bergman_density(&Potential::quad(1.0), 64, Convention::ExteriorNPhi).unwrap();
        assert!((b.total_mass() - 1.0).abs() < 1e-8);
        for k in 0..15 {
            let z = Point::from_polar(0.05 * k as f64, 0.4 * k as f64);
            assert!((b.eval(z) - 1.0 / PI).abs() < 0.05, "{z}");
        }
        assert!(b.eval(pt(1.5, 0.0)) < 1e-6);
    }

    #[test]
    fn non_radial_weight_has_unit_mass() {
        let phi = Potential::quad(1.0).plus_test(&crate::potentials::TestFunction::real_part().scaled(0.5));
        let b = bergman_density(&phi, 6, Convention::ExteriorNPhi).unwrap();
        assert!((b.total_mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn distance_basics() {
        let grid = SphereGrid::new(1.0 / 32.0);
        let mu0 = Measure::mu0(&grid);
        assert_eq!(h_minus1_distance(&mu0, &mu0).unwrap(), 0.0);
        let disk = Measure::uniform_disk(&grid, 1.0);
        assert!(h_minus1_distance(&disk, &mu0).unwrap() > 0.1);
        assert!(matches!(
            h_minus1_distance(&Measure::atomic(vec![(pt(0.0, 0.0), 1.0)]), &mu0),
            Err(Error::Atoms)
        ));
    }
}
