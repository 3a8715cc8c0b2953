use super::{EquilibriumResult, Residuals, SphereGrid};
use crate::potentials::{GrowthClass, Potential};
use crate::{Error, Result};
use std::sync::Arc;

/// Envelope of a radial potential in the variable `s = log|z|`.
///
/// `P phi` is the largest convex function of `s` below `f(s) = phi(e^s)`
/// with slopes in `[0, 2]`; the equilibrium measure puts mass
/// `(slope jump)/2` on each vertex of its graph.
#[derive(Clone, Debug)]
pub struct RadialEnvelope {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub p: Vec<f64>,
    /// Grid indices of charged vertices and their masses.
    pub vertices: Vec<usize>,
    pub masses: Vec<f64>,
    pub free_energy: f64,
}

const S_MIN: f64 = -25.0;
const S_MAX: f64 = 25.0;

fn log1p_exp(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Solves the radial envelope problem on a uniform `s` grid of spacing `ds`.
pub fn solve_radial(phi: &Potential, ds: f64) -> Result<RadialEnvelope> {
    let profile = phi
        .radial_profile()
        .ok_or_else(|| Error::Convention(format!("{} is not radial", phi.name)))?;
    if phi.growth == GrowthClass::Inadmissible {
        return Err(Error::Inadmissible(format!("{} grows slower than log|z|^2", phi.name)));
    }
    let n = ((S_MAX - S_MIN) / ds).round() as usize + 1;
    let s: Vec<f64> = (0..n).map(|k| S_MIN + k as f64 * ds).collect();
    let f: Vec<f64> = s.iter().map(|&x| profile(x.exp())).collect();

    // lower convex hull, monotone chain
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..n {
        if !f[k].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (s[b] - s[a]) * (f[k] - f[a]) - (f[b] - f[a]) * (s[k] - s[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    if hull.len() < 2 {
        return Err(Error::Inadmissible("radial profile has too few finite samples".into()));
    }
    let slope = |a: usize, b: usize| (f[b] - f[a]) / (s[b] - s[a]);
    let m = hull.len();
    let out_slope: Vec<f64> = (0..m)
        .map(|a| {
            if a + 1 < m {
                slope(hull[a], hull[a + 1])
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let a0 = (0..m).find(|&a| out_slope[a] >= 0.0).unwrap();
    let a1 = (a0..m).find(|&a| out_slope[a] > 2.0).unwrap_or(m - 1);

    let mut vertices = Vec::new();
    let mut masses = Vec::new();
    let mut prev = 0.0;
    for a in a0..=a1 {
        let next = if a == a1 { 2.0 } else { out_slope[a].clamp(0.0, 2.0) };
        let mass = 0.5 * (next - prev);
        if mass > 0.0 {
            vertices.push(hull[a]);
            masses.push(mass);
        }
        prev = next;
    }

    let mut p = vec![0.0; n];
    let (k0, k1) = (hull[a0], hull[a1]);
    for k in 0..=k0 {
        p[k] = f[k0];
    }
    for a in a0..a1 {
        let (l, r) = (hull[a], hull[a + 1]);
        let sl = out_slope[a];
        for k in l..=r {
            p[k] = f[l] + sl * (s[k] - s[l]);
        }
    }
    for k in k1..n {
        p[k] = f[k1] + 2.0 * (s[k] - s[k1]);
    }

    let v = |k: usize| p[k] - log1p_exp(2.0 * s[k]);
    let on_mu_phi: f64 = vertices.iter().zip(&masses).map(|(&k, &w)| w * v(k)).sum();
    let dm0 = |x: f64| 0.5 / (x.cosh() * x.cosh());
    let mut on_mu0 = 0.0;
    for k in 0..n - 1 {
        on_mu0 += 0.5 * ds * (v(k) * dm0(s[k]) + v(k + 1) * dm0(s[k + 1]));
    }
    let free_energy = 0.5 + 0.5 * on_mu_phi + 0.5 * on_mu0;
    Ok(RadialEnvelope {
        s,
        f,
        p,
        vertices,
        masses,
        free_energy,
    })
}

impl RadialEnvelope {
    fn ds(&self) -> f64 {
        self.s[1] - self.s[0]
    }

    /// `P phi` at radius `r` by linear interpolation in `s`.
    pub fn eval(&self, r: f64) -> f64 {
        let x = r.ln();
        let ds = self.ds();
        let n = self.s.len();
        if x <= self.s[0] {
            return self.p[0];
        }
        if x >= self.s[n - 1] {
            return self.p[n - 1] + 2.0 * (x - self.s[n - 1]);
        }
        let t = (x - self.s[0]) / ds;
        let k = (t.floor() as usize).min(n - 2);
        let w = t - k as f64;
        (1.0 - w) * self.p[k] + w * self.p[k + 1]
    }

    /// Mass of the equilibrium measure inside `|z| <= r`.
    pub fn mass_within(&self, r: f64) -> f64 {
        let x = r.ln();
        self.vertices
            .iter()
            .zip(&self.masses)
            .filter(|(&k, _)| self.s[k] <= x)
            .map(|(_, m)| m)
            .sum()
    }

    /// Smallest and largest radius carrying mass.
    pub fn support_radii(&self) -> (f64, f64) {
        let first = self.s[*self.vertices.first().unwrap()].exp();
        let last = self.s[*self.vertices.last().unwrap()].exp();
        (first, last)
    }

    /// Transfers the solution onto a sphere grid.
    pub fn to_result(&self, phi: &Potential, grid: &Arc<SphereGrid>) -> EquilibriumResult {
        let rings = &grid.rings;
        let nr = rings.n_rings();
        let mut ring_mass = vec![0.0; nr];
        let mut i = 0;
        for (&k, &m) in self.vertices.iter().zip(&self.masses) {
            let r = self.s[k].exp();
            while i + 1 < nr && grid.edge_radii[i + 1] < r {
                i += 1;
            }
            ring_mass[i] += m;
        }
        let mut masses = Vec::with_capacity(grid.len());
        let mut v = Vec::with_capacity(grid.len());
        let mut g = Vec::with_capacity(grid.len());
        for i in 0..nr {
            let r = rings.radii[i];
            let psi0 = (r * r).ln_1p();
            let pv = self.eval(r) - psi0;
            for j in 0..rings.n_phi[i] {
                masses.push(ring_mass[i] / rings.n_phi[i] as f64);
                v.push(pv);
                g.push(phi.eval(rings.node(i, j)) - psi0);
            }
        }
        let support_mask: Vec<bool> = masses.iter().map(|&m| m > 0.0).collect();
        let complementarity = (0..grid.len())
            .filter(|&c| support_mask[c])
            .map(|c| (g[c] - v[c]).abs())
            .fold(0.0, f64::max);
        let orthogonality: f64 = self
            .vertices
            .iter()
            .zip(&self.masses)
            .map(|(&k, &m)| m * (self.f[k] - self.p[k]))
            .sum();
        let total: f64 = self.masses.iter().sum();
        let residuals = Residuals {
            complementarity,
            mass: (total - 1.0).abs(),
            orthogonality: orthogonality.abs(),
        };
        EquilibriumResult::assemble(grid.clone(), g, v, masses, support_mask, self.free_energy, residuals)
    }
}
