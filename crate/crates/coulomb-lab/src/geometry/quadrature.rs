use super::rings::RingGrid;
use super::{mu0_density, Point};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the region outside the cutoff disk is handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    None,
    InversionChart,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|t| h * t).collect())
}

/// Polar product rule on the plane: Gauss–Legendre in radius times the
/// trapezoid rule in angle inside `|z| <= R`, and the same rule in the
/// inversion chart outside.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub cutoff_radius: f64,
    pub tail_rule: TailRule,
    inner_len: usize,
    rings: RingGrid,
}

impl Quadrature {
    pub fn polar(cutoff_radius: f64, n_radial: usize, n_angular: usize, tail_rule: TailRule) -> Self {
        assert!(cutoff_radius > 0.0 && n_radial > 0 && n_angular > 0);
        let dphi = 2.0 * PI / n_angular as f64;
        let mut radii = Vec::new();
        let mut areas = Vec::new();
        let mut widths = Vec::new();
        let (r, wr) = gauss_legendre_on(n_radial, 0.0, cutoff_radius);
        for k in 0..n_radial {
            radii.push(r[k]);
            areas.push(wr[k] * r[k] * dphi);
            widths.push(wr[k]);
        }
        if tail_rule == TailRule::InversionChart {
            // |z| = 1/rho, dlambda = rho^{-3} drho dphi
            let (rho, wrho) = gauss_legendre_on(n_radial, 0.0, 1.0 / cutoff_radius);
            for k in (0..n_radial).rev() {
                radii.push(1.0 / rho[k]);
                areas.push(wrho[k] * rho[k].powi(-3) * dphi);
                widths.push(wrho[k] / (rho[k] * rho[k]));
            }
        }
        let mu0: Vec<f64> = radii
            .iter()
            .zip(&areas)
            .map(|(&r, &a)| a * mu0_density(Point::new(r, 0.0)))
            .collect();
        let rings = RingGrid::uniform(radii, n_angular, 0.0, areas, mu0, widths);
        let mut nodes = Vec::with_capacity(rings.len());
        let mut weights = Vec::with_capacity(rings.len());
        for i in 0..rings.n_rings() {
            for j in 0..n_angular {
                nodes.push(rings.node(i, j));
                weights.push(rings.area[i]);
            }
        }
        Quadrature {
            nodes,
            weights,
            cutoff_radius,
            tail_rule,
            inner_len: n_radial * n_angular,
            rings,
        }
    }

    /// Default rule used for reference integrals.
    pub fn reference() -> Self {
        Self::polar(1.0, 192, 128, TailRule::InversionChart)
    }

    /// Cheap rule: cutoff 5 with 64 x 64 nodes per chart.
    pub fn coarse() -> Self {
        Self::polar(5.0, 64, 64, TailRule::InversionChart)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lebesgue area of the inner nodes; equals `pi R^2`.
    pub fn inner_area(&self) -> f64 {
        self.weights[..self.inner_len].iter().sum()
    }

    pub fn rings(&self) -> &RingGrid {
        &self.rings
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }

    /// Integral of a radial integrand `f(r)` using one node per ring.
    pub fn integrate_radial(&self, f: impl Fn(f64) -> f64) -> f64 {
        let g = &self.rings;
        (0..g.n_rings())
            .map(|i| g.n_phi[i] as f64 * g.area[i] * f(g.radii[i]))
            .sum()
    }
}

/// Composite Gauss–Legendre rule on `[lo, hi]` for integrands given by their
/// logarithm, typically in the variable `s = log|z|`.
#[derive(Clone, Debug)]
pub struct LogRule {
    pub s: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LogRule {
    pub fn new(lo: f64, hi: f64, panel: f64, order: usize) -> Self {
        let panels = ((hi - lo) / panel).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        let (x, w) = gauss_legendre(order);
        let mut s = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let c = lo + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                s.push(c + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        LogRule { s, weights }
    }

    /// Rule on `s in [-40, 40]`, fine enough for peaks of width `1e-2`.
    pub fn radial() -> Self {
        Self::new(-40.0, 40.0, 0.025, 10)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `log sum w_k exp(f_k)` for log-integrand samples `f_k` at the nodes.
    ///
    /// Fails when the integrand is still within `e^-30` of its peak at an
    /// end of the range.
    pub fn log_integral(&self, f: &[f64]) -> Result<f64> {
        let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::INFINITY || max.is_nan() {
            return Err(Error::Divergent("log-integrand is not finite".into()));
        }
        if max == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let edge = f[0].max(f[f.len() - 1]);
        if edge > max - 30.0 {
            return Err(Error::Divergent(format!(
                "integrand not negligible at the range ends ({:.1} below peak)",
                max - edge
            )));
        }
        let sum: f64 = f.iter().zip(&self.weights).map(|(x, w)| w * (x - max).exp()).sum();
        Ok(max + sum.ln())
    }
}
