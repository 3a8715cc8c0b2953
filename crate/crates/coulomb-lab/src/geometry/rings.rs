use super::Point;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Nodes arranged on concentric circles.
///
/// Ring `i` carries `n_phi[i]` equally spaced nodes at angles
/// `phase[i] + 2 pi j / n_phi[i]`; each node has Lebesgue area `area[i]`
/// (infinite for a cell touching infinity) and `mu0` mass `mu0_mass[i]`.
/// `width[i]` is the radial extent of the ring's cells.
#[derive(Clone, Debug)]
pub struct RingGrid {
    pub radii: Vec<f64>,
    pub n_phi: Vec<usize>,
    pub phase: Vec<f64>,
    pub area: Vec<f64>,
    pub mu0_mass: Vec<f64>,
    pub width: Vec<f64>,
    offsets: Vec<usize>,
}

impl RingGrid {
    pub fn new(
        radii: Vec<f64>,
        n_phi: Vec<usize>,
        phase: Vec<f64>,
        area: Vec<f64>,
        mu0_mass: Vec<f64>,
        width: Vec<f64>,
    ) -> Self {
        assert!(radii.windows(2).all(|w| w[0] < w[1]), "ring radii must increase");
        let n = radii.len();
        assert!(n_phi.len() == n && phase.len() == n && area.len() == n && mu0_mass.len() == n && width.len() == n);
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for &k in &n_phi {
            offsets.push(offsets.last().unwrap() + k);
        }
        RingGrid {
            radii,
            n_phi,
            phase,
            area,
            mu0_mass,
            width,
            offsets,
        }
    }

    /// Rings with a common node count and phase.
    pub fn uniform(
        radii: Vec<f64>,
        n_phi: usize,
        phase: f64,
        area: Vec<f64>,
        mu0_mass: Vec<f64>,
        width: Vec<f64>,
    ) -> Self {
        let n = radii.len();
        Self::new(radii, vec![n_phi; n], vec![phase; n], area, mu0_mass, width)
    }

    pub fn n_rings(&self) -> usize {
        self.radii.len()
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index range of ring `i`.
    pub fn ring_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        self.offsets[i] + j
    }

    pub fn angle(&self, i: usize, j: usize) -> f64 {
        self.phase[i] + 2.0 * PI * j as f64 / self.n_phi[i] as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Complex64::from_polar(self.radii[i], self.angle(i, j))
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.n_rings()).flat_map(move |i| (0..self.n_phi[i]).map(move |j| self.node(i, j)))
    }

    /// Ring index of every node.
    pub fn ring_of(&self) -> Vec<usize> {
        (0..self.n_rings())
            .flat_map(|i| std::iter::repeat_n(i, self.n_phi[i]))
            .collect()
    }

    /// Samples `f` at every node, ring-major.
    pub fn sample(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    /// Lebesgue areas of all nodes.
    pub fn areas(&self) -> Vec<f64> {
        self.expand(&self.area)
    }

    /// `mu0` masses of all nodes.
    pub fn mu0_masses(&self) -> Vec<f64> {
        self.expand(&self.mu0_mass)
    }

    /// Repeats a per-ring value over the ring's nodes.
    pub fn expand(&self, per_ring: &[f64]) -> Vec<f64> {
        (0..self.n_rings())
            .flat_map(|i| std::iter::repeat_n(per_ring[i], self.n_phi[i]))
            .collect()
    }

    /// Same rings dilated by `c`.
    pub fn dilated(&self, c: f64) -> Self {
        let mut g = self.clone();
        for i in 0..g.n_rings() {
            g.radii[i] *= c;
            g.area[i] *= c * c;
            g.width[i] *= c;
        }
        g
    }

    /// Angular Fourier coefficients `sum_j a_ij e^{-ik theta_ij}` for `k = 0..=n_phi[i]/2`.
    pub fn ring_fourier(&self, a: &[f64]) -> Vec<Vec<Complex64>> {
        assert_eq!(a.len(), self.len());
        let mut planner = FftPlanner::new();
        let mut plans: HashMap<usize, Arc<dyn Fft<f64>>> = HashMap::new();
        let mut out = Vec::with_capacity(self.n_rings());
        for i in 0..self.n_rings() {
            let n = self.n_phi[i];
            let fft = plans.entry(n).or_insert_with(|| planner.plan_fft_forward(n)).clone();
            let mut buf: Vec<Complex64> = a[self.ring_range(i)].iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft.process(&mut buf);
            let coeffs = (0..=n / 2)
                .map(|k| buf[k] * Complex64::from_polar(1.0, -(k as f64) * self.phase[i]))
                .collect();
            out.push(coeffs);
        }
        out
    }

    /// Logarithmic interaction `sum a_p b_q log|z_p - z_q|^2` of two signed
    /// node-mass vectors, each ring being treated as a continuous circle density.
    pub fn log_interaction(&self, a: &[f64], b: &[f64]) -> f64 {
        let fa = self.ring_fourier(a);
        let fb = if std::ptr::eq(a, b) {
            fa.clone()
        } else {
            self.ring_fourier(b)
        };
        self.log_interaction_fourier(&fa, &fb)
    }

    pub fn log_interaction_fourier(&self, fa: &[Vec<Complex64>], fb: &[Vec<Complex64>]) -> f64 {
        let nr = self.n_rings();
        let logr2: Vec<f64> = self.radii.iter().map(|r| 2.0 * r.ln()).collect();
        // radial part: sum_i sum_i' a_i b_i' log max(r_i^2, r_i'^2) via prefix sums
        let (mut pa, mut pb) = (0.0, 0.0);
        let mut total = 0.0;
        for i in 0..nr {
            let (a0, b0) = (fa[i][0].re, fb[i][0].re);
            total += logr2[i] * (a0 * (pb + b0) + b0 * pa);
            pa += a0;
            pb += b0;
        }
        let kmax = self.n_phi.iter().copied().max().unwrap_or(0) / 2;
        let active = |f: &[Vec<Complex64>], k: usize| f.iter().any(|c| c.len() > k && c[k].norm_sqr() > 1e-300);
        let mut ratio = vec![0.0; nr * nr];
        for i in 0..nr {
            for ip in 0..nr {
                let (lo, hi) = if self.radii[i] < self.radii[ip] {
                    (i, ip)
                } else {
                    (ip, i)
                };
                ratio[i * nr + ip] = self.radii[lo] / self.radii[hi];
            }
        }
        let half = |i: usize, k: usize| if 2 * k == self.n_phi[i] { 0.5 } else { 1.0 };
        let mut pow = vec![1.0; nr * nr];
        for k in 1..=kmax {
            for (p, q) in pow.iter_mut().zip(&ratio) {
                *p *= q;
            }
            if !(active(fa, k) && active(fb, k)) {
                continue;
            }
            let mut s = 0.0;
            for i in 0..nr {
                if fa[i].len() <= k {
                    continue;
                }
                let ai = fa[i][k] * half(i, k);
                let row = &pow[i * nr..(i + 1) * nr];
                for ip in 0..nr {
                    if fb[ip].len() <= k {
                        continue;
                    }
                    let bb = fb[ip][k] * half(ip, k);
                    s += row[ip] * (ai.re * bb.re + ai.im * bb.im);
                }
            }
            total -= 2.0 / k as f64 * s;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_rings(n_r: usize, n_phi: usize) -> RingGrid {
        let radii: Vec<f64> = (0..n_r).map(|i| 0.5 + i as f64 * 0.25).collect();
        let ones = vec![1.0; n_r];
        RingGrid::uniform(radii, n_phi, 0.3, ones.clone(), ones.clone(), ones)
    }

    #[test]
    fn point_masses_on_distinct_rings() {
        let g = test_rings(4, 64);
        let mut a = vec![0.0; g.len()];
        let mut b = vec![0.0; g.len()];
        a[g.index(1, 5)] = 1.0;
        b[g.index(3, 17)] = 1.0;
        let exact = (g.node(1, 5) - g.node(3, 17)).norm_sqr().ln();
        let got = g.log_interaction(&a, &b);
        assert!((got - exact).abs() < 1e-3, "{got} vs {exact}");
    }

    #[test]
    fn mixed_ring_sizes() {
        let radii = vec![0.4, 0.9, 1.7];
        let ones = vec![1.0; 3];
        let g = RingGrid::new(
            radii,
            vec![8, 32, 16],
            vec![0.1, 0.0, 0.5],
            ones.clone(),
            ones.clone(),
            ones,
        );
        let mut a = vec![0.0; g.len()];
        let mut b = vec![0.0; g.len()];
        a[g.index(0, 3)] = 1.0;
        b[g.index(2, 11)] = 1.0;
        // band-limited rings only see modes below the smaller Nyquist; compare with a smoothed exact value
        let exact = (g.node(0, 3) - g.node(2, 11)).norm_sqr().ln();
        assert!((g.log_interaction(&a, &b) - exact).abs() < 2e-2);
    }

    #[test]
    fn uniform_circle_self_energy_is_log_r2() {
        let g = test_rings(3, 32);
        let mut a = vec![0.0; g.len()];
        for j in 0..32 {
            a[g.index(2, j)] = 1.0 / 32.0;
        }
        let got = g.log_interaction(&a, &a);
        assert!((got - 2.0 * g.radii[2].ln()).abs() < 1e-13);
    }

    #[test]
    fn dilation_shifts_interaction_by_log_c2() {
        let g = test_rings(5, 16);
        let a: Vec<f64> = (0..g.len()).map(|k| 1.0 + 0.3 * ((k * 7 % 11) as f64)).collect();
        let s: f64 = a.iter().sum();
        let c = 2.0f64.powf(0.7);
        let d = g.dilated(c).log_interaction(&a, &a) - g.log_interaction(&a, &a);
        assert!((d - 2.0 * c.ln() * s * s).abs() < 1e-9 * s * s);
    }
}
