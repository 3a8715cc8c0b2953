use crate::geometry::{fs_potential, Point, RingGrid};
use std::f64::consts::PI;
use std::sync::Arc;

/// Reduced latitude-longitude finite-volume grid on the Riemann sphere.
///
/// Colatitude `theta` is measured from `z = 0`, so ring `i` sits at planar
/// radius `tan(theta_i / 2)` and the last ring contains the point at infinity.
/// Rings are thinned by powers of two towards the poles so cells stay close
/// to square; cell edges of neighbouring rings are nested.
#[derive(Debug)]
pub struct SphereGrid {
    pub h: f64,
    pub n_theta: usize,
    pub rings: Arc<RingGrid>,
    /// Planar radii of ring edges; the last one is infinite.
    pub edge_radii: Vec<f64>,
    /// Spherical cell areas, summing to `4 pi`.
    pub sphere_area: Vec<f64>,
    start: Vec<usize>,
    nbr: Vec<u32>,
    coef: Vec<f64>,
    diag: Vec<f64>,
    ring_of: Vec<usize>,
}

/// Smallest `m * 2^k >= target` with `m` in `[4, 8)`.
fn grid_size(target: f64) -> usize {
    let mut k = 0u32;
    loop {
        for m in 4..8usize {
            let n = m << k;
            if n as f64 >= target {
                return n;
            }
        }
        k += 1;
    }
}

impl SphereGrid {
    /// Grid whose spacing near the unit circle is at most `h`.
    pub fn new(h: f64) -> Self {
        assert!(h > 0.0 && h < 1.0);
        Self::with_rings(grid_size(PI / h).max(8))
    }

    pub fn with_rings(n_theta: usize) -> Self {
        assert!(n_theta >= 4 && n_theta.is_multiple_of(2), "n_theta must be even and at least 4");
        let dt = PI / n_theta as f64;
        let base = 2 * n_theta;
        let twos = base.trailing_zeros();
        let theta: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * dt).collect();
        let n_phi: Vec<usize> = theta
            .iter()
            .map(|&t| {
                let target = 2.0 * PI * t.sin() / dt;
                let mut b = 0;
                while b < twos && (base >> (b + 1)) as f64 >= target && (base >> (b + 1)) >= 4 {
                    b += 1;
                }
                base >> b
            })
            .collect();
        let edge_theta: Vec<f64> = (0..=n_theta).map(|i| i as f64 * dt).collect();
        let mut edge_radii: Vec<f64> = edge_theta.iter().map(|&t| (0.5 * t).tan()).collect();
        edge_radii[n_theta] = f64::INFINITY;
        let radii: Vec<f64> = theta.iter().map(|&t| (0.5 * t).tan()).collect();
        let ring_sphere_area: Vec<f64> = (0..n_theta)
            .map(|i| 2.0 * PI * (edge_theta[i].cos() - edge_theta[i + 1].cos()) / n_phi[i] as f64)
            .collect();
        let planar_area: Vec<f64> = (0..n_theta)
            .map(|i| {
                let (a, b) = (edge_radii[i], edge_radii[i + 1]);
                PI * (b * b - a * a) / n_phi[i] as f64
            })
            .collect();
        let width: Vec<f64> = (0..n_theta).map(|i| edge_radii[i + 1] - edge_radii[i]).collect();
        let mu0: Vec<f64> = ring_sphere_area.iter().map(|a| a / (4.0 * PI)).collect();
        let phase: Vec<f64> = n_phi.iter().map(|&n| PI / n as f64).collect();
        let rings = RingGrid::new(radii, n_phi.clone(), phase, planar_area, mu0, width);

        let n = rings.len();
        let mut start = Vec::with_capacity(n + 1);
        let mut nbr = Vec::new();
        let mut coef = Vec::new();
        let mut diag = Vec::with_capacity(n);
        start.push(0);
        for i in 0..n_theta {
            let ni = n_phi[i];
            let dphi = 2.0 * PI / ni as f64;
            let c_lat = dt / (theta[i].sin() * dphi);
            for j in 0..ni {
                let mut d = 0.0;
                for jj in [(j + ni - 1) % ni, (j + 1) % ni] {
                    nbr.push(rings.index(i, jj) as u32);
                    coef.push(c_lat);
                    d += c_lat;
                }
                for (other, edge) in [(i.wrapping_sub(1), i), (i + 1, i + 1)] {
                    if other >= n_theta {
                        continue;
                    }
                    let no = n_phi[other];
                    let s = edge_theta[edge].sin();
                    if no >= ni {
                        let r = no / ni;
                        let c = s * (2.0 * PI / no as f64) / dt;
                        for jj in j * r..(j + 1) * r {
                            nbr.push(rings.index(other, jj) as u32);
                            coef.push(c);
                            d += c;
                        }
                    } else {
                        let r = ni / no;
                        let c = s * dphi / dt;
                        nbr.push(rings.index(other, j / r) as u32);
                        coef.push(c);
                        d += c;
                    }
                }
                diag.push(d);
                start.push(nbr.len());
            }
        }
        let sphere_area = rings.expand(&ring_sphere_area);
        let ring_of = rings.ring_of();
        SphereGrid {
            h: dt,
            n_theta,
            rings: Arc::new(rings),
            edge_radii,
            sphere_area,
            start,
            nbr,
            coef,
            diag,
            ring_of,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Cell centres in the plane.
    pub fn nodes(&self) -> Vec<Point> {
        self.rings.nodes().collect()
    }

    pub fn sample(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.rings.sample(f)
    }

    /// `log(1+|z|^2)` at cell centres.
    pub fn fs_values(&self) -> Vec<f64> {
        self.sample(fs_potential)
    }

    /// Largest finite cell-centre radius.
    pub fn outer_radius(&self) -> f64 {
        *self.rings.radii.last().unwrap()
    }

    /// Planar cell spacing at radius `r`.
    pub fn spacing_at(&self, r: f64) -> f64 {
        self.h * (1.0 + r * r) / 2.0
    }

    /// Whether features of size `r` are resolved by at least eight cells.
    pub fn resolves(&self, r: f64) -> bool {
        self.spacing_at(r) <= r / 8.0
    }

    pub fn ring_of(&self, cell: usize) -> usize {
        self.ring_of[cell]
    }

    pub(crate) fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    /// Neighbour indices and couplings of cell `i`.
    pub fn neighbours(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.start[i]..self.start[i + 1];
        (&self.nbr[r.clone()], &self.coef[r])
    }

    /// Weighted neighbour sum `sum_k c_k v_k` for cell `i`.
    #[inline]
    pub(crate) fn neighbour_sum(&self, v: &[f64], i: usize) -> f64 {
        let mut s = 0.0;
        for k in self.start[i]..self.start[i + 1] {
            s += self.coef[k] * v[self.nbr[k] as usize];
        }
        s
    }

    /// Finite-volume Laplacian integrated over cells: `(L v)_i ~ int_cell Delta_S v`.
    pub fn laplacian(&self, v: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.neighbour_sum(v, i) - self.diag[i] * v[i])
            .collect()
    }

    /// Curvature masses `(A_i + (L v)_i) / 4 pi` of the metric `psi_0 + v`.
    pub fn curvature_masses(&self, v: &[f64]) -> Vec<f64> {
        let lv = self.laplacian(v);
        self.sphere_area
            .iter()
            .zip(&lv)
            .map(|(a, l)| (a + l) / (4.0 * PI))
            .collect()
    }

    /// Discrete `J(w) = (1/8pi) int |grad w|^2`.
    pub fn dirichlet_j(&self, w: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.len() {
            for k in self.start[i]..self.start[i + 1] {
                let d = w[i] - w[self.nbr[k] as usize];
                s += self.coef[k] * d * d;
            }
        }
        // every face is visited twice
        s / (16.0 * PI)
    }

    /// Bilinear interpolation in `(theta, angle)` of cell-centred values.
    pub fn interpolate(&self, v: &[f64], z: Point) -> f64 {
        let theta = 2.0 * z.norm().atan();
        let dt = self.h;
        let x = theta / dt - 0.5;
        let k = (x.floor().max(0.0) as usize).min(self.n_theta - 2);
        let t = (x - k as f64).clamp(0.0, 1.0);
        let ang = z.arg().rem_euclid(2.0 * PI);
        let ring_value = |i: usize| {
            let n = self.rings.n_phi[i];
            let a = ang / (2.0 * PI) * n as f64 - 0.5;
            let j = a.floor();
            let f = a - j;
            let j0 = (j as i64).rem_euclid(n as i64) as usize;
            let j1 = (j0 + 1) % n;
            let r = self.rings.ring_range(i);
            (1.0 - f) * v[r.start + j0] + f * v[r.start + j1]
        };
        (1.0 - t) * ring_value(k) + t * ring_value(k + 1)
    }

    /// Next coarser grid in the continuation hierarchy.
    pub fn coarser(&self) -> Option<SphereGrid> {
        let n = self.n_theta / 2;
        (self.n_theta.is_multiple_of(4) && n >= 8).then(|| SphereGrid::with_rings(n))
    }

    /// Values of `v` (given on `coarse`) interpolated to this grid's cells.
    pub fn prolong(&self, coarse: &SphereGrid, v: &[f64]) -> Vec<f64> {
        self.rings.nodes().map(|z| coarse.interpolate(v, z)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn sizes_follow_the_power_of_two_rule() {
        assert_eq!(SphereGrid::new(1.0 / 128.0).n_theta, 448);
        assert_eq!(SphereGrid::new(1.0 / 64.0).n_theta, 224);
        assert_eq!(SphereGrid::new(1.0 / 32.0).n_theta, 112);
    }

    #[test]
    fn areas_and_symmetry() {
        let g = SphereGrid::with_rings(56);
        let total: f64 = g.sphere_area.iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        let mu0: f64 = g.rings.mu0_masses().iter().sum();
        assert!((mu0 - 1.0).abs() < 1e-12);
        // couplings are symmetric
        for i in 0..g.len() {
            let (nb, c) = g.neighbours(i);
            for (&k, &ck) in nb.iter().zip(c) {
                let (nb2, c2) = g.neighbours(k as usize);
                let back = nb2.iter().zip(c2).find(|(&m, _)| m as usize == i).map(|(_, &c)| c);
                assert_eq!(back, Some(ck));
            }
        }
        // r = 1 is a ring edge
        assert!((g.edge_radii[28] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn laplacian_of_zonal_harmonic() {
        // Delta_S cos(theta) = -2 cos(theta)
        let g = SphereGrid::with_rings(224);
        let u = g.sample(crate::geometry::zonal);
        let lu = g.laplacian(&u);
        let err = (0..g.len())
            .map(|i| (lu[i] / g.sphere_area[i] + 2.0 * u[i]).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-2, "{err}");
        let rms: f64 = (0..g.len())
            .map(|i| g.sphere_area[i] * (lu[i] / g.sphere_area[i] + 2.0 * u[i]).powi(2))
            .sum::<f64>();
        assert!(rms.sqrt() < 1e-3, "{}", rms.sqrt());
    }

    #[test]
    fn dirichlet_energy_of_zonal() {
        let g = SphereGrid::with_rings(224);
        let u = g.sample(crate::geometry::zonal);
        assert!((g.dirichlet_j(&u) - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn interpolation_is_accurate_for_smooth_fields() {
        let g = SphereGrid::with_rings(112);
        let u = g.sample(|z| crate::geometry::to_sphere(z)[0]);
        for &z in &[pt(0.3, 0.1), pt(-2.0, 0.7), pt(0.0, -0.9)] {
            assert!((g.interpolate(&u, z) - crate::geometry::to_sphere(z)[0]).abs() < 2e-3);
        }
    }
}
