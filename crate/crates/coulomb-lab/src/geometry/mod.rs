//! Riemann-sphere geometry of the plane chart.
//!
//! Points live in the chart `z`; the point at infinity is reached only
//! through the inversion chart `w = 1/z`. The reference potential is
//! `psi0 = log(1+|z|^2)` with curvature `mu0 = (1/pi)(1+|z|^2)^{-2} dlambda`.

mod green;
mod harmonics;
mod quadrature;
mod rings;

pub use green::{
    antipode, chordal_distance_sq, green_constant, green_constant_with, green_g, green_g0, sup_neg_g0, GREEN_SHIFT,
};
pub use harmonics::{legendre_series, sph_harm_eval, HarmonicBasis};
pub use quadrature::{gauss_legendre, gauss_legendre_on, LogRule, Quadrature, TailRule};
pub use rings::RingGrid;

use num_complex::Complex64;

/// A point of the plane chart.
pub type Point = Complex64;

/// Builds a point from its real and imaginary parts.
pub fn pt(re: f64, im: f64) -> Point {
    Complex64::new(re, im)
}

/// Fubini–Study potential `log(1+|z|^2)`.
pub fn fs_potential(z: Point) -> f64 {
    z.norm_sqr().ln_1p()
}

/// Density of `mu0` with respect to Lebesgue measure.
pub fn mu0_density(z: Point) -> f64 {
    let q = 1.0 + z.norm_sqr();
    1.0 / (std::f64::consts::PI * q * q)
}

/// Stereographic projection to the unit sphere with `z = 0` at the north pole.
pub fn to_sphere(z: Point) -> [f64; 3] {
    let r2 = z.norm_sqr();
    if !r2.is_finite() {
        return [0.0, 0.0, -1.0];
    }
    let d = 1.0 + r2;
    [2.0 * z.re / d, 2.0 * z.im / d, (1.0 - r2) / d]
}

/// Inverse stereographic projection; the south pole maps to an infinite point.
pub fn from_sphere(x: [f64; 3]) -> Point {
    let d = 1.0 + x[2];
    if d <= 0.0 {
        return pt(f64::INFINITY, 0.0);
    }
    pt(x[0] / d, x[1] / d)
}

/// `cos(theta)` of the sphere point, i.e. `(1-|z|^2)/(1+|z|^2)`.
pub fn zonal(z: Point) -> f64 {
    let r2 = z.norm_sqr();
    (1.0 - r2) / (1.0 + r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fs_potential_values() {
        assert_eq!(fs_potential(pt(0.0, 0.0)), 0.0);
        assert_relative_eq!(fs_potential(pt(1.0, 0.0)), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(fs_potential(pt(0.0, 3.0)), 10f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn mu0_density_values() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(mu0_density(pt(0.0, 0.0)), 1.0 / pi, epsilon = 1e-15);
        assert_relative_eq!(mu0_density(pt(0.6, 0.8)), 1.0 / (4.0 * pi), epsilon = 1e-15);
        let q = Quadrature::reference();
        let total: f64 = q.integrate(mu0_density);
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn stereographic_round_trip() {
        for &(a, b) in &[(0.3, -0.2), (2.0, 5.0), (-0.01, 0.0)] {
            let z = pt(a, b);
            let w = from_sphere(to_sphere(z));
            assert!((z - w).norm() < 1e-12 * (1.0 + z.norm()));
        }
        assert_eq!(to_sphere(pt(0.0, 0.0))[2], 1.0);
    }

    /// `-dd^c u / mu0` on `cos(theta)` by planar finite differences returns `2u`.
    #[test]
    fn laplacian_eigenvalue_convention() {
        let pi = std::f64::consts::PI;
        for &h in &[1e-2, 5e-3] {
            let mut worst: f64 = 0.0;
            for &(a, b) in &[(0.2, 0.1), (0.7, -0.4), (1.5, 0.3), (-0.1, -2.0)] {
                let z = pt(a, b);
                let lap =
                    (zonal(z + pt(h, 0.0)) + zonal(z - pt(h, 0.0)) + zonal(z + pt(0.0, h)) + zonal(z - pt(0.0, h))
                        - 4.0 * zonal(z))
                        / (h * h);
                let op = -lap / (4.0 * pi) / mu0_density(z);
                worst = worst.max((op - 2.0 * zonal(z)).abs());
            }
            assert!(worst < 20.0 * h * h, "h = {h}: {worst}");
        }
    }
}
