use super::{fs_potential, Point, Quadrature};
use crate::{Error, Result};

/// The constant `w - G` between the unnormalised kernel `G0` and the
/// mean-zero Green function `G`.
pub const GREEN_SHIFT: f64 = 1.0;

/// `G0(z, w) = log((1+|z|^2)(1+|w|^2)/|z-w|^2)`, i.e. `log 4` minus the log
/// of the squared chordal distance.
pub fn green_g0(z: Point, w: Point) -> Result<f64> {
    let d = (z - w).norm_sqr();
    if d == 0.0 {
        return Err(Error::Singular);
    }
    Ok(fs_potential(z) + fs_potential(w) - d.ln())
}

/// Mean-zero Green function `G = G0 - GREEN_SHIFT`, so `int G(x, .) mu0 = 0`.
pub fn green_g(z: Point, w: Point) -> Result<f64> {
    Ok(green_g0(z, w)? - GREEN_SHIFT)
}

/// Squared chordal distance on the unit sphere, in `[0, 4]`.
pub fn chordal_distance_sq(z: Point, w: Point) -> f64 {
    4.0 * (z - w).norm_sqr() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr()))
}

/// The antipode `-1/conj(z)`.
pub fn antipode(z: Point) -> Point {
    -1.0 / z.conj()
}

/// `sup(-G0)`; the chordal bound makes it exactly zero, attained at antipodes.
pub fn sup_neg_g0() -> f64 {
    0.0
}

/// `C = -1/2 int int G0 mu0 x mu0` on the reference quadrature.
pub fn green_constant() -> f64 {
    green_constant_with(&Quadrature::reference())
}

pub fn green_constant_with(q: &Quadrature) -> f64 {
    let rings = q.rings();
    let m = rings.mu0_masses();
    let mass: f64 = m.iter().sum();
    let psi: f64 = rings.nodes().zip(&m).map(|(z, w)| w * fs_potential(z)).sum();
    let inter = rings.log_interaction(&m, &m);
    -0.5 * (2.0 * mass * psi - inter)
}
