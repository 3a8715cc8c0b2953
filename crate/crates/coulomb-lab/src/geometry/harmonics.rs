use super::{to_sphere, Point};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Real spherical harmonics orthonormal in `L^2(mu0)`, up to degree `l_max`.
///
/// Flat index of `(l, m)` is `l*l + l + m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBasis {
    pub l_max: usize,
}

impl HarmonicBasis {
    pub fn new(l_max: usize) -> Self {
        assert!(l_max >= 1);
        HarmonicBasis { l_max }
    }

    pub fn len(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(l: usize, m: i64) -> usize {
        ((l * l + l) as i64 + m) as usize
    }

    /// Eigenvalue `l(l+1)` of the positive Laplacian.
    pub fn eigenvalue(l: usize) -> f64 {
        (l * (l + 1)) as f64
    }

    /// All harmonics at a sphere point given as a unit vector.
    pub fn eval_all_sphere(&self, x: [f64; 3], out: &mut Vec<f64>) {
        let lmax = self.l_max;
        out.clear();
        out.resize(self.len(), 0.0);
        let ct = x[2].clamp(-1.0, 1.0);
        let st = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let (cphi, sphi) = if st > 0.0 { (x[0] / st, x[1] / st) } else { (1.0, 0.0) };
        let mut qmm = 1.0;
        let (mut cm, mut sm) = (1.0, 0.0);
        for m in 0..=lmax {
            if m > 0 {
                qmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st;
                let c = cm * cphi - sm * sphi;
                sm = sm * cphi + cm * sphi;
                cm = c;
            }
            let (fc, fs) = if m == 0 {
                (1.0, 0.0)
            } else {
                (std::f64::consts::SQRT_2 * cm, std::f64::consts::SQRT_2 * sm)
            };
            let mut q_prev2 = 0.0;
            let mut q_prev = qmm;
            for l in m..=lmax {
                let q = if l == m {
                    qmm
                } else if l == m + 1 {
                    ((2 * m + 3) as f64).sqrt() * ct * qmm
                } else {
                    let (lf, mf) = (l as f64, m as f64);
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                    a * (ct * q_prev - b * q_prev2)
                };
                if l > m {
                    q_prev2 = q_prev;
                    q_prev = q;
                }
                let base = l * l + l;
                out[base + m] = q * fc;
                if m > 0 {
                    out[base - m] = q * fs;
                }
            }
        }
    }

    /// All harmonics at the sphere point of `z`.
    pub fn eval_all(&self, z: Point, out: &mut Vec<f64>) {
        self.eval_all_sphere(to_sphere(z), out)
    }
}

/// Value of `Y_{l,m}` at the sphere point of `z`.
pub fn sph_harm_eval(basis: &HarmonicBasis, l: usize, m: i64, z: Point) -> Result<f64> {
    if l > basis.l_max || m.unsigned_abs() as usize > l {
        return Err(Error::IndexOutOfRange(format!(
            "(l, m) = ({l}, {m}) with l_max = {}",
            basis.l_max
        )));
    }
    let mut v = Vec::new();
    HarmonicBasis::new(l.max(1)).eval_all(z, &mut v);
    Ok(v[HarmonicBasis::index(l, m)])
}

/// `sum_{l=l0}^{l_max} c_l P_l(t)` by the three-term recurrence.
pub fn legendre_series(coeffs: &[f64], t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    let mut s = 0.0;
    for (l, &c) in coeffs.iter().enumerate() {
        let p = match l {
            0 => 1.0,
            1 => t,
            _ => {
                let p2 = ((2 * l - 1) as f64 * t * p1 - (l - 1) as f64 * p0) / l as f64;
                p0 = p1;
                p1 = p2;
                p2
            }
        };
        s += c * p;
    }
    s
}
