use crate::geometry::LogRule;
use crate::potentials::Potential;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use statrs::function::factorial::ln_factorial;
use std::f64::consts::PI;

/// `log int |z|^{2j} (1+|z|^2)^{-m} dlambda = log(pi j! (m-2-j)! / (m-1)!)`.
pub fn log_fs_moment(j: usize, m: usize) -> Result<f64> {
    if m < 2 || j > m - 2 {
        return Err(Error::IndexOutOfRange(format!(
            "fs moment needs 0 <= j <= m - 2, got j = {j}, m = {m}"
        )));
    }
    Ok(PI.ln() + ln_factorial(j as u64) + ln_factorial((m - 2 - j) as u64) - ln_factorial((m - 1) as u64))
}

/// `int |z|^{2j} (1+|z|^2)^{-m} dlambda`.
pub fn fs_moment(j: usize, m: usize) -> Result<f64> {
    Ok(log_fs_moment(j, m)?.exp())
}

/// Hermitian moment matrix `G_ij = int z^i conj(z)^j e^{-m phi} dlambda`,
/// stored as `G_ij = e^{l_i + l_j} C_ij` with `C_ii = 1`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub n: usize,
    /// `l_i = log(G_ii) / 2`.
    pub log_scale: Vec<f64>,
    /// Normalized entries `C_ij`.
    pub entries: DMatrix<Complex64>,
    pub m_exponent: f64,
    diagonal: bool,
}

/// Lower Cholesky factor of the normalized matrix.
#[derive(Clone, Debug)]
pub struct GramFactor {
    pub log_scale: Vec<f64>,
    /// `None` when the matrix is diagonal.
    pub lower: Option<DMatrix<Complex64>>,
}

impl GramMatrix {
    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// `G_ij`; overflows for large `n`, use the scaled form instead.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)] * (self.log_scale[i] + self.log_scale[j]).exp()
    }

    /// Largest `|C_ij - conj(C_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                d = d.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn factor(&self) -> Result<GramFactor> {
        let lower = if self.diagonal {
            None
        } else {
            Some(cholesky(&self.entries)?)
        };
        Ok(GramFactor {
            log_scale: self.log_scale.clone(),
            lower,
        })
    }

    pub fn log_det(&self) -> Result<f64> {
        self.factor().map(|f| f.log_det())
    }
}

impl GramFactor {
    pub fn log_det(&self) -> f64 {
        let scale: f64 = 2.0 * self.log_scale.iter().sum::<f64>();
        match &self.lower {
            None => scale,
            Some(l) => scale + 2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>(),
        }
    }

    /// `sum_i |Psi_i(z)|^2 e^{-m phi(z)}` for the orthonormalized monomials,
    /// given `log|z|`, `arg z` and `m phi(z)`.
    pub fn kernel_diagonal(&self, log_r: f64, theta: f64, m_phi: f64) -> f64 {
        let n = self.log_scale.len();
        let logs: Vec<f64> = (0..n)
            .map(|i| if i == 0 { 0.0 } else { i as f64 * log_r } - self.log_scale[i] - 0.5 * m_phi)
            .collect();
        match &self.lower {
            None => {
                let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max == f64::NEG_INFINITY {
                    return 0.0;
                }
                (2.0 * max).exp() * logs.iter().map(|x| (2.0 * (x - max)).exp()).sum::<f64>()
            }
            Some(l) => {
                let mut y: Vec<Complex64> = logs
                    .iter()
                    .enumerate()
                    .map(|(i, x)| Complex64::from_polar(x.exp(), i as f64 * theta))
                    .collect();
                for i in 0..n {
                    let mut s = y[i];
                    for k in 0..i {
                        s -= l[(i, k)] * y[k];
                    }
                    y[i] = s / l[(i, i)].re;
                }
                y.iter().map(|c| c.norm_sqr()).sum()
            }
        }
    }
}

/// Cholesky factorization of a Hermitian matrix, reporting the failing pivot.
pub fn cholesky(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite(j));
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Gram matrix of `1, z, ..., z^{n-1}` for the weight `e^{-m phi}`.
///
/// Radial potentials give a diagonal matrix from one-dimensional moments;
/// anything else goes through a two-dimensional ring rule.
pub fn monomial_gram(phi: &Potential, n: usize, m_exponent: f64) -> Result<GramMatrix> {
    if phi.is_radial() {
        radial_gram(phi, n, m_exponent)
    } else {
        planar_gram(phi, n, m_exponent)
    }
}

/// `log int |z|^{2j} e^{-m phi} dlambda` for `j < n`, radial `phi` only.
pub fn log_radial_moments(phi: &Potential, n: usize, m_exponent: f64) -> Result<Vec<f64>> {
    let profile = phi
        .radial_profile()
        .ok_or_else(|| Error::Convention(format!("{} is not radial", phi.name)))?;
    let rule = LogRule::radial();
    let base: Vec<f64> = rule
        .s
        .par_iter()
        .map(|&s| (2.0 * PI).ln() + 2.0 * s - m_exponent * profile(s.exp()))
        .collect();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let f: Vec<f64> = base.iter().zip(&rule.s).map(|(b, s)| b + 2.0 * j as f64 * s).collect();
            rule.log_integral(&f).map_err(|e| match e {
                Error::Divergent(msg) => {
                    Error::Divergent(format!("moment {j} of e^(-{m_exponent} {}): {msg}", phi.name))
                }
                e => e,
            })
        })
        .collect()
}

fn radial_gram(phi: &Potential, n: usize, m: f64) -> Result<GramMatrix> {
    let moments = log_radial_moments(phi, n, m)?;
    Ok(GramMatrix {
        n,
        log_scale: moments.iter().map(|x| 0.5 * x).collect(),
        entries: DMatrix::identity(n, n),
        m_exponent: m,
        diagonal: true,
    })
}

/// Two-dimensional assembly: Gauss–Legendre in `log|z|`, FFT in angle.
pub fn planar_gram(phi: &Potential, n: usize, m: f64) -> Result<GramMatrix> {
    let n_a = (4 * n).next_power_of_two().max(256);
    let rule = LogRule::new(-40.0, 40.0, 0.05, 8);
    let dtheta = 2.0 * PI / n_a as f64;
    // per ring: log(dtheta) + 2s - m min phi and the FFT of the reduced weight; the GL weight is applied later
    let rings: Vec<Option<(f64, Vec<Complex64>)>> = rule
        .s
        .par_iter()
        .map_init(
            || FftPlanner::<f64>::new().plan_fft_forward(n_a),
            |fft, &s| {
                let r = s.exp();
                let vals: Vec<f64> = (0..n_a)
                    .map(|k| m * phi.eval(Complex64::from_polar(r, k as f64 * dtheta)))
                    .collect();
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                if !min.is_finite() {
                    return None;
                }
                let mut buf: Vec<Complex64> = vals.iter().map(|v| Complex64::new((min - v).exp(), 0.0)).collect();
                fft.process(&mut buf);
                buf.truncate(n.max(1));
                Some((dtheta.ln() + 2.0 * s - min, buf))
            },
        )
        .collect();
    let log_diag = |j: usize, k: usize| -> Option<f64> {
        let (b, x) = rings[k].as_ref()?;
        Some(b + 2.0 * j as f64 * rule.s[k] + x[0].re.ln())
    };
    let mut log_scale = Vec::with_capacity(n);
    for j in 0..n {
        let f: Vec<f64> = (0..rule.len())
            .map(|k| log_diag(j, k).unwrap_or(f64::NEG_INFINITY))
            .collect();
        log_scale.push(0.5 * rule.log_integral(&f)?);
    }
    let mut c = DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![0.0; n];
    for (k, ring) in rings.iter().enumerate() {
        let Some((b, x)) = ring else { continue };
        let s = rule.s[k];
        let b = b + rule.weights[k].ln();
        for (a, ea) in e.iter_mut().enumerate() {
            *ea = (0.5 * b + a as f64 * s - log_scale[a]).exp();
        }
        if e.iter().all(|&v| v < 1e-30) {
            continue;
        }
        for a in 0..n {
            for bb in a..n {
                c[(a, bb)] += x[bb - a] * (e[a] * e[bb]);
            }
        }
    }
    for a in 0..n {
        c[(a, a)] = Complex64::new(c[(a, a)].re, 0.0);
        for bb in a + 1..n {
            c[(bb, a)] = c[(a, bb)].conj();
        }
    }
    Ok(GramMatrix {
        n,
        log_scale,
        entries: c,
        m_exponent: m,
        diagonal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::TestFunction;

    #[test]
    fn fs_moment_examples() {
        assert!((fs_moment(0, 2).unwrap() - PI).abs() < 1e-14);
        assert!((fs_moment(1, 3).unwrap() - PI / 2.0).abs() < 1e-14);
        assert!(matches!(fs_moment(3, 4), Err(Error::IndexOutOfRange(_))));
        assert!(log_fs_moment(1000, 3000).unwrap().is_finite());
    }

    #[test]
    fn fs_moments_match_quadrature() {
        let fs = Potential::fs();
        for m in 2..=50usize {
            let q = log_radial_moments(&fs, m - 1, m as f64).unwrap();
            for (j, lq) in q.iter().enumerate() {
                let exact = log_fs_moment(j, m).unwrap();
                assert!((lq - exact).abs() < 1e-10, "j={j} m={m}");
            }
        }
    }

    #[test]
    fn gram_examples() {
        let g = monomial_gram(&Potential::fs(), 2, 3.0).unwrap();
        assert!(g.is_diagonal());
        assert!((g.entry(0, 0).re - PI / 2.0).abs() < 1e-12);
        assert!((g.entry(1, 1).re - PI / 2.0).abs() < 1e-12);
        let gauss = monomial_gram(&Potential::quad(1.0), 1, 2.0).unwrap();
        assert!((gauss.entry(0, 0).re - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn planar_assembly_agrees_with_radial() {
        let phi = Potential::quad(1.0);
        let radial = monomial_gram(&phi, 6, 7.0).unwrap();
        let planar = planar_gram(&phi, 6, 7.0).unwrap();
        for i in 0..6 {
            assert!(
                (radial.log_scale[i] - planar.log_scale[i]).abs() < 1e-10,
                "{i}: {} {}",
                radial.log_scale[i],
                planar.log_scale[i]
            );
            for j in 0..6 {
                if i != j {
                    assert!(planar.entries[(i, j)].norm() < 1e-10);
                }
            }
        }
        assert!((radial.log_det().unwrap() - planar.log_det().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn tilted_weight_is_hermitian_and_positive() {
        let phi = Potential::quad(1.0).plus_test(&TestFunction::real_part().scaled(0.4));
        let g = planar_gram(&phi, 8, 9.0).unwrap();
        assert!(g.hermitian_defect() < 1e-14);
        assert!(g.entries[(0, 1)].norm() > 1e-3);
        // |z|^2 + 0.4 Re z = |z + 0.2|^2 - 0.04, and translations act by unipotent basis changes
        let shifted = monomial_gram(&Potential::quad(1.0), 8, 9.0).unwrap().log_det().unwrap() + 8.0 * 9.0 * 0.04;
        assert!((g.log_det().unwrap() - shifted).abs() < 1e-9);
    }

    #[test]
    fn divergent_moments_are_reported() {
        assert!(matches!(
            monomial_gram(&Potential::fs(), 3, 3.0),
            Err(Error::Divergent(_))
        ));
    }
}
