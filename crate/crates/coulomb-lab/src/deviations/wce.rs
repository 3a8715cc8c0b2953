use crate::equilibrium::Measure;
use crate::geometry::{to_sphere, HarmonicBasis, Point};
use crate::sampling::Configuration;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// `||delta_N - mu0||_{H^{-s}}` truncated at degree `l_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WceReport {
    pub n: usize,
    pub s: f64,
    pub l_max: usize,
    pub wce: f64,
    /// Bound on the error in `wce` from dropping degrees above `l_max`.
    pub tail_bound: f64,
}

fn term(l: usize, s: f64) -> f64 {
    (2 * l + 1) as f64 * HarmonicBasis::eigenvalue(l).powf(-s)
}

/// `sum_{l > l_max} (2l+1) (l(l+1))^{-s}`.
pub fn tail_sum(s: f64, l_max: usize) -> f64 {
    const EXPLICIT: usize = 2000;
    let direct: f64 = (l_max + 1..=l_max + EXPLICIT).map(|l| term(l, s)).sum();
    // midpoint rule remainder: sum_{l >= a} (2l+1)(l(l+1))^{-s} ~ int_a^inf 2x (x^2 - 1/4)^{-s} dx
    let a = (l_max + EXPLICIT + 1) as f64;
    direct + (a * a - 0.25).powf(1.0 - s) / (s - 1.0)
}

/// Smallest `l_max` whose tail is at most `tol`.
pub fn l_max_for(s: f64, tol: f64) -> usize {
    let mut hi = 1;
    while tail_sum(s, hi) > tol {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail_sum(s, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn report(n: usize, s: f64, l_max: usize, partial: f64) -> WceReport {
    let t = tail_sum(s, l_max);
    let wce = partial.max(0.0).sqrt();
    WceReport {
        n,
        s,
        l_max,
        wce,
        tail_bound: (partial.max(0.0) + t).sqrt() - wce,
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 1.0 {
        Ok(())
    } else {
        Err(Error::SmoothnessOrder(s))
    }
}

/// Worst-case error from the harmonic coefficients `a_lm = (1/N) sum Y_lm(x_i)`.
pub fn wce(config: &Configuration, s: f64, basis: &HarmonicBasis) -> Result<WceReport> {
    check_s(s)?;
    let n = config.len();
    let mut a = vec![0.0; basis.len()];
    let mut y = Vec::new();
    for &z in &config.points {
        basis.eval_all(z, &mut y);
        for (ak, yk) in a.iter_mut().zip(&y) {
            *ak += yk;
        }
    }
    let mut partial = 0.0;
    for l in 1..=basis.l_max {
        let base = l * l;
        let sum: f64 = a[base..base + 2 * l + 1].iter().map(|v| v * v).sum();
        partial += HarmonicBasis::eigenvalue(l).powf(-s) * sum;
    }
    Ok(report(n, s, basis.l_max, partial / (n * n) as f64))
}

/// Same quantity from pairwise Legendre sums; cheaper when `N < l_max`.
pub fn wce_pairwise(config: &Configuration, s: f64, l_max: usize) -> Result<WceReport> {
    check_s(s)?;
    let n = config.len();
    let xs: Vec<[f64; 3]> = config.points.iter().map(|&z| to_sphere(z)).collect();
    let coeffs: Vec<f64> = (1..=l_max).map(|l| term(l, s)).collect();
    let diag: f64 = coeffs.iter().sum();
    let mut off = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let t = (xs[i][0] * xs[j][0] + xs[i][1] * xs[j][1] + xs[i][2] * xs[j][2]).clamp(-1.0, 1.0);
            let (mut p0, mut p1) = (1.0, t);
            let mut acc = coeffs[0] * t;
            for l in 2..=l_max {
                let p2 = ((2 * l - 1) as f64 * t * p1 - (l - 1) as f64 * p0) / l as f64;
                p0 = p1;
                p1 = p2;
                acc += coeffs[l - 1] * p2;
            }
            off += 2.0 * acc;
        }
    }
    Ok(report(n, s, l_max, (n as f64 * diag + off) / (n * n) as f64))
}

/// `sum_{l>=1} l(l+1)^{-s} sum_m (int Y_lm d(mu1 - mu2))^2`; at `s = 1` this is the squared `H^{-1}` distance.
pub fn spectral_norm_sq(mu1: &Measure, mu2: &Measure, s: f64, basis: &HarmonicBasis) -> Result<f64> {
    let mut a = vec![0.0; basis.len()];
    let mut y = Vec::new();
    let mut add = |z: Point, w: f64| {
        if w != 0.0 {
            basis.eval_all(z, &mut y);
            for (ak, yk) in a.iter_mut().zip(&y) {
                *ak += w * yk;
            }
        }
    };
    for (mu, sign) in [(mu1, 1.0), (mu2, -1.0)] {
        if let Some(r) = &mu.rings {
            for (z, &w) in r.nodes().zip(&mu.masses) {
                add(z, sign * w);
            }
        }
        for &(z, w) in &mu.atoms {
            add(z, sign * w);
        }
    }
    Ok((1..=basis.l_max)
        .map(|l| {
            let base = l * l;
            HarmonicBasis::eigenvalue(l).powf(-s) * a[base..base + 2 * l + 1].iter().map(|v| v * v).sum::<f64>()
        })
        .sum())
}

/// Exact `E wce^2` for the `N`-point spherical ensemble, using
/// `E sum_m a_lm^2 = (2l+1)(1 - prod_{k<=l} (N-k)/(N+k)) / N`.
pub fn spherical_expected_wce_sq(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    let mut ratio = 1.0;
    let mut total = 0.0;
    for l in 1..n {
        ratio *= (nf - l as f64) / (nf + l as f64);
        total += term(l, s) * (1.0 - ratio) / nf;
    }
    total + tail_sum(s, n.max(1) - 1) / nf
}
