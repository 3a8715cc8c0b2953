use super::{log_weight_integral, Method, PartitionValue};
use crate::geometry::{gauss_legendre_on, LogRule, Point};
use crate::potentials::{Convention, Potential, TestFunction};
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tanh-sinh rule on `[0, 1]`: nodes `t`, complements `1 - t` and weights.
fn tanh_sinh(h: f64, x_max: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let k = (x_max / h).ceil() as i64;
    let mut t = Vec::new();
    let mut c = Vec::new();
    let mut w = Vec::new();
    for i in -k..=k {
        let x = i as f64 * h;
        let u = 0.5 * PI * x.sinh();
        let ti = 1.0 / (1.0 + (-2.0 * u).exp());
        let ci = 1.0 / (1.0 + (2.0 * u).exp());
        let wi = h * PI * ti * ci * x.cosh();
        if wi > 0.0 && ti > 0.0 && ci > 0.0 {
            t.push(ti);
            c.push(ci);
            w.push(wi);
        }
    }
    (t, c, w)
}

/// `(1/pi) int_0^pi ((1-t)^2 + 4 t sin^2(theta/2))^beta dtheta` for `t <= 1`, given `1 - t`.
fn angular_mean_inner(beta: f64, t: f64, one_minus_t: f64, rule: &(Vec<f64>, Vec<f64>, Vec<f64>)) -> f64 {
    if beta == 1.0 {
        return 1.0 + t * t;
    }
    let (tau, _, w) = rule;
    let mut s = 0.0;
    for (x, wx) in tau.iter().zip(w) {
        let sn = (0.5 * PI * x).sin();
        let q = one_minus_t * one_minus_t + 4.0 * t * sn * sn;
        s += wx * q.powf(beta);
    }
    s
}

/// `(1/2pi) int_0^{2pi} |1 - t e^{i theta}|^{2 beta} dtheta`.
pub fn angular_mean(beta: f64, t: f64) -> f64 {
    let rule = tanh_sinh(1.0 / 32.0, 3.2);
    if t <= 1.0 {
        angular_mean_inner(beta, t, 1.0 - t, &rule)
    } else {
        t.powf(2.0 * beta) * angular_mean_inner(beta, 1.0 / t, 1.0 - 1.0 / t, &rule)
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `log int int |z1 - z2|^{2 beta} e^{-a Phi(z1) - a Phi(z2)}` for radial `Phi`,
/// with the angular integral done per ratio `t = r1 / r2` and both remaining
/// integrals by rules refined with `level`.
fn radial_pair_log_z(profile: &Profile, a: f64, beta: f64, level: u32) -> Result<f64> {
    let scale = 0.5f64.powi(level as i32);
    let trule = tanh_sinh(0.125 * scale, 3.2);
    let theta_rule = tanh_sinh(1.0 / 32.0, 3.2);
    let inner: Vec<f64> = trule
        .0
        .iter()
        .zip(&trule.1)
        .zip(&trule.2)
        .map(|((&t, &c), &w)| (w * t * angular_mean_inner(beta, t, c, &theta_rule)).ln())
        .collect();
    let rule = LogRule::new(-40.0, 40.0, 0.1 * scale, 8);
    let f: Vec<f64> = rule
        .s
        .par_iter()
        .map(|&s| {
            let r = s.exp();
            let outer = (4.0 + 2.0 * beta) * s - a * profile(r);
            if outer == f64::NEG_INFINITY || outer.is_nan() {
                return f64::NEG_INFINITY;
            }
            outer + log_sum_exp(trule.0.iter().zip(&inner).map(|(&t, &l)| l - a * profile(t * r)))
        })
        .collect();
    Ok((8.0 * PI * PI).ln() + rule.log_integral(&f)?)
}

/// Weighted planar nodes `(z, log weight)` for the one-point weight `e^{-a Phi}`,
/// pruned to the region that matters for `n` points.
fn planar_nodes(phi: &Potential, a: f64, beta: f64, n: usize, rings: usize, n_a: usize) -> Result<Vec<(Point, f64)>> {
    let growth = 2.0 * beta * (n as f64 - 1.0);
    let scan = LogRule::new(-40.0, 40.0, 0.1, 4);
    let ring_min = |s: f64, k: usize| {
        let r = s.exp();
        (0..k)
            .map(|j| phi.eval(Point::from_polar(r, 2.0 * PI * j as f64 / k as f64)))
            .fold(f64::INFINITY, f64::min)
    };
    let profile: Vec<f64> = scan
        .s
        .iter()
        .map(|&s| 2.0 * s + growth * s.max(0.0) - a * ring_min(s, 32))
        .collect();
    let max = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Quadrature("one-point weight vanishes or diverges".into()));
    }
    let keep: Vec<f64> = scan
        .s
        .iter()
        .zip(&profile)
        .filter(|(_, &p)| p > max - 40.0)
        .map(|(&s, _)| s)
        .collect();
    let (lo, hi) = (keep[0] - 0.5, keep[keep.len() - 1] + 0.5);
    if lo < -39.0 || hi > 39.0 {
        return Err(Error::Divergent(
            "one-point weight not negligible at the ends of the range".into(),
        ));
    }
    let order = 6;
    let rule = LogRule::new(lo, hi, (hi - lo) * order as f64 / rings as f64, order);
    let dtheta = 2.0 * PI / n_a as f64;
    let mut nodes = Vec::with_capacity(rule.len() * n_a);
    for (&s, &w) in rule.s.iter().zip(&rule.weights) {
        let r = s.exp();
        for j in 0..n_a {
            let z = Point::from_polar(r, (j as f64 + 0.5) * dtheta);
            let lw = (w * dtheta).ln() + 2.0 * s - a * phi.eval(z);
            nodes.push((z, lw));
        }
    }
    let top = nodes.iter().map(|n| n.1).fold(f64::NEG_INFINITY, f64::max);
    nodes.retain(|n| n.1 > top - 45.0);
    Ok(nodes)
}

fn planar_log_z(phi: &Potential, a: f64, beta: f64, n: usize, rings: usize, n_a: usize) -> Result<f64> {
    let nodes = planar_nodes(phi, a, beta, n, rings, n_a)?;
    let top = nodes.iter().map(|n| n.1).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = nodes.iter().map(|n| (n.1 - top).exp()).collect();
    let z: Vec<Point> = nodes.iter().map(|n| n.0).collect();
    let pair = |k: usize, l: usize| {
        let d = (z[k] - z[l]).norm_sqr();
        if beta == 1.0 {
            d
        } else {
            d.powf(beta)
        }
    };
    let m = z.len();
    let sum: f64 = match n {
        2 => {
            (0..m)
                .into_par_iter()
                .map(|k| (k + 1..m).map(|l| w[k] * w[l] * pair(k, l)).sum::<f64>())
                .sum::<f64>()
                * 2.0
        }
        3 => {
            (0..m)
                .into_par_iter()
                .map(|k| {
                    let mut s = 0.0;
                    for l in k + 1..m {
                        let wkl = w[k] * w[l] * pair(k, l);
                        for q in l + 1..m {
                            s += wkl * w[q] * pair(k, q) * pair(l, q);
                        }
                    }
                    s
                })
                .sum::<f64>()
                * 6.0
        }
        _ => unreachable!(),
    };
    Ok(n as f64 * top + sum.ln())
}

/// Brute-force `log Z_{N,beta}[V]` for `N <= 3`, with `V = m (phi + u)`.
///
/// Two resolutions are computed; the finer value is returned and the error
/// bar is their difference.
pub fn brute_force_log_z(
    phi: &Potential,
    u: &TestFunction,
    n: usize,
    beta: f64,
    convention: Convention,
) -> Result<PartitionValue> {
    if !(1..=3).contains(&n) {
        return Err(Error::Config(format!(
            "brute-force quadrature needs 1 <= n <= 3, got {n}"
        )));
    }
    let total = phi.plus_test(u);
    convention.check(&total, n, beta)?;
    let a = beta * convention.exponent(n, beta)?;
    let (coarse, fine) = match (n, total.radial_profile()) {
        (1, _) => {
            let v = log_weight_integral(&total, a)?;
            (v, v)
        }
        (2, Some(profile)) => (
            radial_pair_log_z(&profile, a, beta, 0)?,
            radial_pair_log_z(&profile, a, beta, 1)?,
        ),
        (2, None) => (
            planar_log_z(&total, a, beta, 2, 96, 48)?,
            planar_log_z(&total, a, beta, 2, 144, 72)?,
        ),
        _ => (
            planar_log_z(&total, a, beta, 3, 36, 20)?,
            planar_log_z(&total, a, beta, 3, 54, 30)?,
        ),
    };
    if !fine.is_finite() {
        return Err(Error::Quadrature(format!("non-finite result {fine}")));
    }
    Ok(PartitionValue {
        log_z: fine,
        n,
        beta,
        convention,
        method: Method::BruteQuadrature,
        error_bar: (fine - coarse).abs(),
    })
}

/// Normalized joint law of `(|z1|^2, |z2|^2)` for the two-point gas with radial `phi`.
#[derive(Clone)]
pub struct RadialPairDensity {
    profile: Profile,
    a: f64,
    beta: f64,
    pub log_z: f64,
}

impl RadialPairDensity {
    pub fn new(phi: &Potential, beta: f64, convention: Convention) -> Result<Self> {
        let profile = phi
            .radial_profile()
            .ok_or_else(|| Error::Convention(format!("{} is not radial", phi.name)))?;
        convention.check(phi, 2, beta)?;
        let a = beta * convention.exponent(2, beta)?;
        let log_z = radial_pair_log_z(&profile, a, beta, 1)?;
        Ok(RadialPairDensity {
            profile,
            a,
            beta,
            log_z,
        })
    }

    /// Density of `(t1, t2) = (|z1|^2, |z2|^2)` against `dt1 dt2`.
    pub fn joint(&self, t1: f64, t2: f64) -> f64 {
        let (r1, r2) = (t1.sqrt(), t2.sqrt());
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        if hi == 0.0 {
            return 0.0;
        }
        let ang = hi.powf(2.0 * self.beta) * angular_mean(self.beta, lo / hi);
        let lw = -self.a * ((self.profile)(r1) + (self.profile)(r2));
        PI * PI * ang * (lw - self.log_z).exp()
    }

    /// Probability that `|z_i|^2 / (1 + |z_i|^2)` lands in `u1` and `u2` respectively.
    pub fn box_probability(&self, u1: (f64, f64), u2: (f64, f64)) -> f64 {
        let (x1, w1) = gauss_legendre_on(24, u1.0, u1.1);
        let (x2, w2) = gauss_legendre_on(24, u2.0, u2.1);
        let mut s = 0.0;
        for (a, wa) in x1.iter().zip(&w1) {
            let (ta, ja) = (a / (1.0 - a), 1.0 / ((1.0 - a) * (1.0 - a)));
            for (b, wb) in x2.iter().zip(&w2) {
                let (tb, jb) = (b / (1.0 - b), 1.0 / ((1.0 - b) * (1.0 - b)));
                s += wa * wb * ja * jb * self.joint(ta, tb);
            }
        }
        s
    }
}
