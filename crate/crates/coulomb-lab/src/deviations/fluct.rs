use super::linear_statistic;
use crate::equilibrium::EquilibriumResult;
use crate::geometry::{gauss_legendre_on, Point, Quadrature, TailRule};
use crate::potentials::TestFunction;
use crate::sampling::{Configuration, SampleSet};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// The bulk test function: height 1 on `|z - center| <= radius/2`, C^2 cutoff at `radius`.
pub fn bulk_bump(center: Point, radius: f64) -> TestFunction {
    TestFunction::bump(center, 0.5 * radius, radius, 1.0)
}

/// `l^{-2} <(F)_*(delta_N - mu_phi), u>` for the blow-up `F(z) = z0 + (z - z0)/l`.
///
/// The equilibrium part is `int u(w) rho(z0 + l (w - z0)) dlambda(w)` with the
/// solved density `rho`, integrated over the support of `u` when it is compact.
pub fn mesoscopic_statistic(
    config: &Configuration,
    eq: &EquilibriumResult,
    u: &TestFunction,
    z0: Point,
    scale: f64,
) -> Result<f64> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::Config(format!("blow-up scale {scale} outside (0, 1]")));
    }
    let n = config.len() as f64;
    let fz = |z: Point| z0 + (z - z0) / scale;
    let empirical = config.points.iter().map(|&z| u.eval(fz(z))).sum::<f64>() / n / (scale * scale);
    let model = match u.support_radius {
        Some(r) => {
            let q = Quadrature::polar(r, 96, 128, TailRule::None);
            let c = u.center;
            q.integrate(|w| {
                let v = u.eval(c + w);
                if v == 0.0 {
                    0.0
                } else {
                    v * eq.density.interpolate(z0 + scale * (c + w - z0))
                }
            })
        }
        None => {
            let rings = &eq.grid().rings;
            rings
                .nodes()
                .zip(&eq.masses)
                .map(|(z, &m)| if m == 0.0 { 0.0 } else { m * u.eval(fz(z)) })
                .sum::<f64>()
                / (scale * scale)
        }
    };
    Ok(empirical - model)
}

/// Variance of `N U_N` over a sample set with its jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub variance: f64,
    pub jackknife_se: f64,
    pub target: f64,
    /// `variance / target - 1`.
    pub relative_error: f64,
}

pub fn fluctuation_variance(samples: &SampleSet, u: &TestFunction, sigma_sq_target: f64) -> Result<VarianceReport> {
    let k = samples.len();
    if k < 3 || samples.effective_size() < 3.0 {
        return Err(Error::InsufficientSamples(format!("{k} configurations")));
    }
    let y: Vec<f64> = samples
        .configs
        .iter()
        .map(|c| c.len() as f64 * linear_statistic(c, u))
        .collect();
    let kf = k as f64;
    let mean = y.iter().sum::<f64>() / kf;
    let dev: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let s1: f64 = dev.iter().sum();
    let s2: f64 = dev.iter().map(|d| d * d).sum();
    let variance = s2 / (kf - 1.0);
    // leave-one-out variances from the running sums
    let loo: Vec<f64> = dev
        .iter()
        .map(|d| {
            let (a, b) = (s1 - d, s2 - d * d);
            (b - a * a / (kf - 1.0)) / (kf - 2.0)
        })
        .collect();
    let lm = loo.iter().sum::<f64>() / kf;
    let jackknife_se = ((kf - 1.0) / kf * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>()).sqrt();
    Ok(VarianceReport {
        variance,
        jackknife_se,
        target: sigma_sq_target,
        relative_error: variance / sigma_sq_target - 1.0,
    })
}

/// Exact `Var sum u(x_i)` for a radial `u` under the `N`-point Ginibre law, from the
/// independent moduli `|x_k|^2 ~ Gamma(k, 1)/N`.
pub fn radial_variance_ginibre(n: usize, u: &TestFunction) -> Result<f64> {
    let profile = u
        .profile()
        .ok_or_else(|| Error::Config("test function is not radial".into()))?;
    if u.center.norm() != 0.0 {
        return Err(Error::Config("test function is not centred at 0".into()));
    }
    let nf = n as f64;
    let hi = match u.support_radius {
        Some(r) => r * r * nf,
        None => 4.0 * nf + 200.0,
    };
    let pieces = 400;
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for p in 0..pieces {
        let (x, w) = gauss_legendre_on(8, hi * p as f64 / pieces as f64, hi * (p + 1) as f64 / pieces as f64);
        xs.extend(x);
        ws.extend(w);
    }
    let vals: Vec<f64> = xs.iter().map(|&x| profile((x / nf).sqrt())).collect();
    let mut var = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        let lg = ln_gamma(kf);
        let (mut m1, mut m2) = (0.0, 0.0);
        for ((&x, &w), &v) in xs.iter().zip(&ws).zip(&vals) {
            let d = w * ((kf - 1.0) * x.ln() - x - lg).exp();
            m1 += d * v;
            m2 += d * v * v;
        }
        var += m2 - m1 * m1;
    }
    Ok(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_radial, SphereGrid};
    use crate::geometry::pt;
    use crate::potentials::{h1_norm_sq, Potential};
    use crate::sampling::{ginibre_batch, ginibre_moduli};
    use std::sync::Arc;

    fn quad_eq() -> EquilibriumResult {
        let grid = Arc::new(SphereGrid::new(1.0 / 64.0));
        let phi = Potential::quad(1.0);
        solve_radial(&phi, 1e-4).unwrap().to_result(&phi, &grid)
    }

    #[test]
    fn identity_blow_up_is_the_centred_statistic() {
        let eq = quad_eq();
        let u = bulk_bump(pt(0.1, 0.0), 0.5);
        let c = ginibre_batch(64, 1, 1).unwrap().remove(0);
        let ubar = u.support_radius.map(|_| {
            let q = Quadrature::polar(0.5, 96, 128, TailRule::None);
            q.integrate(|w| u.eval(u.center + w) * eq.density.interpolate(u.center + w))
        });
        let m = mesoscopic_statistic(&c, &eq, &u, pt(0.0, 0.0), 1.0).unwrap();
        assert!((m - (linear_statistic(&c, &u) - ubar.unwrap())).abs() < 1e-12);
        assert!((ubar.unwrap() - super::super::equilibrium_mean(&u, &eq)).abs() < 2e-3);
    }

    #[test]
    fn disjoint_support_gives_zero() {
        let eq = quad_eq();
        let c = ginibre_batch(64, 1, 2).unwrap().remove(0);
        let z0 = pt(2.0, 0.0);
        let u = bulk_bump(z0, 0.5);
        assert_eq!(mesoscopic_statistic(&c, &eq, &u, z0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn variance_of_constant_and_scaling() {
        let draws = ginibre_batch(32, 300, 3).unwrap();
        let set = SampleSet::exact(draws, 3);
        let c = fluctuation_variance(&set, &TestFunction::constant(2.0), 1.0).unwrap();
        assert!(c.variance.abs() < 1e-20);
        let u = bulk_bump(pt(0.0, 0.0), 0.6);
        let a = fluctuation_variance(&set, &u, 1.0).unwrap();
        let b = fluctuation_variance(&set, &u.scaled(2.0), 1.0).unwrap();
        assert!((b.variance.sqrt() / a.variance.sqrt() - 2.0).abs() < 0.1);
        assert!(a.jackknife_se > 0.0 && a.jackknife_se < a.variance);
    }

    #[test]
    fn ginibre_radial_variance_oracle() {
        let u = bulk_bump(pt(0.0, 0.0), 0.6);
        let sigma = h1_norm_sq(&u).unwrap();
        let exact = radial_variance_ginibre(200, &u).unwrap();
        assert!((exact / sigma - 1.0).abs() < 0.1, "{exact} {sigma}");
        let large = radial_variance_ginibre(1600, &u).unwrap();
        assert!((large / sigma - 1.0).abs() < 0.015, "{large} {sigma}");
        let y: Vec<f64> = (0..3000)
            .map(|k| {
                ginibre_moduli(200, 100 + k)
                    .iter()
                    .map(|&r| u.eval(pt(r, 0.0)))
                    .sum::<f64>()
            })
            .collect();
        let m = y.iter().sum::<f64>() / 3000.0;
        let v = y.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 2999.0;
        assert!((v / exact - 1.0).abs() < 0.12, "{v} {exact}");
    }
}
