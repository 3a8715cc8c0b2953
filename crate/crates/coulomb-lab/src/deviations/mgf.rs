use super::linear_statistic;
use crate::determinantal::{log_partition_beta1_with, ErrorSequenceReport};
use crate::potentials::{h1_norm_sq, p_of_beta, Convention, Potential, TestFunction};
use crate::sampling::{rng_for, SampleSet};
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const BOOTSTRAP: usize = 400;
const MIN_SAMPLES: f64 = 200.0;
const MIN_TILTED_ESS: f64 = 30.0;

/// Empirical `log E exp(speed t (U_N - u_bar))` on a grid of `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MGFReport {
    pub t_grid: Vec<f64>,
    pub log_mgf: Vec<f64>,
    /// Half width of the 95% bootstrap percentile interval.
    pub ci_half_width: Vec<f64>,
    pub n_samples: usize,
    pub speed: f64,
    /// Effective sample size of the tilted weights is at least 30.
    pub trusted: Vec<bool>,
    /// The top 1% of samples carry more than half the tilted weight.
    pub heavy_tail: Vec<bool>,
}

/// One side-by-side check of the sub-Gaussian inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubGaussianVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub epsilon_term: f64,
    pub t: f64,
    pub ci_half_width: f64,
    pub trusted: bool,
    pub passed: bool,
}

/// `N (N + p) beta`.
pub fn default_speed(n: usize, beta: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(nf * (nf + p_of_beta(beta)?) * beta)
}

/// `N (N + 1)`, the speed printed in the corollary. Equal to the default at `beta = 1`.
pub fn corollary_speed(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf + 1.0)
}

fn log_mean_exp(x: &[f64], idx: Option<&[usize]>, a: f64) -> f64 {
    let get = |k: usize| a * idx.map_or(x[k], |i| x[i[k]]);
    let len = idx.map_or(x.len(), |i| i.len());
    let max = (0..len).map(get).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = (0..len).map(|k| (get(k) - max).exp()).sum();
    max + (s / len as f64).ln()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Log-MGF of centred values `x` at `speed * t`, with bootstrap intervals on streams of `seed`.
pub fn empirical_log_mgf_values(x: &[f64], t_grid: &[f64], speed: f64, seed: u64) -> MGFReport {
    let n = x.len();
    let resamples: Vec<Vec<usize>> = (0..BOOTSTRAP as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, b);
            (0..n).map(|_| rng.random_range(0..n)).collect()
        })
        .collect();
    let mut log_mgf = Vec::new();
    let mut ci = Vec::new();
    let mut trusted = Vec::new();
    let mut heavy = Vec::new();
    for &t in t_grid {
        let a = speed * t;
        if t == 0.0 {
            log_mgf.push(0.0);
            ci.push(0.0);
            trusted.push(true);
            heavy.push(false);
            continue;
        }
        log_mgf.push(log_mean_exp(x, None, a));
        let mut boots: Vec<f64> = resamples.iter().map(|idx| log_mean_exp(x, Some(idx), a)).collect();
        boots.sort_by(f64::total_cmp);
        ci.push(0.5 * (quantile(&boots, 0.975) - quantile(&boots, 0.025)));

        let max = x.iter().map(|v| a * v).fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = x.iter().map(|v| (a * v - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let ess = total * total / w.iter().map(|v| v * v).sum::<f64>();
        trusted.push(ess >= MIN_TILTED_ESS);
        w.sort_by(|p, q| q.total_cmp(p));
        let top: f64 = w[..n.div_ceil(100)].iter().sum();
        heavy.push(top > 0.5 * total);
    }
    MGFReport {
        t_grid: t_grid.to_vec(),
        log_mgf,
        ci_half_width: ci,
        n_samples: n,
        speed,
        trusted,
        heavy_tail: heavy,
    }
}

/// Log-MGF of `U_N - u_bar` over a sample set. Needs at least 200 effectively independent samples.
pub fn empirical_log_mgf(
    samples: &SampleSet,
    u: &TestFunction,
    u_bar: f64,
    t_grid: &[f64],
    speed: f64,
) -> Result<MGFReport> {
    let ess = samples.effective_size();
    if ess < MIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "{ess:.0} effective samples, need {MIN_SAMPLES}"
        )));
    }
    let x: Vec<f64> = samples.configs.iter().map(|c| linear_statistic(c, u) - u_bar).collect();
    Ok(empirical_log_mgf_values(&x, t_grid, speed, samples.seed))
}

/// Compares each estimate with `speed (t^2/2 ||u||^2_{H^1} + epsilon)`.
///
/// A verdict passes when the estimate lies below the bound plus three bootstrap half widths.
pub fn verify_subgaussian(
    report: &MGFReport,
    u: &TestFunction,
    eps: &ErrorSequenceReport,
    n: usize,
    beta: f64,
) -> Result<Vec<SubGaussianVerdict>> {
    if eps.n != n || (eps.beta - beta).abs() > 1e-12 {
        return Err(Error::Convention(format!(
            "error sequence is for N = {}, beta = {}",
            eps.n, eps.beta
        )));
    }
    let h1 = h1_norm_sq(u)?;
    Ok(report
        .t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let lhs = report.log_mgf[k];
            let rhs = report.speed * (0.5 * t * t * h1 + eps.total);
            let ci = report.ci_half_width[k];
            SubGaussianVerdict {
                lhs,
                rhs,
                margin: rhs - lhs,
                epsilon_term: eps.total,
                t,
                ci_half_width: ci,
                trusted: report.trusted[k],
                passed: lhs <= rhs + 3.0 * ci,
            }
        })
        .collect())
}

/// Exact `log E exp(speed t (U_N - u_bar))` at `beta = 1` as a ratio of Gram determinants.
pub fn exact_log_mgf_beta1(
    phi: &Potential,
    u: &TestFunction,
    u_bar: f64,
    n: usize,
    convention: Convention,
    t: f64,
    speed: f64,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let m = convention.exponent(n, 1.0)?;
    let a = speed * t;
    let tilted = phi.plus_test(&u.scaled(-a / (n as f64 * m)));
    let z1 = log_partition_beta1_with(&tilted, n, convention)?.log_z;
    let z0 = log_partition_beta1_with(phi, n, convention)?.log_z;
    Ok(z1 - z0 - a * u_bar)
}

/// Two-sided tail bound `2 exp(-speed (delta^2 / (2 B) - eps))` from a sub-Gaussian bound with proxy `B`.
pub fn chernoff_convert(variance_proxy: f64, delta: f64, speed: f64, eps: f64) -> Result<f64> {
    if !(variance_proxy > 0.0) {
        return Err(Error::Config(format!(
            "variance proxy {variance_proxy} must be positive"
        )));
    }
    Ok(2.0 * (-speed * (delta * delta / (2.0 * variance_proxy) - eps)).exp())
}

/// Fraction of `x` with `|x| > delta`.
pub fn deviation_frequency(x: &[f64], delta: f64) -> f64 {
    x.iter().filter(|v| v.abs() > delta).count() as f64 / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinantal::error_sequence_beta1;
    use crate::sampling::spherical_batch;

    #[test]
    fn zero_and_constant() {
        let x = vec![0.1, -0.2, 0.05, 0.3];
        let r = empirical_log_mgf_values(&x, &[0.0, 1.0], 2.0, 1);
        assert_eq!(r.log_mgf[0], 0.0);
        assert_eq!(r.ci_half_width[0], 0.0);
        let r = empirical_log_mgf_values(&[0.0; 50], &[-1.0, 0.5, 2.0], 10.0, 1);
        assert!(r.log_mgf.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn jensen_lower_bound_on_estimates() {
        let mut rng = rng_for(4, 0);
        let x: Vec<f64> = (0..500).map(|_| rng.random::<f64>() - 0.3).collect();
        let mean = x.iter().sum::<f64>() / 500.0;
        let r = empirical_log_mgf_values(&x, &[-1.0, -0.5, 0.5, 1.0], 3.0, 2);
        for (t, l) in r.t_grid.iter().zip(&r.log_mgf) {
            assert!(*l >= 3.0 * t * mean - 1e-12);
        }
    }

    #[test]
    fn chernoff_examples() {
        let lam = 7.0;
        assert!((chernoff_convert(1.0, 1.0, lam, 0.0).unwrap() - 2.0 * (-lam / 2.0).exp()).abs() < 1e-15);
        assert!(chernoff_convert(1.0, 0.0, lam, 0.1).unwrap() >= 2.0);
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let b = chernoff_convert(0.5, 0.05 * k as f64, 30.0, 0.0).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        let mut prev = 0.0;
        for k in 1..20 {
            let b = chernoff_convert(0.1 * k as f64, 0.3, 30.0, 0.0).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        assert!(chernoff_convert(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exact_mgf_matches_small_sample() {
        let n = 8;
        let u = TestFunction::zonal();
        let x: Vec<f64> = spherical_batch(n, 4000, 3)
            .unwrap()
            .iter()
            .map(|c| linear_statistic(c, &u))
            .collect();
        let speed = corollary_speed(n);
        let r = empirical_log_mgf_values(&x, &[-0.05, 0.05], speed, 3);
        for (k, &t) in r.t_grid.iter().enumerate() {
            let exact = exact_log_mgf_beta1(&Potential::fs(), &u, 0.0, n, Convention::AdjointNPlus1, t, speed).unwrap();
            assert!(r.trusted[k]);
            assert!(
                (r.log_mgf[k] - exact).abs() < 3.0 * r.ci_half_width[k] + 1e-3,
                "{} {exact}",
                r.log_mgf[k]
            );
        }
    }

    #[test]
    fn exact_spherical_mgf_obeys_the_bound() {
        let n = 16;
        let u = TestFunction::zonal();
        let eps = error_sequence_beta1(&Potential::fs(), n).unwrap();
        let speed = default_speed(n, 1.0).unwrap();
        for t in [-1.0, -0.5, 0.5, 1.0] {
            let lhs = exact_log_mgf_beta1(&Potential::fs(), &u, 0.0, n, Convention::AdjointNPlus1, t, speed).unwrap();
            let rhs = speed * (t * t / 3.0 + eps.total);
            assert!(lhs <= rhs + 1e-9, "{t}: {lhs} {rhs}");
        }
    }
}
