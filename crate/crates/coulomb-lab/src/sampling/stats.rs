use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Kolmogorov–Smirnov statistic with its asymptotic p-value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub effective_n: f64,
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p(d: f64, en: f64) -> f64 {
    let en = en.sqrt();
    kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample test of `a` against `b`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = na * nb / (na + nb);
    KsResult {
        statistic: d,
        p_value: ks_p(d, en),
        effective_n: en,
    }
}

/// One-sample test of `a` against the continuous CDF `cdf`.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let a = sorted(a);
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    KsResult {
        statistic: d,
        p_value: ks_p(d, n),
        effective_n: n,
    }
}

/// `P(chi^2_dof > x)`.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).map(|c| c.sf(x)).unwrap_or(f64::NAN)
}

/// Integrated autocorrelation time with a self-consistent window (`W >= 5 tau`).
pub fn integrated_autocorr_time(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return 1.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for t in 1..n / 2 {
        let c = (0..n - t).map(|i| (x[i] - mean) * (x[i + t] - mean)).sum::<f64>() / n as f64;
        tau += 2.0 * c / c0;
        if t as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Standard error of the mean from `batches` contiguous batch means.
pub fn batch_means_se(x: &[f64], batches: usize) -> f64 {
    let b = batches.min(x.len()).max(2);
    let size = x.len() / b;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..b)
        .map(|k| x[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / b as f64;
    let v = means.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (v / b as f64).sqrt()
}
