use super::{log_partition_beta1_with, Method, PartitionValue};
use crate::geometry::gauss_legendre_on;
use crate::potentials::{Convention, Potential};
use crate::sampling::{batch_means_se, mcmc_chains, SampleSet, SamplerConfig};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Sampler settings for thermodynamic integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoOptions {
    pub convention: Convention,
    /// Gauss–Legendre nodes in `beta'`.
    pub nodes: usize,
    pub chains: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Half-chain means further apart than this many standard errors abort the estimate.
    pub drift_tolerance: f64,
}

impl ThermoOptions {
    pub fn new(convention: Convention) -> Self {
        ThermoOptions {
            convention,
            nodes: 8,
            chains: 4,
            steps: 20_000,
            burn_in: 1_000,
            seed: 0,
            drift_tolerance: 5.0,
        }
    }
}

/// `-d/dbeta (beta H_beta)` for one configuration: the pair energy plus
/// `(m - 2/beta) sum phi` when `m` depends on `beta`, the full `H` otherwise.
fn path_derivative(set: &SampleSet, phi: &Potential, n: usize, convention: Convention, beta: f64) -> Result<Vec<f64>> {
    let m = convention.exponent(n, beta)?;
    let slope = match convention {
        Convention::ExteriorNPlusP => m - 2.0 / beta,
        _ => m,
    };
    set.configs
        .iter()
        .map(|c| {
            let pts = &c.points;
            let mut d = 0.0;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    d -= (pts[i] - pts[j]).norm_sqr().ln();
                }
            }
            let ext: f64 = pts.iter().map(|&z| phi.eval(z)).sum();
            let v = d + slope * ext;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Singular)
            }
        })
        .collect()
}

/// `log Z_{N,beta} = log Z_{N,1} + int_beta^1 E_{beta'}[D] dbeta'`, anchored at the Gram value.
///
/// The error bar is one propagated standard error from batch means.
pub fn thermo_log_z(phi: &Potential, n: usize, beta: f64, opts: &ThermoOptions) -> Result<PartitionValue> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    opts.convention.check(phi, n, beta)?;
    let anchor = log_partition_beta1_with(phi, n, opts.convention)?;
    if beta == 1.0 {
        return Ok(PartitionValue {
            convention: opts.convention,
            ..anchor
        });
    }
    let (xs, ws) = gauss_legendre_on(opts.nodes, beta, 1.0);
    let mut integral = 0.0;
    let mut var = 0.0;
    for (k, (&b, &w)) in xs.iter().zip(&ws).enumerate() {
        let cfg = SamplerConfig {
            n,
            beta: b,
            potential_convention: opts.convention,
            steps: opts.steps,
            burn_in: opts.burn_in,
            thin: 1,
            proposal_sigma: 1.0 / (n as f64).sqrt(),
            seed: opts.seed.wrapping_add(k as u64 * 0x9E37_79B9),
        };
        let chains = mcmc_chains(&cfg, phi, opts.chains)?;
        let mut means = Vec::new();
        let mut ses = Vec::new();
        let mut halves = (Vec::new(), Vec::new());
        for set in &chains {
            let d = path_derivative(set, phi, n, opts.convention, b)?;
            let h = d.len() / 2;
            halves.0.extend_from_slice(&d[..h]);
            halves.1.extend_from_slice(&d[h..]);
            means.push(d.iter().sum::<f64>() / d.len() as f64);
            ses.push(batch_means_se(&d, 20));
        }
        let c = means.len() as f64;
        let mean = means.iter().sum::<f64>() / c;
        let se = (ses.iter().map(|s| s * s).sum::<f64>()).sqrt() / c;
        let (m1, m2) = (mean_of(&halves.0), mean_of(&halves.1));
        if (m1 - m2).abs() > opts.drift_tolerance * 2.0 * se {
            return Err(Error::NonConvergence {
                iterations: opts.steps,
                residual: (m1 - m2).abs(),
            });
        }
        integral += w * mean;
        var += (w * se).powi(2);
    }
    Ok(PartitionValue {
        log_z: anchor.log_z + integral,
        n,
        beta,
        convention: opts.convention,
        method: Method::ThermoIntegration,
        error_bar: var.sqrt(),
    })
}

fn mean_of(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinantal::{brute_force_log_z, jensen_rhs};
    use crate::potentials::TestFunction;

    #[test]
    fn beta_one_is_the_gram_value() {
        let v = thermo_log_z(&Potential::fs(), 4, 1.0, &ThermoOptions::new(Convention::AdjointNPlus1)).unwrap();
        assert_eq!(v.error_bar, 0.0);
        assert_eq!(v.method, Method::Gram);
        assert!((v.log_z - crate::determinantal::log_z_fs(4)).abs() < 1e-10);
    }

    #[test]
    fn two_points_match_brute_force() {
        let phi = Potential::fs();
        let mut opts = ThermoOptions::new(Convention::ExteriorNPlusP);
        opts.seed = 21;
        let t = thermo_log_z(&phi, 2, 0.5, &opts).unwrap();
        let b = brute_force_log_z(&phi, &TestFunction::constant(0.0), 2, 0.5, Convention::ExteriorNPlusP).unwrap();
        let bar = t.error_bar + b.error_bar;
        assert!(
            (t.log_z - b.log_z).abs() <= 2.0 * bar,
            "{} {} {}",
            t.log_z,
            b.log_z,
            bar
        );
        assert!(t.error_bar < 0.05, "{}", t.error_bar);
    }

    #[test]
    fn jensen_bound_for_ginibre_weight() {
        let phi = Potential::quad(1.0);
        let mut opts = ThermoOptions::new(Convention::ExteriorNPlusP);
        opts.steps = 6_000;
        opts.seed = 8;
        let t = thermo_log_z(&phi, 16, 0.5, &opts).unwrap();
        let rhs = jensen_rhs(&phi, 16, 0.5).unwrap();
        assert!(
            t.log_z / 0.5 <= rhs + 2.0 * t.error_bar / 0.5,
            "{} {}",
            t.log_z / 0.5,
            rhs
        );
    }
}
