use super::{integrated_autocorr_time, rng_for, Configuration, SampleSet, SamplerConfig};
use crate::geometry::{from_sphere, to_sphere, Point};
use crate::potentials::{Convention, Potential};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// `H = -(1/2) sum_{i != j} log|z_i - z_j|^2 + sum V(z_i)` with `V = m phi` set by `convention`.
///
/// Returns `+inf` when a point sits on a pole of `phi`.
pub fn hamiltonian(
    config: &Configuration,
    phi: &Potential,
    n: usize,
    beta: f64,
    convention: Convention,
) -> Result<f64> {
    let m = convention.exponent(n, beta)?;
    let pts = &config.points;
    let mut pair = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i] - pts[j]).norm_sqr();
            if d == 0.0 {
                return Err(Error::Singular);
            }
            pair -= d.ln();
        }
    }
    let mut ext = 0.0;
    for &z in pts {
        let v = phi.eval(z);
        if v == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        ext += v;
    }
    Ok(pair + m * ext)
}

/// Change of `H` when point `k` moves to `w`, given cached `phi` values.
fn delta_h(pts: &[Point], phi_vals: &[f64], k: usize, w: Point, phi_w: f64, m: f64) -> f64 {
    if phi_w == f64::INFINITY || !w.re.is_finite() || !w.im.is_finite() {
        return f64::INFINITY;
    }
    let z = pts[k];
    let mut d = 0.0;
    for (j, &x) in pts.iter().enumerate() {
        if j != k {
            let a = (w - x).norm_sqr();
            if a == 0.0 {
                return f64::INFINITY;
            }
            d -= (a / (z - x).norm_sqr()).ln();
        }
    }
    d + m * (phi_w - phi_vals[k])
}

/// `log(rho0(z) / rho0(w))` for the `mu0` density `rho0`: the proposal is symmetric
/// with respect to `mu0`, not Lebesgue measure.
fn chart_jacobian(z: Point, w: Point) -> f64 {
    2.0 * ((1.0 + w.norm_sqr()) / (1.0 + z.norm_sqr())).ln()
}

/// Log acceptance probability of moving point `k` to `w`.
pub fn log_acceptance(points: &[Point], k: usize, w: Point, phi: &Potential, m: f64, beta: f64) -> f64 {
    let phi_vals: Vec<f64> = points.iter().map(|&z| phi.eval(z)).collect();
    let d = delta_h(points, &phi_vals, k, w, phi.eval(w), m);
    (-beta * d + chart_jacobian(points[k], w)).min(0.0)
}

/// Gaussian step of size `sigma` in `R^3` from the sphere point of `z`, projected back to the sphere.
pub fn sphere_proposal<R: Rng>(z: Point, sigma: f64, rng: &mut R) -> Point {
    let x = to_sphere(z);
    let y = [
        x[0] + sigma * rng.sample::<f64, _>(StandardNormal),
        x[1] + sigma * rng.sample::<f64, _>(StandardNormal),
        x[2] + sigma * rng.sample::<f64, _>(StandardNormal),
    ];
    let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    from_sphere([y[0] / r, y[1] / r, y[2] / r])
}

fn mu0_draw<R: Rng>(rng: &mut R) -> Point {
    let u: f64 = rng.random();
    let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    Point::from_polar((u / (1.0 - u)).sqrt(), theta)
}

/// Single-site Metropolis chain on stream 0 of `cfg.seed`.
pub fn mcmc_run(cfg: &SamplerConfig, phi: &Potential) -> Result<SampleSet> {
    run_chain(cfg, phi, 0)
}

/// Independent chains on streams `0..chains`, run concurrently and returned in stream order.
pub fn mcmc_chains(cfg: &SamplerConfig, phi: &Potential, chains: usize) -> Result<Vec<SampleSet>> {
    (0..chains as u64)
        .into_par_iter()
        .map(|c| run_chain(cfg, phi, c))
        .collect()
}

fn run_chain(cfg: &SamplerConfig, phi: &Potential, stream: u64) -> Result<SampleSet> {
    cfg.validate()?;
    let conv = cfg.potential_convention;
    conv.check(phi, cfg.n, cfg.beta)?;
    let m = conv.exponent(cfg.n, cfg.beta)?;
    let beta = cfg.beta;
    let n = cfg.n;
    let mut rng = rng_for(cfg.seed, stream);

    let mut pts: Vec<Point> = Vec::with_capacity(n);
    while pts.len() < n {
        let z = mu0_draw(&mut rng);
        if phi.eval(z).is_finite() && !pts.contains(&z) {
            pts.push(z);
        }
    }
    let mut phi_vals: Vec<f64> = pts.iter().map(|&z| phi.eval(z)).collect();
    let mut h = hamiltonian(&Configuration::new(pts.clone()), phi, n, beta, conv)?;

    let mut sigma = cfg.proposal_sigma;
    let mut window_acc = 0usize;
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let mut trace = Vec::with_capacity(cfg.steps - cfg.burn_in);
    let mut configs = Vec::new();
    let mut energies = Vec::new();

    for sweep in 0..cfg.steps {
        for _ in 0..n {
            let k = rng.random_range(0..n);
            let w = sphere_proposal(pts[k], sigma, &mut rng);
            let phi_w = phi.eval(w);
            let d = delta_h(&pts, &phi_vals, k, w, phi_w, m);
            let log_a = -beta * d + chart_jacobian(pts[k], w);
            let u: f64 = rng.random();
            if d.is_finite() && (log_a >= 0.0 || u.ln() < log_a) {
                pts[k] = w;
                phi_vals[k] = phi_w;
                h += d;
                window_acc += 1;
                if sweep >= cfg.burn_in {
                    accepted += 1;
                }
            }
            if sweep >= cfg.burn_in {
                proposed += 1;
            }
        }
        if sweep < cfg.burn_in {
            if (sweep + 1) % 10 == 0 {
                let rate = window_acc as f64 / (10 * n) as f64;
                if rate < 0.3 {
                    sigma *= 0.8;
                } else if rate > 0.5 {
                    sigma = (sigma * 1.25).min(2.0);
                }
                window_acc = 0;
            }
            continue;
        }
        trace.push(h);
        if (sweep - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            configs.push(Configuration::new(pts.clone()));
            energies.push(h);
        }
    }
    if accepted == 0 {
        return Err(Error::ZeroAcceptance);
    }
    Ok(SampleSet {
        configs,
        acceptance_rate: accepted as f64 / proposed as f64,
        autocorr_time_estimate: integrated_autocorr_time(&trace),
        seed: cfg.seed,
        energies,
        proposal_sigma: sigma,
        thin: cfg.thin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;
    use crate::potentials::TestFunction;

    #[test]
    fn hamiltonian_examples() {
        let zero = Potential::fs().scaled(0.0);
        let c = Configuration::new(vec![pt(0.0, 0.0), pt(1.0, 0.0)]);
        assert_eq!(hamiltonian(&c, &zero, 2, 1.0, Convention::ExteriorNPhi).unwrap(), 0.0);
        let c = Configuration::new(vec![pt(0.0, 0.0), pt(2.0, 0.0)]);
        let h = hamiltonian(&c, &Potential::quad(1.0), 2, 1.0, Convention::ExteriorNPhi).unwrap();
        assert!((h - (8.0 - 4f64.ln())).abs() < 1e-14);
        let c = Configuration::new(vec![pt(1.0, 1.0), pt(1.0, 1.0)]);
        assert!(matches!(
            hamiltonian(&c, &Potential::quad(1.0), 2, 1.0, Convention::ExteriorNPhi),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn translation_moves_only_the_external_part() {
        let phi = Potential::quad(1.0);
        let pts = vec![pt(0.1, 0.2), pt(-0.3, 0.5), pt(0.7, -0.4)];
        let c = pt(0.25, -0.15);
        let a = Configuration::new(pts.clone());
        let b = Configuration::new(pts.iter().map(|z| z + c).collect());
        let dh = hamiltonian(&b, &phi, 3, 1.0, Convention::ExteriorNPhi).unwrap()
            - hamiltonian(&a, &phi, 3, 1.0, Convention::ExteriorNPhi).unwrap();
        let dv: f64 = pts.iter().map(|&z| 3.0 * ((z + c).norm_sqr() - z.norm_sqr())).sum();
        assert!((dh - dv).abs() < 1e-12);
    }

    #[test]
    fn detailed_balance() {
        let phi = Potential::fs().plus_test(&TestFunction::real_part().scaled(0.3));
        let beta = 0.5;
        let m = Convention::ExteriorNPlusP.exponent(2, beta).unwrap();
        let mut rng = rng_for(11, 0);
        for _ in 0..100 {
            let x = vec![mu0_draw(&mut rng), mu0_draw(&mut rng)];
            let k = rng.random_range(0..2);
            let w = sphere_proposal(x[k], 0.5, &mut rng);
            let mut y = x.clone();
            y[k] = w;
            let fwd = log_acceptance(&x, k, w, &phi, m, beta);
            let bwd = log_acceptance(&y, k, x[k], &phi, m, beta);
            let hx = hamiltonian(
                &Configuration::new(x.clone()),
                &phi,
                2,
                beta,
                Convention::ExteriorNPlusP,
            )
            .unwrap();
            let hy = hamiltonian(
                &Configuration::new(y.clone()),
                &phi,
                2,
                beta,
                Convention::ExteriorNPlusP,
            )
            .unwrap();
            let target = -beta * (hy - hx) + chart_jacobian(x[k], w);
            assert!(
                (fwd - bwd - target).abs() < 1e-9 * (1.0 + target.abs()),
                "{fwd} {bwd} {target}"
            );
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let mut cfg = SamplerConfig::new(8, 0.5, Convention::ExteriorNPhi);
        cfg.steps = 300;
        cfg.burn_in = 100;
        cfg.seed = 5;
        let a = mcmc_run(&cfg, &Potential::quad(1.0)).unwrap();
        let b = mcmc_run(&cfg, &Potential::quad(1.0)).unwrap();
        assert_eq!(a.configs, b.configs);
        assert_eq!(a.energies, b.energies);
        assert!(
            a.acceptance_rate > 0.2 && a.acceptance_rate < 0.7,
            "{}",
            a.acceptance_rate
        );
        let chains = mcmc_chains(&cfg, &Potential::quad(1.0), 3).unwrap();
        assert_eq!(chains[0].configs, a.configs);
        assert_ne!(chains[1].configs, a.configs);
    }

    #[test]
    fn rejects_divergent_convention() {
        let cfg = SamplerConfig::new(8, 1.0, Convention::ExteriorNPhi);
        assert!(matches!(mcmc_run(&cfg, &Potential::fs()), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn spherical_chain_is_balanced() {
        let mut cfg = SamplerConfig::new(16, 1.0, Convention::AdjointNPlus1);
        cfg.steps = 4200;
        cfg.burn_in = 200;
        cfg.thin = 10;
        cfg.seed = 3;
        let set = SampleSet::pooled(mcmc_chains(&cfg, &Potential::fs(), 2).unwrap());
        let means: Vec<f64> = set
            .configs
            .iter()
            .map(|c| c.points.iter().map(|&z| crate::geometry::zonal(z)).sum::<f64>() / 16.0)
            .collect();
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        let se = super::super::batch_means_se(&means, 20);
        assert!(mean.abs() < 3.0 * se, "{mean} {se}");
    }
}
