//! Exact Ginibre and spherical draws next to a Metropolis chain for the same gas.
//!
//! cargo run --example sampling -- 32 out.cgcf

use coulomb_lab::potentials::{Convention, Potential};
use coulomb_lab::sampling::{
    ginibre_batch, ks_two_sample, mcmc_chains, spherical_sample, write_cgcf, SampleSet, SamplerConfig,
};

fn main() -> coulomb_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(24);
    let out = args.next();

    let exact = ginibre_batch(n, 400, 1)?;
    let exact_r2: Vec<f64> = exact
        .iter()
        .flat_map(|c| c.points.iter().map(|z| z.norm_sqr()))
        .collect();

    let mut cfg = SamplerConfig::new(n, 1.0, Convention::ExteriorNPhi);
    cfg.steps = 6_000;
    cfg.burn_in = 1_000;
    cfg.thin = 10;
    cfg.seed = 1;
    let chains = SampleSet::pooled(mcmc_chains(&cfg, &Potential::quad(1.0), 4)?);
    let chain_r2: Vec<f64> = chains.points().map(|z| z.norm_sqr()).collect();
    println!(
        "metropolis: {} configs, acceptance {:.3}, tau {:.1} sweeps, step {:.3}",
        chains.len(),
        chains.acceptance_rate,
        chains.autocorr_time_estimate,
        chains.proposal_sigma
    );

    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    println!(
        "mean |z|^2: exact {:.4}, chain {:.4}, limit 0.5",
        mean(&exact_r2),
        mean(&chain_r2)
    );
    let ks = ks_two_sample(&exact_r2, &chain_r2);
    println!(
        "two-sample KS on |z|^2: D = {:.4}, p = {:.3} (points within a draw are correlated)",
        ks.statistic, ks.p_value
    );

    let sphere = spherical_sample(n, 2)?;
    let south = sphere.points.iter().filter(|z| z.norm() > 1.0).count();
    println!("spherical draw: {south} of {n} points outside the unit disk");
    if let Some(path) = out {
        write_cgcf(&sphere, path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
