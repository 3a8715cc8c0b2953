use super::config::{Command, Ensemble, ExperimentConfig, LogzMethod, SampleFormat, SpeedChoice};
use super::output::to_json;
use crate::determinantal::{
    bergman_density, brute_force_log_z, error_bound, error_sequence, h_minus1_distance, log_partition_beta1_with,
    thermo_log_z, ErrorBound, ErrorSequenceReport, PartitionValue, ThermoOptions,
};
use crate::deviations::{
    chernoff_convert, corollary_speed, default_speed, deviation_frequency, empirical_log_mgf, equilibrium_mean,
    exact_log_mgf_beta1, fluctuation_variance, l_max_for, linear_statistic, mesoscopic_statistic,
    radial_variance_ginibre, spherical_expected_wce_sq, verify_subgaussian, wce, wce_pairwise, SubGaussianVerdict,
    VarianceReport, WceReport,
};
use crate::equilibrium::{
    project_envelope, solve_radial, EquilibriumResult, GridFunction, Measure, Residuals, SolverOptions, SphereGrid,
};
use crate::geometry::{mu0_density, pt, HarmonicBasis};
use crate::potentials::{h1_norm_sq, p_of_beta, Convention, Potential, TestFunction};
use crate::sampling::{
    ginibre_batch, ginibre_moduli_batch, mcmc_chains, read_cgcf, read_csv, spherical_batch, write_cgcf, write_csv,
    Configuration, SampleSet, SamplerConfig,
};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// What a command produced.
pub struct Outcome {
    pub payload: String,
    /// `None` for commands without a verdict.
    pub passed: Option<bool>,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    fn new<T: Serialize>(value: &T, passed: Option<bool>) -> Result<Self> {
        Ok(Outcome {
            payload: to_json(value)?,
            passed,
            artifacts: Vec::new(),
        })
    }
}

pub fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    let command = cfg.command.ok_or_else(|| Error::Config("no command given".into()))?;
    match command {
        Command::EqSolve => eq_solve(cfg),
        Command::Logz => logz(cfg),
        Command::ErrorSeq => error_seq(cfg),
        Command::Sample => sample(cfg),
        Command::VerifySubgaussian => verify(cfg),
        Command::Wce => wce_cmd(cfg),
        Command::Bergman => bergman(cfg),
        Command::Mesoscopic => mesoscopic(cfg),
        Command::Variance => variance(cfg),
    }
}

fn equilibrium(phi: &Potential, h: f64) -> Result<EquilibriumResult> {
    let grid = Arc::new(SphereGrid::new(h));
    if phi.is_radial() {
        Ok(solve_radial(phi, 1e-4)?.to_result(phi, &grid))
    } else {
        project_envelope(phi, &grid, &SolverOptions::default())
    }
}

#[derive(Serialize)]
struct EqSolveOutput {
    potential: String,
    h: f64,
    cells: usize,
    droplet_cells: usize,
    free_energy: f64,
    residuals: Residuals,
    support_radii: [f64; 2],
}

fn eq_solve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let phi = cfg.potential.build()?;
    let grid = Arc::new(SphereGrid::new(cfg.grid.h));
    let eq = project_envelope(&phi, &grid, &SolverOptions::default())?;
    let (lo, hi) = eq.support_radii();
    let out = EqSolveOutput {
        potential: phi.name.clone(),
        h: cfg.grid.h,
        cells: eq.masses.len(),
        droplet_cells: eq.support_mask.iter().filter(|&&b| b).count(),
        free_energy: eq.free_energy,
        residuals: eq.residuals,
        support_radii: [lo, hi],
    };
    let mut outcome = Outcome::new(&out, None)?;
    if let Some(dir) = &cfg.output_dir {
        let mask = GridFunction::new(grid.clone(), eq.support_mask.iter().map(|&b| b as u8 as f64).collect());
        for (name, f) in [
            ("pphi.csv", &eq.p_phi),
            ("density.csv", &eq.density),
            ("mask.csv", &mask),
        ] {
            let path = dir.join(name);
            f.write_csv(&path)?;
            outcome.artifacts.push(path);
        }
    }
    Ok(outcome)
}

fn thermo_options(cfg: &ExperimentConfig, convention: Convention) -> ThermoOptions {
    let mut o = ThermoOptions::new(convention);
    o.seed = cfg.seed;
    o.steps = cfg.mcmc.steps.unwrap_or(o.steps);
    o.burn_in = cfg.mcmc.burn_in.unwrap_or(o.burn_in);
    o.chains = cfg.mcmc.chains.unwrap_or(o.chains);
    o
}

fn partition(cfg: &ExperimentConfig, phi: &Potential, convention: Convention) -> Result<PartitionValue> {
    let (n, beta) = (cfg.n, cfg.beta);
    let method = match cfg.method {
        LogzMethod::Auto if beta == 1.0 => LogzMethod::Gram,
        LogzMethod::Auto if n <= 3 => LogzMethod::Brute,
        LogzMethod::Auto => LogzMethod::Thermo,
        m => m,
    };
    match method {
        LogzMethod::Gram if beta != 1.0 => Err(Error::Config(format!("Gram determinants need beta = 1, got {beta}"))),
        LogzMethod::Gram => log_partition_beta1_with(phi, n, convention),
        LogzMethod::Brute => brute_force_log_z(phi, &TestFunction::constant(0.0), n, beta, convention),
        _ => thermo_log_z(phi, n, beta, &thermo_options(cfg, convention)),
    }
}

fn logz(cfg: &ExperimentConfig) -> Result<Outcome> {
    let phi = cfg.potential.build()?;
    Outcome::new(&partition(cfg, &phi, cfg.convention)?, None)
}

#[derive(Serialize)]
struct ErrorSeqOutput {
    partition: PartitionValue,
    error: ErrorSequenceReport,
    /// Explicit bound at `beta = 1`, when the potential admits one.
    bound: Option<ErrorBound>,
}

fn error_seq(cfg: &ExperimentConfig) -> Result<Outcome> {
    let phi = cfg.potential.build()?;
    let z = partition(cfg, &phi, Convention::ExteriorNPlusP)?;
    let error = error_sequence(&phi, cfg.n, cfg.beta, &z)?;
    let bound = if cfg.beta == 1.0 {
        error_bound(&phi, cfg.n).ok()
    } else {
        None
    };
    Outcome::new(
        &ErrorSeqOutput {
            partition: z,
            error,
            bound,
        },
        None,
    )
}

/// Samples with the law they were drawn from.
struct Source {
    samples: SampleSet,
    phi: Potential,
    convention: Convention,
}

impl Source {
    /// `phi` rescaled so the gas reads `V = (N + p) phi`.
    fn phi_n_plus_p(&self, n: usize, beta: f64) -> Result<Potential> {
        let m = self.convention.exponent(n, beta)?;
        let t = m / (n as f64 + p_of_beta(beta)?);
        Ok(if t == 1.0 { self.phi.clone() } else { self.phi.scaled(t) })
    }
}

fn draw(cfg: &ExperimentConfig) -> Result<Source> {
    let (n, reps, seed) = (cfg.n, cfg.reps, cfg.seed);
    Ok(match cfg.ensemble {
        Ensemble::Spherical => Source {
            samples: SampleSet::exact(spherical_batch(n, reps, seed)?, seed),
            phi: Potential::fs(),
            convention: Convention::AdjointNPlus1,
        },
        Ensemble::Ginibre => Source {
            samples: SampleSet::exact(ginibre_batch(n, reps, seed)?, seed),
            phi: Potential::quad(1.0),
            convention: Convention::ExteriorNPhi,
        },
        Ensemble::Mcmc => {
            let phi = cfg.potential.build()?;
            let mut sc = SamplerConfig::new(n, cfg.beta, cfg.convention);
            sc.seed = seed;
            sc.steps = cfg.mcmc.steps.unwrap_or(sc.steps);
            sc.burn_in = cfg.mcmc.burn_in.unwrap_or(sc.burn_in);
            sc.thin = cfg.mcmc.thin.unwrap_or(sc.thin);
            sc.proposal_sigma = cfg.mcmc.sigma.unwrap_or(sc.proposal_sigma);
            let chains = mcmc_chains(&sc, &phi, cfg.mcmc.chains.unwrap_or(4))?;
            Source {
                samples: SampleSet::pooled(chains),
                phi,
                convention: cfg.convention,
            }
        }
    })
}

#[derive(Serialize)]
struct SampleOutput {
    ensemble: Ensemble,
    n: usize,
    samples: usize,
    seed: u64,
    acceptance_rate: f64,
    autocorr_time: f64,
    proposal_sigma: f64,
    effective_size: f64,
    mean_modulus_sq: f64,
}

fn sample(cfg: &ExperimentConfig) -> Result<Outcome> {
    let src = draw(cfg)?;
    let s = &src.samples;
    let total = s.points().count() as f64;
    let out = SampleOutput {
        ensemble: cfg.ensemble,
        n: cfg.n,
        samples: s.len(),
        seed: cfg.seed,
        acceptance_rate: s.acceptance_rate,
        autocorr_time: s.autocorr_time_estimate,
        proposal_sigma: s.proposal_sigma,
        effective_size: s.effective_size(),
        mean_modulus_sq: s.points().map(|z| z.norm_sqr()).sum::<f64>() / total,
    };
    let mut outcome = Outcome::new(&out, None)?;
    if let Some(dir) = &cfg.output_dir {
        let sub = dir.join("configs");
        std::fs::create_dir_all(&sub)?;
        for (k, c) in s.configs.iter().enumerate() {
            let path = match cfg.format {
                SampleFormat::Csv => {
                    let p = sub.join(format!("config_{k:05}.csv"));
                    write_csv(c, &p)?;
                    p
                }
                SampleFormat::Cgcf => {
                    let p = sub.join(format!("config_{k:05}.cgcf"));
                    write_cgcf(c, &p)?;
                    p
                }
            };
            outcome.artifacts.push(path);
        }
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct ChernoffCheck {
    delta: f64,
    frequency: f64,
    bound: f64,
    passed: bool,
}

#[derive(Serialize)]
struct VerifyOutput {
    n: usize,
    beta: f64,
    speed: f64,
    u_bar: f64,
    h1_norm_sq: f64,
    epsilon: ErrorSequenceReport,
    verdicts: Vec<SubGaussianVerdict>,
    /// Exact log-MGF from Gram determinants at `beta = 1`.
    exact_log_mgf: Option<Vec<f64>>,
    chernoff: ChernoffCheck,
    passed: bool,
}

fn verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (n, beta) = (cfg.n, cfg.beta);
    let u = cfg.u.build()?;
    let src = draw(cfg)?;
    let phi = src.phi_n_plus_p(n, beta)?;
    let eq = equilibrium(&phi, cfg.grid.h)?;
    let u_bar = equilibrium_mean(&u, &eq);
    let speed = match cfg.speed {
        SpeedChoice::Default => default_speed(n, beta)?,
        SpeedChoice::Corollary => corollary_speed(n),
    };
    let z = partition(cfg, &phi, Convention::ExteriorNPlusP)?;
    let epsilon = error_sequence(&phi, n, beta, &z)?;
    let report = empirical_log_mgf(&src.samples, &u, u_bar, &cfg.t, speed)?;
    let verdicts = verify_subgaussian(&report, &u, &epsilon, n, beta)?;
    let exact_log_mgf = if beta == 1.0 {
        Some(
            cfg.t
                .iter()
                .map(|&t| exact_log_mgf_beta1(&phi, &u, u_bar, n, Convention::ExteriorNPlusP, t, speed))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let h1 = h1_norm_sq(&u)?;
    let x: Vec<f64> = src
        .samples
        .configs
        .iter()
        .map(|c| linear_statistic(c, &u) - u_bar)
        .collect();
    let frequency = deviation_frequency(&x, cfg.delta);
    let bound = chernoff_convert(h1, cfg.delta, speed, epsilon.total.max(0.0))?;
    let slack = 3.0 * (bound.min(1.0) * (1.0 - bound.min(1.0)) / x.len() as f64).sqrt();
    let chernoff = ChernoffCheck {
        delta: cfg.delta,
        frequency,
        bound,
        passed: frequency <= bound + slack,
    };
    let passed = verdicts.iter().all(|v| v.passed) && chernoff.passed;
    let out = VerifyOutput {
        n,
        beta,
        speed,
        u_bar,
        h1_norm_sq: h1,
        epsilon,
        verdicts,
        exact_log_mgf,
        chernoff,
        passed,
    };
    Outcome::new(&out, Some(passed))
}

#[derive(Serialize)]
struct WceOutput {
    n: usize,
    s: f64,
    l_max: usize,
    values: Vec<f64>,
    median: f64,
    mean_sq: f64,
    /// Exact `E wce^2` for the spherical ensemble.
    expected_sq: Option<f64>,
    tail_bound: f64,
}

fn read_points(path: &Path) -> Result<Configuration> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("cgcf") => read_cgcf(path),
        _ => read_csv(path),
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

fn wce_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let configs = match &cfg.points {
        Some(p) => vec![read_points(p)?],
        None => draw(cfg)?.samples.configs,
    };
    let n = configs[0].len();
    let l_max = cfg
        .l_max
        .unwrap_or_else(|| l_max_for(cfg.s, 2e-3 * spherical_expected_wce_sq(n, cfg.s)));
    let reports: Vec<WceReport> = if n > l_max {
        let basis = HarmonicBasis::new(l_max);
        configs
            .par_iter()
            .map(|c| wce(c, cfg.s, &basis))
            .collect::<Result<_>>()?
    } else {
        configs
            .par_iter()
            .map(|c| wce_pairwise(c, cfg.s, l_max))
            .collect::<Result<_>>()?
    };
    let values: Vec<f64> = reports.iter().map(|r| r.wce).collect();
    let out = WceOutput {
        n,
        s: cfg.s,
        l_max,
        median: median(&values),
        mean_sq: values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64,
        expected_sq: (cfg.points.is_none() && cfg.ensemble == Ensemble::Spherical)
            .then(|| spherical_expected_wce_sq(n, cfg.s)),
        tail_bound: reports.iter().map(|r| r.tail_bound).fold(0.0, f64::max),
        values,
    };
    Outcome::new(&out, None)
}

#[derive(Serialize)]
struct BergmanOutput {
    n: usize,
    m: f64,
    total_mass: f64,
    h_minus1_to_equilibrium: f64,
    /// `sup |B_N - mu0|` over the grid cells, for `psi0` with the adjoint convention.
    max_deviation_from_mu0: Option<f64>,
}

fn bergman(cfg: &ExperimentConfig) -> Result<Outcome> {
    let phi = cfg.potential.build()?;
    let b = bergman_density(&phi, cfg.n, cfg.convention)?;
    let grid = Arc::new(SphereGrid::new(cfg.grid.h));
    let eq = equilibrium(&phi, cfg.grid.h)?;
    let dist = h_minus1_distance(&b.to_measure(&grid), &Measure::from_result(&eq))?;
    let density = GridFunction::sample(grid.clone(), |z| b.eval(z));
    let fs_adjoint = cfg.potential.name == "fs" && cfg.convention == Convention::AdjointNPlus1;
    let max_dev = fs_adjoint.then(|| {
        grid.rings
            .nodes()
            .zip(&density.values)
            .map(|(z, v)| (v - mu0_density(z)).abs())
            .fold(0.0, f64::max)
    });
    let out = BergmanOutput {
        n: cfg.n,
        m: b.m,
        total_mass: b.total_mass(),
        h_minus1_to_equilibrium: dist,
        max_deviation_from_mu0: max_dev,
    };
    let mut outcome = Outcome::new(&out, None)?;
    if let Some(dir) = &cfg.output_dir {
        let path = dir.join("bergman.csv");
        density.write_csv(&path)?;
        outcome.artifacts.push(path);
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct MesoscopicOutput {
    z0: [f64; 2],
    scale: f64,
    samples: usize,
    mean: f64,
    sd: f64,
    se: f64,
}

fn mesoscopic(cfg: &ExperimentConfig) -> Result<Outcome> {
    let u = cfg.u.build()?;
    let src = draw(cfg)?;
    let phi = src.phi_n_plus_p(cfg.n, cfg.beta)?;
    let eq = equilibrium(&phi, cfg.grid.h)?;
    let z0 = pt(cfg.z0[0], cfg.z0[1]);
    let vals: Vec<f64> = src
        .samples
        .configs
        .par_iter()
        .map(|c| mesoscopic_statistic(c, &eq, &u, z0, cfg.scale))
        .collect::<Result<_>>()?;
    let k = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let sd = if k > 1.0 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let se = sd / src.samples.effective_size().sqrt();
    Outcome::new(
        &MesoscopicOutput {
            z0: cfg.z0,
            scale: cfg.scale,
            samples: vals.len(),
            mean,
            sd,
            se,
        },
        None,
    )
}

#[derive(Serialize)]
struct VarianceOutput {
    report: VarianceReport,
    /// Exact finite-`N` variance for radial `u` under Ginibre.
    exact_finite_n: Option<f64>,
    tolerance: f64,
    passed: bool,
}

fn variance(cfg: &ExperimentConfig) -> Result<Outcome> {
    let u = cfg.u.build()?;
    let target = h1_norm_sq(&u)?;
    let radial_ginibre = cfg.ensemble == Ensemble::Ginibre && u.is_radial_about_origin();
    let samples = if radial_ginibre {
        // moduli suffice for a radial statistic
        let configs = ginibre_moduli_batch(cfg.n, cfg.reps, cfg.seed)
            .into_iter()
            .map(|r| Configuration::new(r.into_iter().map(|x| pt(x, 0.0)).collect()))
            .collect();
        SampleSet::exact(configs, cfg.seed)
    } else {
        draw(cfg)?.samples
    };
    let report = fluctuation_variance(&samples, &u, target)?;
    let exact_finite_n = if radial_ginibre {
        Some(radial_variance_ginibre(cfg.n, &u)?)
    } else {
        None
    };
    let passed = report.relative_error.abs() <= cfg.tolerance;
    Outcome::new(
        &VarianceOutput {
            report,
            exact_finite_n,
            tolerance: cfg.tolerance,
            passed,
        },
        Some(passed),
    )
}
