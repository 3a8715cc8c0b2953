//! Configuration-driven runner behind the `coulomb-lab` binary.
//!
//! Each subcommand reads an optional JSON [`ExperimentConfig`], applies flag
//! overrides, validates, runs, prints a JSON payload and, with an output
//! directory, writes `result.json` plus a [`RunManifest`]. Exit codes: 0 on
//! success, 2 when a verification fails, 1 on any error.

mod commands;
mod config;
mod output;

pub use commands::{dispatch, Outcome};
pub use config::{
    Command, Diagnostic, Ensemble, ExperimentConfig, GridSpec, Level, LogzMethod, McmcSpec, PotentialSpec,
    SampleFormat, SpeedChoice, TestSpec,
};
pub use output::{to_json, write_atomic};

use crate::potentials::{Charge, Convention};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

pub const THREADS_VAR: &str = "COULOMB_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "coulomb-lab",
    version,
    about = "Numerical laboratory for two-dimensional Coulomb gases"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Solve the obstacle problem for the envelope and equilibrium measure.
    EqSolve(Flags),
    /// log Z by Gram determinant, quadrature or thermodynamic integration.
    Logz(Flags),
    /// Error sequence with its explicit bound.
    ErrorSeq(Flags),
    /// Draw configurations.
    Sample(Flags),
    /// Empirical log-MGF against the sub-Gaussian bound.
    VerifySubgaussian(Flags),
    /// Worst-case integration error in H^{-s}.
    Wce(Flags),
    /// Bergman measure and its H^{-1} distance to equilibrium.
    Bergman(Flags),
    /// Blown-up linear statistics.
    Mesoscopic(Flags),
    /// Fluctuation variance against the Dirichlet norm.
    Variance(Flags),
    /// Print diagnostics for a configuration without running it.
    Validate(Flags),
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y] => Ok([x, y]),
        _ => Err(format!("expected x,y, got {s}")),
    }
}

fn parse_charge(s: &str) -> std::result::Result<Charge, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, a] => Ok(Charge { x, y, a }),
        _ => Err(format!("expected x,y,a, got {s}")),
    }
}

fn parse_convention(s: &str) -> std::result::Result<Convention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug, Clone, Default)]
struct Flags {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fs, quad, quad_charge, fs_bump or file.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Point charge x,y,a; repeatable.
    #[arg(long = "charge", value_parser = parse_charge, allow_hyphen_values = true)]
    charges: Vec<Charge>,
    /// Lattice potential CSV (x,y,value).
    #[arg(long)]
    potential_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// adjoint, exterior, exterior_NplusP.
    #[arg(long, value_parser = parse_convention)]
    convention: Option<Convention>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid spacing.
    #[arg(long)]
    h: Option<f64>,
    /// Planar radius that must contain the droplet.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    ensemble: Option<Ensemble>,
    /// zonal, bump, constant or real_part.
    #[arg(long)]
    u: Option<String>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    u_center: Option<[f64; 2]>,
    #[arg(long)]
    u_radius: Option<f64>,
    #[arg(long)]
    u_height: Option<f64>,
    /// MGF parameters; comma separated or repeated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t: Vec<f64>,
    #[arg(long, value_enum)]
    speed: Option<SpeedChoice>,
    /// Deviation threshold of the Chernoff check.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Sobolev order of the wce.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<LogzMethod>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    z0: Option<[f64; 2]>,
    /// Blow-up scale in (0, 1].
    #[arg(long)]
    scale: Option<f64>,
    /// Allowed relative error of the variance.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<SampleFormat>,
    /// Configuration file for wce.
    #[arg(long)]
    points: Option<PathBuf>,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl Flags {
    fn into_config(self, command: Option<Command>) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p)?)?,
            None => ExperimentConfig::default(),
        };
        if command.is_some() {
            c.command = command;
        }
        set!(c.potential.name, self.potential);
        set!(c.potential.lambda, self.lambda);
        set!(c.potential.amplitude, self.amplitude);
        if !self.charges.is_empty() {
            c.potential.charges = self.charges;
        }
        if let Some(p) = self.potential_file {
            c.potential.path = Some(p);
            c.potential.name = "file".into();
        }
        set!(c.n, self.n);
        set!(c.beta, self.beta);
        set!(c.convention, self.convention);
        set!(c.seed, self.seed);
        set!(c.grid.h, self.h);
        c.grid.radius = self.radius.or(c.grid.radius);
        c.output_dir = self.output_dir.or(c.output_dir);
        set!(c.ensemble, self.ensemble);
        set!(c.u.name, self.u);
        set!(c.u.center, self.u_center);
        set!(c.u.radius, self.u_radius);
        set!(c.u.height, self.u_height);
        if !self.t.is_empty() {
            c.t = self.t;
        }
        set!(c.speed, self.speed);
        set!(c.delta, self.delta);
        set!(c.reps, self.reps);
        set!(c.s, self.s);
        c.l_max = self.l_max.or(c.l_max);
        set!(c.method, self.method);
        c.mcmc.steps = self.steps.or(c.mcmc.steps);
        c.mcmc.burn_in = self.burn_in.or(c.mcmc.burn_in);
        c.mcmc.thin = self.thin.or(c.mcmc.thin);
        c.mcmc.chains = self.chains.or(c.mcmc.chains);
        c.mcmc.sigma = self.sigma.or(c.mcmc.sigma);
        set!(c.z0, self.z0);
        set!(c.scale, self.scale);
        set!(c.tolerance, self.tolerance);
        set!(c.format, self.format);
        c.points = self.points.or(c.points);
        Ok(c)
    }
}

/// Written last, atomically, into the output directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub artifacts: Vec<String>,
    pub passed: Option<bool>,
    pub summary: String,
    pub diagnostics: Vec<Diagnostic>,
}

/// Validates and runs one experiment, writing `result.json` and `manifest.json` when
/// the configuration names an output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<(Outcome, Option<RunManifest>)> {
    let start = Instant::now();
    let diagnostics = cfg.validate();
    let errors: Vec<&str> = diagnostics
        .iter()
        .filter(|d| d.level == Level::Error)
        .map(|d| d.message.as_str())
        .collect();
    if !errors.is_empty() {
        return Err(Error::Config(errors.join("; ")));
    }
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut outcome = dispatch(cfg)?;
    let Some(dir) = &cfg.output_dir else {
        return Ok((outcome, None));
    };
    let result = dir.join("result.json");
    write_atomic(&result, outcome.payload.as_bytes())?;
    outcome.artifacts.push(result);
    let summary = match outcome.passed {
        Some(true) => "passed",
        Some(false) => "failed",
        None => "completed",
    };
    let manifest = RunManifest {
        command: cfg.command.map_or("", |c| c.name()).into(),
        config: cfg.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        artifacts: outcome
            .artifacts
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).to_string_lossy().into_owned())
            .collect(),
        passed: outcome.passed,
        summary: summary.into(),
        diagnostics,
    };
    write_atomic(&dir.join("manifest.json"), to_json(&manifest)?.as_bytes())?;
    Ok((outcome, Some(manifest)))
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_VAR}={v} is not a count")))?;
    if k == 0 {
        return Err(Error::Config(format!("{THREADS_VAR} must be positive")));
    }
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    Ok(())
}

fn execute(sub: Sub) -> Result<i32> {
    configure_threads()?;
    let (flags, command) = match sub {
        Sub::EqSolve(f) => (f, Some(Command::EqSolve)),
        Sub::Logz(f) => (f, Some(Command::Logz)),
        Sub::ErrorSeq(f) => (f, Some(Command::ErrorSeq)),
        Sub::Sample(f) => (f, Some(Command::Sample)),
        Sub::VerifySubgaussian(f) => (f, Some(Command::VerifySubgaussian)),
        Sub::Wce(f) => (f, Some(Command::Wce)),
        Sub::Bergman(f) => (f, Some(Command::Bergman)),
        Sub::Mesoscopic(f) => (f, Some(Command::Mesoscopic)),
        Sub::Variance(f) => (f, Some(Command::Variance)),
        Sub::Validate(f) => {
            let cfg = f.into_config(None)?;
            let d = cfg.validate();
            print!("{}", to_json(&d)?);
            return Ok(if d.iter().any(|d| d.level == Level::Error) {
                1
            } else {
                0
            });
        }
    };
    let cfg = flags.into_config(command)?;
    let (outcome, _) = run(&cfg)?;
    print!("{}", outcome.payload);
    Ok(if outcome.passed == Some(false) { 2 } else { 0 })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> ExperimentConfig {
        let cli = Cli::try_parse_from(std::iter::once("coulomb-lab").chain(args.iter().copied())).unwrap();
        match cli.command {
            Sub::VerifySubgaussian(f) => f.into_config(Some(Command::VerifySubgaussian)).unwrap(),
            Sub::Logz(f) => f.into_config(Some(Command::Logz)).unwrap(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_override_defaults() {
        let c = parse(&[
            "logz",
            "--potential",
            "fs",
            "--n",
            "2",
            "--beta",
            "1",
            "--convention",
            "adjoint",
        ]);
        assert_eq!(c.command, Some(Command::Logz));
        assert_eq!(c.n, 2);
        assert_eq!(c.convention, Convention::AdjointNPlus1);
        let c = parse(&[
            "verify-subgaussian",
            "--t",
            "-0.5",
            "--t",
            "1",
            "--u-center",
            "-0.1,0.2",
            "--charge",
            "0.5,-0.5,0.2",
        ]);
        assert_eq!(c.t, vec![-0.5, 1.0]);
        assert_eq!(c.u.center, [-0.1, 0.2]);
        assert_eq!(
            c.potential.charges,
            vec![Charge {
                x: 0.5,
                y: -0.5,
                a: 0.2
            }]
        );
        let c = parse(&["verify-subgaussian", "--t=-1,-0.5,0.5"]);
        assert_eq!(c.t, vec![-1.0, -0.5, 0.5]);
    }

    #[test]
    fn bad_input_exits_one() {
        assert_eq!(main_with(["coulomb-lab", "logz", "--beta", "1.5"]), 1);
        assert_eq!(main_with(["coulomb-lab", "logz", "--convention", "exterior"]), 1);
        assert_eq!(main_with(["coulomb-lab", "nonsense"]), 1);
        assert_eq!(main_with(["coulomb-lab", "logz", "--config", "/nonexistent.json"]), 1);
    }
}
