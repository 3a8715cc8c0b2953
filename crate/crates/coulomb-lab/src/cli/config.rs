use crate::geometry::pt;
use crate::potentials::{load_grid_potential, outer_radius_bound, Charge, Convention, Potential, TestFunction};
use crate::{Error, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EqSolve,
    Logz,
    ErrorSeq,
    Sample,
    VerifySubgaussian,
    Wce,
    Bergman,
    Mesoscopic,
    Variance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EqSolve => "eq-solve",
            Command::Logz => "logz",
            Command::ErrorSeq => "error-seq",
            Command::Sample => "sample",
            Command::VerifySubgaussian => "verify-subgaussian",
            Command::Wce => "wce",
            Command::Bergman => "bergman",
            Command::Mesoscopic => "mesoscopic",
            Command::Variance => "variance",
        }
    }
}

/// Where configurations come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Generalized eigenvalues, `phi = psi0`, `V = (N+1) phi`, `beta = 1`.
    Spherical,
    /// Ginibre eigenvalues, `phi = |z|^2`, `V = N phi`, `beta = 1`.
    Ginibre,
    /// Metropolis chains for the configured potential, convention and `beta`.
    Mcmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LogzMethod {
    /// Gram at `beta = 1`, quadrature for `N <= 3`, thermodynamic integration otherwise.
    Auto,
    Gram,
    Brute,
    Thermo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedChoice {
    /// `N (N + p) beta`.
    Default,
    /// `N (N + 1)`.
    Corollary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SampleFormat {
    Csv,
    Cgcf,
}

/// A built-in potential with its parameters, or a lattice file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSpec {
    /// `fs`, `quad`, `quad_charge`, `fs_bump` or `file`.
    pub name: String,
    pub lambda: f64,
    pub amplitude: f64,
    pub inner: f64,
    pub outer: f64,
    pub charges: Vec<Charge>,
    /// CSV with header `x,y,value`, used when `name` is `file`.
    pub path: Option<PathBuf>,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec {
            name: "fs".into(),
            lambda: 1.0,
            amplitude: 0.3,
            inner: 0.5,
            outer: 1.0,
            charges: Vec::new(),
            path: None,
        }
    }
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match self.name.as_str() {
            "fs" => Ok(Potential::fs()),
            "quad" => Ok(Potential::quad(self.lambda)),
            "quad_charge" => Potential::quad_charge(self.lambda, &self.charges),
            "fs_bump" => Ok(Potential::fs_bump(self.amplitude, self.inner, self.outer)),
            "file" => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("potential file needs a path".into()))?;
                load_grid_potential(path)
            }
            other => Err(Error::Config(format!("unknown potential {other}"))),
        }
    }
}

/// A linear-statistic test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSpec {
    /// `zonal`, `bump`, `constant` or `real_part`.
    pub name: String,
    pub center: [f64; 2],
    /// Outer radius of `bump`.
    pub radius: f64,
    pub height: f64,
}

impl Default for TestSpec {
    fn default() -> Self {
        TestSpec {
            name: "zonal".into(),
            center: [0.0, 0.0],
            radius: 0.6,
            height: 1.0,
        }
    }
}

impl TestSpec {
    pub fn build(&self) -> Result<TestFunction> {
        let c = pt(self.center[0], self.center[1]);
        match self.name.as_str() {
            "zonal" => Ok(TestFunction::zonal().scaled(self.height)),
            "bump" => {
                if !(self.radius > 0.0) {
                    return Err(Error::Config(format!("bump radius {} must be positive", self.radius)));
                }
                Ok(crate::deviations::bulk_bump(c, self.radius).scaled(self.height))
            }
            "constant" => Ok(TestFunction::constant(self.height)),
            "real_part" => Ok(TestFunction::real_part().scaled(self.height)),
            other => Err(Error::Config(format!("unknown test function {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub h: f64,
    /// Planar radius that must contain the droplet; the sphere grid itself has no edge.
    pub radius: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            h: 1.0 / 64.0,
            radius: None,
        }
    }
}

/// Chain controls; unset fields fall back to the defaults of the consumer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSpec {
    pub steps: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub chains: Option<usize>,
    pub sigma: Option<f64>,
}

/// One experiment. Every field has a default, so `{}` is a valid document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub potential: PotentialSpec,
    pub n: usize,
    pub beta: f64,
    pub convention: Convention,
    pub seed: u64,
    pub grid: GridSpec,
    pub output_dir: Option<PathBuf>,
    pub ensemble: Ensemble,
    pub u: TestSpec,
    pub t: Vec<f64>,
    pub speed: SpeedChoice,
    pub delta: f64,
    pub reps: usize,
    pub s: f64,
    pub l_max: Option<usize>,
    pub method: LogzMethod,
    pub mcmc: McmcSpec,
    pub z0: [f64; 2],
    pub scale: f64,
    /// Allowed relative error of `variance`.
    pub tolerance: f64,
    pub format: SampleFormat,
    /// A configuration file (CSV or CGCF) used by `wce` instead of sampling.
    pub points: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            potential: PotentialSpec::default(),
            n: 16,
            beta: 1.0,
            convention: Convention::AdjointNPlus1,
            seed: 0,
            grid: GridSpec::default(),
            output_dir: None,
            ensemble: Ensemble::Spherical,
            u: TestSpec::default(),
            t: vec![-1.0, -0.5, 0.5, 1.0],
            speed: SpeedChoice::Default,
            delta: 0.2,
            reps: 200,
            s: 2.5,
            l_max: None,
            method: LogzMethod::Auto,
            mcmc: McmcSpec::default(),
            z0: [0.0, 0.0],
            scale: 1.0,
            tolerance: 0.15,
            format: SampleFormat::Csv,
            points: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub level: Level,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Diagnostic {
            level: Level::Error,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Diagnostic {
            level: Level::Warning,
            message: message.into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Whether the command reads configurations from an exact ensemble.
    fn exact_ensemble(&self) -> bool {
        matches!(
            self.command,
            Some(Command::Sample | Command::VerifySubgaussian | Command::Mesoscopic | Command::Variance | Command::Wce)
        ) && self.ensemble != Ensemble::Mcmc
            && self.points.is_none()
    }

    /// Checks the configuration without running anything.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if !(self.beta > 0.0) {
            out.push(Diagnostic::error(format!("beta = {} must be positive", self.beta)));
        } else if self.beta > 2.0 {
            out.push(Diagnostic::error(format!(
                "beta = {} is outside (0, 1]; the sub-Gaussian bounds fail drastically for beta > 2",
                self.beta
            )));
        } else if self.beta > 1.0 {
            out.push(Diagnostic::error(format!(
                "beta = {} is outside (0, 1]; the range (1, 2] is an open problem and untested here",
                self.beta
            )));
        }
        if self.n == 0 {
            out.push(Diagnostic::error("n must be positive"));
        }
        if !(self.grid.h > 0.0 && self.grid.h <= 0.5) {
            out.push(Diagnostic::error(format!(
                "grid spacing h = {} outside (0, 1/2]",
                self.grid.h
            )));
        }
        if let Some(p) = &self.potential.path {
            if !p.exists() {
                out.push(Diagnostic::error(format!(
                    "potential file {} does not exist",
                    p.display()
                )));
            }
        }
        if let Some(p) = &self.points {
            if !p.exists() {
                out.push(Diagnostic::error(format!("points file {} does not exist", p.display())));
            }
        }
        if let Err(e) = self.u.build() {
            out.push(Diagnostic::error(e.to_string()));
        }
        match self.command {
            Some(Command::Wce) if !(self.s > 1.0) => out.push(Diagnostic::error(format!(
                "smoothness order s = {} must exceed 1",
                self.s
            ))),
            Some(Command::VerifySubgaussian) if self.t.is_empty() => out.push(Diagnostic::error("t grid is empty")),
            Some(Command::Mesoscopic) if !(self.scale > 0.0 && self.scale <= 1.0) => out.push(Diagnostic::error(
                format!("blow-up scale {} outside (0, 1]", self.scale),
            )),
            _ => {}
        }
        if self.reps == 0 {
            out.push(Diagnostic::error("reps must be positive"));
        }
        if self.exact_ensemble() {
            if self.beta != 1.0 {
                out.push(Diagnostic::error(format!(
                    "exact ensembles are determinantal; beta = {} needs --ensemble mcmc",
                    self.beta
                )));
            }
            return out;
        }
        let phi = match self.potential.build() {
            Ok(p) => p,
            Err(e) => {
                out.push(Diagnostic::error(e.to_string()));
                return out;
            }
        };
        if self.beta > 0.0 && self.beta <= 1.0 && self.n > 0 {
            if let Err(e) = self.convention.check(&phi, self.n, self.beta) {
                out.push(Diagnostic::error(format!("partition function is infinite: {e}")));
            }
        }
        if let (Some(Command::EqSolve), Some(r)) = (self.command, self.grid.radius) {
            match outer_radius_bound(&phi, 1.0) {
                Ok(b) if r < b => out.push(Diagnostic::error(format!(
                    "grid radius {r} is below the outer-radius bound {b}"
                ))),
                Ok(_) => {}
                Err(e) => out.push(Diagnostic::warning(format!("no outer-radius bound: {e}"))),
            }
        }
        out
    }
}
