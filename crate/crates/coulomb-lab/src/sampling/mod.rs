//! Configurations of the gas.
//!
//! Metropolis chains cover any admissible `(phi, N, beta)`. At `beta = 1`
//! two ensembles are sampled exactly: Ginibre eigenvalues for `phi = |z|^2`
//! and the spherical ensemble for `phi = psi0`.
//!
//! All randomness comes from `ChaCha20Rng` seeded with `seed_from_u64`.
//! Chain `c` of a run and draw `k` of a batch use stream `c` (resp. `k`) of
//! the same seed, so results do not depend on thread scheduling.

mod exact;
mod io;
mod mcmc;
mod stats;

pub use exact::{
    ginibre_batch, ginibre_moduli, ginibre_moduli_batch, ginibre_sample, spherical_batch, spherical_sample,
};
pub use io::{read_cgcf, read_csv, write_cgcf, write_csv};
pub use mcmc::{hamiltonian, log_acceptance, mcmc_chains, mcmc_run, sphere_proposal};
pub use stats::{
    batch_means_se, chi_square_sf, integrated_autocorr_time, kolmogorov_sf, ks_one_sample, ks_two_sample, KsResult,
};

use crate::geometry::Point;
use crate::potentials::Convention;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// One configuration `(x_1, ..., x_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub points: Vec<Point>,
}

impl Configuration {
    pub fn new(points: Vec<Point>) -> Self {
        Configuration { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Metropolis settings. `steps`, `burn_in` and `thin` count sweeps of `n` single-site moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub beta: f64,
    pub potential_convention: Convention,
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Initial step on the unit sphere; tuned during burn-in.
    pub proposal_sigma: f64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(n: usize, beta: f64, potential_convention: Convention) -> Self {
        SamplerConfig {
            n,
            beta,
            potential_convention,
            steps: 2000,
            burn_in: 500,
            thin: 1,
            proposal_sigma: 1.0 / (n as f64).sqrt(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::BetaOutOfRange(self.beta));
        }
        if self.steps <= self.burn_in {
            return Err(Error::Config(format!(
                "steps = {} must exceed burn_in = {}",
                self.steps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        if !(self.proposal_sigma > 0.0) {
            return Err(Error::Config("proposal_sigma must be positive".into()));
        }
        Ok(())
    }
}

/// Output of a chain, or of several chains pooled in chain order.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub configs: Vec<Configuration>,
    pub acceptance_rate: f64,
    /// Integrated autocorrelation time of the energy, in sweeps.
    pub autocorr_time_estimate: f64,
    pub seed: u64,
    /// Energy of each stored configuration.
    pub energies: Vec<f64>,
    /// Proposal step after tuning.
    pub proposal_sigma: f64,
    /// Sweeps between stored configurations.
    pub thin: usize,
}

impl SampleSet {
    /// Wraps independent exact draws.
    pub fn exact(configs: Vec<Configuration>, seed: u64) -> Self {
        SampleSet {
            configs,
            acceptance_rate: 1.0,
            autocorr_time_estimate: 1.0,
            seed,
            energies: Vec::new(),
            proposal_sigma: 0.0,
            thin: 1,
        }
    }

    /// Concatenates chains; rates are averaged and the autocorrelation time is the worst one.
    pub fn pooled(sets: Vec<SampleSet>) -> Self {
        let k = sets.len().max(1) as f64;
        let acceptance_rate = sets.iter().map(|s| s.acceptance_rate).sum::<f64>() / k;
        let autocorr_time_estimate = sets.iter().map(|s| s.autocorr_time_estimate).fold(0.0, f64::max);
        let seed = sets.first().map_or(0, |s| s.seed);
        let proposal_sigma = sets.iter().map(|s| s.proposal_sigma).sum::<f64>() / k;
        let thin = sets.first().map_or(1, |s| s.thin);
        let mut configs = Vec::new();
        let mut energies = Vec::new();
        for s in sets {
            configs.extend(s.configs);
            energies.extend(s.energies);
        }
        SampleSet {
            configs,
            acceptance_rate,
            autocorr_time_estimate,
            seed,
            energies,
            proposal_sigma,
            thin,
        }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Stored configurations divided by the autocorrelation time in storage units.
    pub fn effective_size(&self) -> f64 {
        self.configs.len() as f64 / (self.autocorr_time_estimate / self.thin as f64).max(1.0)
    }

    /// All points of all configurations.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.configs.iter().flat_map(|c| c.points.iter().copied())
    }
}

/// The generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
