//! Partition functions of the gas.
//!
//! At `beta = 1` the partition function is `N!` times a Gram determinant of
//! monomials. For `beta < 1` there are brute-force quadrature for `N <= 3`
//! and thermodynamic integration anchored at the Gram value. The module also
//! carries the error sequence, the Hölder, Jensen and Gibbs bounds, and
//! Bergman measures with their `H^{-1}` distances.

mod bergman;
mod brute;
mod gram;
mod partition;
mod thermo;

pub use bergman::{bergman_density, h_minus1_distance, BergmanDensity};
pub use brute::{angular_mean, brute_force_log_z, RadialPairDensity};
pub use gram::{
    cholesky, fs_moment, log_fs_moment, log_radial_moments, monomial_gram, planar_gram, GramFactor, GramMatrix,
};
pub use partition::{
    error_bound, error_sequence, error_sequence_beta1, fs_log_moment_sum, gibbs_lower_bound, holder_rhs, jensen_rhs,
    log_partition_beta1, log_partition_beta1_with, log_weight_integral, log_z_fs, log_z_weight, mean_energy_gap,
    universal_error, ErrorBound, ErrorSequenceReport,
};
pub use thermo::{thermo_log_z, ThermoOptions};

use crate::potentials::Convention;
use serde::{Deserialize, Serialize};

/// How a partition value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gram,
    BruteQuadrature,
    ThermoIntegration,
}

/// `log Z_{N,beta}[V]` with `V` built from `phi` by `convention`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub log_z: f64,
    pub n: usize,
    pub beta: f64,
    pub convention: Convention,
    pub method: Method,
    pub error_bar: f64,
}
