//! Verification harness: linear statistics, moment generating functions,
//! sub-Gaussian and Chernoff checks, `H^{-s}` discrepancies, mesoscopic
//! statistics and fluctuation variances.

mod fluct;
mod mgf;
mod wce;

pub use fluct::{bulk_bump, fluctuation_variance, mesoscopic_statistic, radial_variance_ginibre, VarianceReport};
pub use mgf::{
    chernoff_convert, corollary_speed, default_speed, deviation_frequency, empirical_log_mgf, empirical_log_mgf_values,
    exact_log_mgf_beta1, verify_subgaussian, MGFReport, SubGaussianVerdict,
};
pub use wce::{l_max_for, spectral_norm_sq, spherical_expected_wce_sq, tail_sum, wce, wce_pairwise, WceReport};

use crate::equilibrium::EquilibriumResult;
use crate::potentials::TestFunction;
use crate::sampling::Configuration;

/// `U_N = (1/N) sum u(x_i)`.
pub fn linear_statistic(config: &Configuration, u: &TestFunction) -> f64 {
    config.points.iter().map(|&z| u.eval(z)).sum::<f64>() / config.points.len() as f64
}

/// `int u dmu_phi` over the cells of a solve.
pub fn equilibrium_mean(u: &TestFunction, eq: &EquilibriumResult) -> f64 {
    let rings = &eq.grid().rings;
    let mut s = 0.0;
    let mut mass = 0.0;
    for (z, &w) in rings.nodes().zip(&eq.masses) {
        if w != 0.0 {
            s += w * u.eval(z);
            mass += w;
        }
    }
    s / mass
}
