//! Checks the sub-Gaussian bound for the zonal statistic on the spherical ensemble.

use coulomb_lab::determinantal::error_sequence_beta1;
use coulomb_lab::deviations::{
    chernoff_convert, default_speed, deviation_frequency, empirical_log_mgf, exact_log_mgf_beta1, linear_statistic,
    verify_subgaussian,
};
use coulomb_lab::potentials::{h1_norm_sq, Convention, Potential, TestFunction};
use coulomb_lab::sampling::{spherical_batch, SampleSet};

fn main() -> coulomb_lab::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let reps = 1000;
    let fs = Potential::fs();
    let u = TestFunction::zonal();
    let samples = SampleSet::exact(spherical_batch(n, reps, 5)?, 5);
    let speed = default_speed(n, 1.0)?;
    let ts = [-0.5, -0.05, -0.02, 0.02, 0.05, 0.5];
    let report = empirical_log_mgf(&samples, &u, 0.0, &ts, speed)?;
    let eps = error_sequence_beta1(&fs, n)?;

    println!(
        "{:>6} {:>11} {:>11} {:>11} {:>8}",
        "t", "empirical", "exact", "bound", "trusted"
    );
    for v in verify_subgaussian(&report, &u, &eps, n, 1.0)? {
        let exact = exact_log_mgf_beta1(&fs, &u, 0.0, n, Convention::AdjointNPlus1, v.t, speed)?;
        println!(
            "{:6.2} {:11.4} {:11.4} {:11.4} {:>8}",
            v.t, v.lhs, exact, v.rhs, v.trusted
        );
    }

    let x: Vec<f64> = samples.configs.iter().map(|c| linear_statistic(c, &u)).collect();
    for delta in [0.02, 0.05, 0.1] {
        let bound = chernoff_convert(h1_norm_sq(&u)?, delta, speed, eps.total)?;
        println!(
            "P(|U_N| > {delta}) = {:.4}, Chernoff bound {:.3e}",
            deviation_frequency(&x, delta),
            bound.min(1.0)
        );
    }
    Ok(())
}
