//! Partition functions of the sphere gas: Gram determinant, closed form,
//! two-point quadrature at beta = 1/2 and thermodynamic integration.

use coulomb_lab::determinantal::{
    brute_force_log_z, gibbs_lower_bound, holder_rhs, jensen_rhs, log_partition_beta1, log_z_fs, thermo_log_z,
    ThermoOptions,
};
use coulomb_lab::equilibrium::{Measure, SphereGrid};
use coulomb_lab::potentials::{Convention, Potential, TestFunction};

fn main() -> coulomb_lab::Result<()> {
    let fs = Potential::fs();
    for n in [2, 8, 32, 128] {
        let gram = log_partition_beta1(&fs, n)?;
        println!(
            "N = {n:3}  log Z gram {:.10}  closed form {:.10}",
            gram.log_z,
            log_z_fs(n)
        );
    }

    let zero = TestFunction::constant(0.0);
    let conv = Convention::ExteriorNPlusP;
    let half = brute_force_log_z(&fs, &zero, 2, 0.5, conv)?;
    println!(
        "\nN = 2, beta = 1/2: log Z = {:.8} +- {:.1e}",
        half.log_z, half.error_bar
    );
    println!("  (1/beta) log Z   {:.6}", half.log_z / 0.5);
    println!("  holder upper     {:.6}", holder_rhs(&fs, 2, 0.5)?);
    println!("  jensen upper     {:.6}", jensen_rhs(&fs, 2, 0.5)?);
    let grid = SphereGrid::new(1.0 / 64.0);
    println!(
        "  gibbs at mu0     {:.6}",
        gibbs_lower_bound(&fs, &Measure::mu0(&grid), 2, 0.5, conv)?
    );

    let mut opts = ThermoOptions::new(conv);
    opts.steps = 8_000;
    let thermo = thermo_log_z(&fs, 2, 0.5, &opts)?;
    println!(
        "  thermodynamic    {:.6} +- {:.1e}",
        thermo.log_z / 0.5,
        thermo.error_bar / 0.5
    );
    Ok(())
}
