use super::{log_fs_moment, monomial_gram, Method, PartitionValue};
use crate::equilibrium::{
    entropy, free_energy, project_envelope, solve_radial, Measure, Reference, SolverOptions, SphereGrid, DEFAULT_H,
};
use crate::geometry::{fs_potential, pt, GREEN_SHIFT};
use crate::potentials::{p_of_beta, Convention, Potential, TestFunction};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use std::f64::consts::PI;
use std::sync::Arc;

/// `sum_{j<N} log fs_moment(j, N+1)`, the log-determinant of the Fubini–Study Gram matrix.
pub fn fs_log_moment_sum(n: usize) -> f64 {
    (0..n).map(|j| log_fs_moment(j, n + 1).expect("j <= n - 1")).sum()
}

/// `log Z_{N,1}[(N+1) psi0]` in closed form.
pub fn log_z_fs(n: usize) -> f64 {
    ln_factorial(n as u64) + fs_log_moment_sum(n)
}

/// `log Z_{N,1}[(N+1) phi] = log N! + log det G`.
pub fn log_partition_beta1(phi: &Potential, n: usize) -> Result<PartitionValue> {
    log_partition_beta1_with(phi, n, Convention::AdjointNPlus1)
}

/// `log Z_{N,1}[m phi]` with `m` fixed by the convention.
pub fn log_partition_beta1_with(phi: &Potential, n: usize, convention: Convention) -> Result<PartitionValue> {
    convention.check(phi, n, 1.0)?;
    let m = convention.exponent(n, 1.0)?;
    let log_det = monomial_gram(phi, n, m)?.log_det()?;
    Ok(PartitionValue {
        log_z: ln_factorial(n as u64) + log_det,
        n,
        beta: 1.0,
        convention,
        method: Method::Gram,
        error_bar: 0.0,
    })
}

/// `log Z_{N,1}[V]` for the weight `e^{-V}`.
pub fn log_z_weight(v: &Potential, n: usize) -> Result<f64> {
    Ok(ln_factorial(n as u64) + monomial_gram(v, n, 1.0)?.log_det()?)
}

/// `log int e^{-m phi} dlambda`.
pub fn log_weight_integral(phi: &Potential, m: f64) -> Result<f64> {
    Ok(2.0 * monomial_gram(phi, 1, m)?.log_scale[0])
}

/// Specific and universal parts of the error sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSequenceReport {
    pub n: usize,
    pub beta: f64,
    pub specific: f64,
    pub universal: f64,
    pub total: f64,
}

/// The `phi`-independent part, with `F(psi0) = 1/2` and `int e^{-2 psi0} = pi`.
pub fn universal_error(n: usize, beta: f64) -> Result<f64> {
    let p = p_of_beta(beta)?;
    let nf = n as f64;
    let fs = log_z_fs(n) / (nf * (nf + 1.0)) + 0.5;
    Ok(-(nf + 1.0) / (nf + p) * fs - (1.0 / beta - 1.0) / (nf + p) * (PI.ln() + 1.0))
}

/// `epsilon_{N,beta}[phi]` from a partition value with `V = (N+p) phi`.
pub fn error_sequence(phi: &Potential, n: usize, beta: f64, z: &PartitionValue) -> Result<ErrorSequenceReport> {
    let matches =
        z.convention == Convention::ExteriorNPlusP || (beta == 1.0 && z.convention == Convention::AdjointNPlus1);
    if !matches || z.n != n || (z.beta - beta).abs() > 1e-12 {
        return Err(Error::Convention(format!(
            "error sequence needs V = (N+p) phi with N = {n}, beta = {beta}; got {} with N = {}, beta = {}",
            z.convention, z.n, z.beta
        )));
    }
    let p = p_of_beta(beta)?;
    let nf = n as f64;
    let f = free_energy(phi, &TestFunction::constant(0.0))?;
    let specific = -(z.log_z / (beta * nf * (nf + p)) + f);
    let universal = universal_error(n, beta)?;
    Ok(ErrorSequenceReport {
        n,
        beta,
        specific,
        universal,
        total: specific - universal,
    })
}

/// `epsilon_{N,1}[phi]` with the Gram partition function.
pub fn error_sequence_beta1(phi: &Potential, n: usize) -> Result<ErrorSequenceReport> {
    let z = log_partition_beta1(phi, n)?;
    error_sequence(phi, n, 1.0, &z)
}

/// Explicit bound `epsilon_{N,1}[phi] <= c_phi / N + log N / (2N)` for potentials of logarithmic growth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub n: usize,
    /// `2 max(0, -inf_S (phi - psi0)) + max(0, log_ratio) + log pi + 1/2`.
    pub c_phi: f64,
    /// `inf_S (phi - psi0)` over the support `S` of `mu_phi`.
    pub obstacle_inf: f64,
    /// `sup_S log(e^{2 phi} Laplacian(phi) / 4 pi)`.
    pub log_ratio: f64,
    pub bound: f64,
}

/// Support data of `mu_phi` as `(inf (phi - psi0), sup log(e^{2 phi} Laplacian(phi) / 4 pi))`.
fn support_extremes(phi: &Potential) -> Result<(f64, f64)> {
    let mut inf_g = f64::INFINITY;
    let mut sup_l = f64::NEG_INFINITY;
    let mut visit = |z, phi_z: f64| {
        inf_g = inf_g.min(phi_z - fs_potential(z));
        let lap = phi.laplacian(z);
        if lap > 0.0 {
            sup_l = sup_l.max((lap / (4.0 * PI)).ln() + 2.0 * phi_z);
        }
    };
    if phi.is_radial() {
        let env = solve_radial(phi, 1e-4)?;
        for &k in &env.vertices {
            visit(pt(env.s[k].exp(), 0.0), env.f[k]);
        }
    } else {
        let grid = Arc::new(SphereGrid::new(DEFAULT_H));
        let res = project_envelope(phi, &grid, &SolverOptions::default())?;
        for (z, &on) in grid.nodes().into_iter().zip(&res.support_mask) {
            if on {
                visit(z, phi.eval(z));
            }
        }
    }
    Ok((inf_g, sup_l))
}

pub fn error_bound(phi: &Potential, n: usize) -> Result<ErrorBound> {
    let (obstacle_inf, log_ratio) = support_extremes(phi)?;
    let c_phi = 2.0 * (-obstacle_inf).max(0.0) + log_ratio.max(0.0) + PI.ln() + 0.5;
    let nf = n as f64;
    Ok(ErrorBound {
        n,
        c_phi,
        obstacle_inf,
        log_ratio,
        bound: c_phi / nf + nf.ln() / (2.0 * nf),
    })
}

/// `log Z_{N,1}[(N+1) Phi] + (1/beta - 1) N log int e^{-2 Phi}`, an upper bound
/// for `(1/beta) log Z_{N,beta}[(N+p) Phi]`.
pub fn holder_rhs(phi_plus_u: &Potential, n: usize, beta: f64) -> Result<f64> {
    p_of_beta(beta)?;
    let z1 = log_partition_beta1(phi_plus_u, n)?.log_z;
    let norm = log_weight_integral(phi_plus_u, 2.0)?;
    Ok(z1 + (1.0 / beta - 1.0) * n as f64 * norm)
}

/// `(1/beta - 1) N log pi + log Z_{N,1}[(N+p) phi - (p-1) psi0]`, an upper bound
/// for `(1/beta) log Z_{N,beta}[(N+p) phi]` by Jensen against `mu0`.
pub fn jensen_rhs(phi: &Potential, n: usize, beta: f64) -> Result<f64> {
    let p = p_of_beta(beta)?;
    let nf = n as f64;
    let shift = TestFunction::radial(
        "fs",
        pt(0.0, 0.0),
        move |r| -(p - 1.0) * (r * r).ln_1p(),
        move |r| -(p - 1.0) * 2.0 * r / (1.0 + r * r),
        None,
    );
    let v = phi.scaled(nf + p).plus_test(&shift);
    Ok((1.0 / beta - 1.0) * nf * PI.ln() + log_z_weight(&v, n)?)
}

/// `-int H nu^{(x)N} - N D_lambda(nu) / beta`, the Gibbs variational lower bound
/// for `(1/beta) log Z_{N,beta}[V]` with `H = -sum_{i<j} log|z_i - z_j|^2 + sum V(z_i)`.
pub fn gibbs_lower_bound(phi: &Potential, nu: &Measure, n: usize, beta: f64, convention: Convention) -> Result<f64> {
    if nu.has_atoms() {
        return Err(Error::Atoms);
    }
    let m = convention.exponent(n, beta)?;
    let rings = nu
        .rings
        .as_ref()
        .ok_or_else(|| Error::Config("measure has no continuous part".into()))?;
    let pair = rings.log_interaction(&nu.masses, &nu.masses);
    let mut linear = 0.0;
    for (z, &w) in rings.nodes().zip(&nu.masses) {
        if w != 0.0 {
            linear += w * phi.eval(z);
        }
    }
    let nf = n as f64;
    let mean_h = -0.5 * nf * (nf - 1.0) * pair + nf * m * linear;
    let d = entropy(nu, Reference::Lebesgue)?;
    Ok(-mean_h - nf * d / beta)
}

/// `(N(N-1))^{-1} int H nu^{(x)N} - E_{psi0}(nu)` for the `psi0`-Hamiltonian
/// normalized by `int e^{-H} mu0^{(x)N} = N!`; the gap does not depend on `nu`.
pub fn mean_energy_gap(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * GREEN_SHIFT + (fs_log_moment_sum(n) - nf * PI.ln()) / (nf * (nf - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinantal::fs_moment;

    #[test]
    fn closed_form_examples() {
        assert!((log_partition_beta1(&Potential::fs(), 1).unwrap().log_z - PI.ln()).abs() < 1e-12);
        let z2 = log_partition_beta1(&Potential::fs(), 2).unwrap().log_z;
        assert!((z2 - (2f64.ln() + 2.0 * (PI / 2.0).ln())).abs() < 1e-12);
        assert!((z2 - 1.5963).abs() < 1e-4);
        for n in [5, 40, 400] {
            let g = log_partition_beta1(&Potential::fs(), n).unwrap().log_z;
            assert!((g - log_z_fs(n)).abs() < 1e-9 * n as f64, "n = {n}");
        }
    }

    #[test]
    fn partition_remainder_is_linear() {
        let r = |n: usize| {
            let nf = n as f64;
            log_z_fs(n) + nf * nf / 2.0 - nf / 2.0 * nf.ln()
        };
        let r50 = r(50).abs() / 50.0;
        for n in [10, 25, 50, 100, 200, 400] {
            assert!(r(n).abs() / n as f64 <= 2.0 * r50, "n = {n}");
        }
    }

    #[test]
    fn error_sequence_vanishes_on_fs_and_its_moebius_images() {
        for n in [1, 4, 16, 64] {
            let e = error_sequence_beta1(&Potential::fs(), n).unwrap();
            assert!(e.total.abs() < 1e-10, "n = {n}: {e:?}");
        }
        let e = error_sequence_beta1(&Potential::fs_dilated(1.7), 8).unwrap();
        assert!(e.total.abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn error_sequence_checks_convention() {
        let z = log_partition_beta1_with(&Potential::quad(1.0), 4, Convention::ExteriorNPhi).unwrap();
        assert!(matches!(
            error_sequence(&Potential::quad(1.0), 4, 1.0, &z),
            Err(Error::Convention(_))
        ));
    }

    #[test]
    fn bump_error_within_bound() {
        let phi = Potential::fs_bump(0.3, 0.3, 0.6);
        let e = error_sequence_beta1(&phi, 32).unwrap();
        let b = error_bound(&phi, 32).unwrap();
        assert!(e.total >= 0.0 && e.total <= b.bound, "{e:?} {b:?}");
    }

    #[test]
    fn holder_examples() {
        let fs = Potential::fs();
        let z = log_partition_beta1(&fs, 2).unwrap().log_z;
        assert!((holder_rhs(&fs, 2, 1.0).unwrap() - z).abs() < 1e-14);
        assert!((holder_rhs(&fs, 2, 0.5).unwrap() - (z + 2.0 * PI.ln())).abs() < 1e-10);
        assert!((jensen_rhs(&fs, 2, 0.5).unwrap() - (z + 2.0 * PI.ln())).abs() < 1e-10);
    }

    #[test]
    fn weight_monotonicity() {
        let pairs = [
            (Potential::quad(1.0), Potential::quad(1.3)),
            (Potential::fs(), Potential::fs().plus_constant(0.2)),
            (Potential::fs_bump(-0.2, 0.3, 0.6), Potential::fs()),
            (Potential::fs(), Potential::fs_bump(0.3, 0.3, 0.6)),
            (
                Potential::quad(1.0),
                Potential::quad(1.0).plus_test(&TestFunction::bump(pt(0.2, 0.1), 0.1, 0.4, 0.5)),
            ),
        ];
        for (lo, hi) in &pairs {
            let a = log_partition_beta1(lo, 6).unwrap().log_z;
            let b = log_partition_beta1(hi, 6).unwrap().log_z;
            assert!(a >= b, "{} vs {}", lo.name, hi.name);
        }
    }

    #[test]
    fn mean_energy_gap_profile() {
        assert!((fs_moment(0, 2).unwrap() - PI).abs() < 1e-14);
        for n in [50, 100, 200, 400] {
            let nf = n as f64;
            let q = mean_energy_gap(n);
            assert!(q < 0.0);
            let ratio = q * nf / nf.ln();
            assert!((ratio.abs() - 0.5).abs() < 0.1, "n = {n}: {ratio}");
        }
    }

    #[test]
    fn gibbs_bound_at_two_points() {
        let grid = SphereGrid::new(1.0 / 64.0);
        let mu0 = Measure::mu0(&grid);
        let fs = Potential::fs();
        // int H mu0^2 = -I(mu0, mu0) + 2 m = 2m - 1, D_lambda(mu0) = -log pi - 2
        let b = gibbs_lower_bound(&fs, &mu0, 2, 1.0, Convention::ExteriorNPlusP).unwrap();
        let exact = -(2.0 * 3.0 - 1.0) + 2.0 * (PI.ln() + 2.0);
        assert!((b - exact).abs() < 1e-3, "{b} vs {exact}");
        let z = log_partition_beta1(&fs, 2).unwrap().log_z;
        assert!(z >= b);
    }
}
