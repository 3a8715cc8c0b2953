use super::{rng_for, Configuration};
use crate::geometry::Point;
use crate::{Error, Result};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

fn gaussian_matrix(n: usize, variance: f64, rng: &mut ChaCha20Rng) -> DMatrix<Complex64> {
    let s = (0.5 * variance).sqrt();
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

fn eigenvalues(m: DMatrix<Complex64>) -> Result<Vec<Point>> {
    let schur = Schur::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::Eigen("Schur form not triangular".into()))?;
    Ok(ev.iter().copied().collect())
}

fn ginibre_with(n: usize, rng: &mut ChaCha20Rng) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    Ok(Configuration::new(eigenvalues(gaussian_matrix(
        n,
        1.0 / n as f64,
        rng,
    ))?))
}

/// Eigenvalues of an `n x n` matrix of independent complex Gaussians of variance `1/n`:
/// the `beta = 1` gas with `V = N|z|^2`.
pub fn ginibre_sample(n: usize, seed: u64) -> Result<Configuration> {
    ginibre_with(n, &mut rng_for(seed, 0))
}

/// `reps` Ginibre draws; draw `k` uses stream `k`.
pub fn ginibre_batch(n: usize, reps: usize, seed: u64) -> Result<Vec<Configuration>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|k| ginibre_with(n, &mut rng_for(seed, k)))
        .collect()
}

fn moduli_with(n: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let g = Gamma::new(k as f64, 1.0).expect("positive shape");
            (g.sample(rng) / n as f64).sqrt()
        })
        .collect()
}

/// Moduli of a Ginibre draw, unordered. The set of `|lambda_k|^2` has the law of
/// independent `Gamma(k, 1)/n`, `k = 1..n`, so radial statistics need no eigensolver.
pub fn ginibre_moduli(n: usize, seed: u64) -> Vec<f64> {
    moduli_with(n, &mut rng_for(seed, 0))
}

/// `reps` draws of Ginibre moduli; draw `k` uses stream `k`.
pub fn ginibre_moduli_batch(n: usize, reps: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|k| moduli_with(n, &mut rng_for(seed, k)))
        .collect()
}

fn spherical_with(n: usize, seed: u64, stream: u64) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    let mut seed = seed;
    loop {
        let mut rng = rng_for(seed, stream);
        let a = gaussian_matrix(n, 1.0, &mut rng);
        let b = gaussian_matrix(n, 1.0, &mut rng);
        if let Some(binv) = b.lu().try_inverse() {
            if binv.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
                return Ok(Configuration::new(eigenvalues(a * binv)?));
            }
        }
        seed = seed.wrapping_add(1);
    }
}

/// Eigenvalues of `A B^{-1}` for independent standard complex Gaussian `A`, `B`:
/// the `beta = 1` gas with `V = (N+1) psi0`. A singular `B` is redrawn with seed `seed + 1`.
pub fn spherical_sample(n: usize, seed: u64) -> Result<Configuration> {
    spherical_with(n, seed, 0)
}

/// `reps` spherical-ensemble draws; draw `k` uses stream `k`.
pub fn spherical_batch(n: usize, reps: usize, seed: u64) -> Result<Vec<Configuration>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|k| spherical_with(n, seed, k))
        .collect()
}
