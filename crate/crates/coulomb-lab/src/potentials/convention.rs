use super::{p_of_beta, GrowthClass, Potential};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How the potential `V` of an `N`-point gas is built from `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// `V = (N+1) phi`.
    #[serde(rename = "adjoint_Nplus1", alias = "adjoint")]
    AdjointNPlus1,
    /// `V = N phi`.
    #[serde(rename = "exterior_Nphi", alias = "exterior")]
    ExteriorNPhi,
    /// `V = (N+p) phi` with `p = 2/beta - 1`.
    #[serde(rename = "exterior_NplusP")]
    ExteriorNPlusP,
}

impl Convention {
    /// The factor `m` in `V = m phi`.
    pub fn exponent(self, n: usize, beta: f64) -> Result<f64> {
        let n = n as f64;
        Ok(match self {
            Convention::AdjointNPlus1 => n + 1.0,
            Convention::ExteriorNPhi => n,
            Convention::ExteriorNPlusP => n + p_of_beta(beta)?,
        })
    }

    /// Rejects `(phi, convention)` pairs whose partition function diverges.
    ///
    /// With `phi >= (1+eps) log|z|^2` at infinity the one-point marginal
    /// decays like `|z|^{2 beta (N-1) - 2 beta m (1+eps)}`.
    pub fn check(self, phi: &Potential, n: usize, beta: f64) -> Result<()> {
        if !(beta > 0.0) {
            return Err(Error::BetaOutOfRange(beta));
        }
        let m = self.exponent(n, beta)?;
        let eps = match phi.growth {
            GrowthClass::Inadmissible => {
                return Err(Error::Inadmissible(format!("{} grows slower than log|z|^2", phi.name)))
            }
            GrowthClass::SuperLog => 0.0,
            GrowthClass::StrictlySuperLog => phi.growth_constants.epsilon,
        };
        if eps >= 1.0 || beta * (m * (1.0 + eps) - n as f64 + 1.0) > 1.0 {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!(
                "V = {m} * {} is not integrable at beta = {beta} with {n} points",
                phi.name
            )))
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::AdjointNPlus1 => "adjoint_Nplus1",
            Convention::ExteriorNPhi => "exterior_Nphi",
            Convention::ExteriorNPlusP => "exterior_NplusP",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjoint_Nplus1" | "adjoint" => Ok(Convention::AdjointNPlus1),
            "exterior_Nphi" | "exterior" => Ok(Convention::ExteriorNPhi),
            "exterior_NplusP" => Ok(Convention::ExteriorNPlusP),
            _ => Err(Error::Config(format!("unknown convention {s}"))),
        }
    }
}
