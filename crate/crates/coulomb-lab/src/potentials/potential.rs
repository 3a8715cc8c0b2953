use super::TestFunction;
use crate::geometry::{fs_potential, pt, Point};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Growth at infinity relative to `log(1+|z|^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthClass {
    StrictlySuperLog,
    SuperLog,
    Inadmissible,
}

/// Fitted constants: `phi >= (1+epsilon) log+|z|^2 + c_lower` on the sample
/// grid and `c_upper = sup_{|z|=1} phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub epsilon: f64,
    pub c_lower: f64,
    pub c_upper: f64,
}

/// Point charge `coefficient * (-log|z - location|^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub x: f64,
    pub y: f64,
    pub a: f64,
}

impl Charge {
    pub fn new(location: Point, a: f64) -> Self {
        Charge {
            x: location.re,
            y: location.im,
            a,
        }
    }

    pub fn location(&self) -> Point {
        pt(self.x, self.y)
    }
}

/// An exterior potential `phi`: a smooth part plus point charges.
#[derive(Clone)]
pub struct Potential {
    smooth: ScalarFn,
    laplacian: Option<ScalarFn>,
    profile: Option<ProfileFn>,
    pub charges: Vec<Charge>,
    pub growth: GrowthClass,
    pub growth_constants: GrowthConstants,
    pub name: String,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("charges", &self.charges)
            .field("growth", &self.growth)
            .field("growth_constants", &self.growth_constants)
            .finish()
    }
}

impl Potential {
    /// Builds a potential from a smooth closure; growth is classified on construction.
    pub fn from_fn(name: &str, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self::assemble(name, Arc::new(f), None, None)
    }

    /// Radial potential `f(|z|)` with analytic planar Laplacian `lap(|z|)`.
    pub fn radial(
        name: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lap: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Self {
        let f: ProfileFn = Arc::new(f);
        let g = f.clone();
        let lap: Option<ScalarFn> = lap.map(|l| Arc::new(move |z: Point| l(z.norm())) as ScalarFn);
        Self::assemble(name, Arc::new(move |z: Point| g(z.norm())), lap, Some(f))
    }

    fn assemble(name: &str, smooth: ScalarFn, laplacian: Option<ScalarFn>, profile: Option<ProfileFn>) -> Self {
        let mut p = Potential {
            smooth,
            laplacian,
            profile,
            charges: Vec::new(),
            growth: GrowthClass::Inadmissible,
            growth_constants: GrowthConstants {
                epsilon: 0.0,
                c_lower: 0.0,
                c_upper: 0.0,
            },
            name: name.into(),
        };
        p.refit_growth();
        p
    }

    /// `psi0 = log(1+|z|^2)`.
    pub fn fs() -> Self {
        Self::fs_scaled(1.0)
    }

    /// `t * psi0`.
    pub fn fs_scaled(t: f64) -> Self {
        Self::radial(
            "fs",
            move |r| t * (r * r).ln_1p(),
            Some(Box::new(move |r| {
                let q = 1.0 + r * r;
                4.0 * t / (q * q)
            })),
        )
    }

    /// `lambda |z|^2`.
    pub fn quad(lambda: f64) -> Self {
        Self::radial("quad", move |r| lambda * r * r, Some(Box::new(move |_| 4.0 * lambda)))
    }

    /// `log(lambda |z|^2 + 1/lambda)`: the pull-back of `psi0` under a
    /// dilation, shifted so that its curvature is a Möbius image of `mu0`.
    pub fn fs_dilated(lambda: f64) -> Self {
        Self::radial(
            "fs_dilated",
            move |r| (lambda * r * r + 1.0 / lambda).ln(),
            Some(Box::new(move |r| {
                let q = lambda * r * r + 1.0 / lambda;
                4.0 / (q * q)
            })),
        )
    }

    /// `psi0 + amplitude * bump`, the bump being a C^2 radial cutoff function.
    pub fn fs_bump(amplitude: f64, inner: f64, outer: f64) -> Self {
        let b = TestFunction::bump(pt(0.0, 0.0), inner, outer, 1.0);
        let mut p = Self::fs().plus_test(&b.scaled(amplitude));
        p.name = "fs_bump".into();
        p
    }

    /// `lambda |z|^2` with point charges.
    pub fn quad_charge(lambda: f64, charges: &[Charge]) -> Result<Self> {
        quasi_hole(&Self::quad(lambda), charges)
    }

    /// Value at `z`; `+inf` at a charge location.
    pub fn eval(&self, z: Point) -> f64 {
        let mut v = (self.smooth)(z);
        for c in &self.charges {
            let d = (z - c.location()).norm_sqr();
            if d == 0.0 {
                return f64::INFINITY;
            }
            v -= c.a * d.ln();
        }
        v
    }

    /// Smooth part only, without charges.
    pub fn eval_smooth(&self, z: Point) -> f64 {
        (self.smooth)(z)
    }

    /// Planar Laplacian of the smooth part; charges are harmonic off their poles.
    pub fn laplacian(&self, z: Point) -> f64 {
        match &self.laplacian {
            Some(l) => l(z),
            None => {
                let h = 1e-4 * (1.0 + z.norm());
                let f = &self.smooth;
                (f(z + pt(h, 0.0)) + f(z - pt(h, 0.0)) + f(z + pt(0.0, h)) + f(z - pt(0.0, h)) - 4.0 * f(z)) / (h * h)
            }
        }
    }

    pub fn has_analytic_laplacian(&self) -> bool {
        self.laplacian.is_some()
    }

    /// Radial profile including charges when the potential is radial about the origin.
    pub fn radial_profile(&self) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
        let p = self.profile.clone()?;
        if self.charges.iter().any(|c| c.location() != pt(0.0, 0.0)) {
            return None;
        }
        let a: f64 = self.charges.iter().map(|c| c.a).sum();
        if a == 0.0 {
            return Some(p);
        }
        Some(Arc::new(move |r: f64| {
            if r == 0.0 {
                f64::INFINITY
            } else {
                p(r) - a * (r * r).ln()
            }
        }))
    }

    pub fn is_radial(&self) -> bool {
        self.radial_profile().is_some()
    }

    /// `phi + c`.
    pub fn plus_constant(&self, c: f64) -> Self {
        self.plus_test(&TestFunction::constant(c))
    }

    /// `phi + u`.
    pub fn plus_test(&self, u: &TestFunction) -> Self {
        let s = self.smooth.clone();
        let ue = u.clone();
        let smooth: ScalarFn = Arc::new(move |z| s(z) + ue.eval(z));
        let laplacian = self.laplacian.clone().map(|l| {
            let u = u.clone();
            Arc::new(move |z: Point| {
                let h = 1e-4 * (1.0 + z.norm());
                let lu =
                    (u.eval(z + pt(h, 0.0)) + u.eval(z - pt(h, 0.0)) + u.eval(z + pt(0.0, h)) + u.eval(z - pt(0.0, h))
                        - 4.0 * u.eval(z))
                        / (h * h);
                l(z) + lu
            }) as ScalarFn
        });
        let profile = match (&self.profile, u.is_radial_about_origin()) {
            (Some(p), true) => {
                let (p, u) = (p.clone(), u.clone());
                Some(Arc::new(move |r: f64| p(r) + u.eval(pt(r, 0.0))) as ProfileFn)
            }
            _ => None,
        };
        let mut out = Potential {
            smooth,
            laplacian,
            profile,
            charges: self.charges.clone(),
            ..self.clone()
        };
        out.name = format!("{}+{}", self.name, u.name);
        out.refit_growth();
        out
    }

    /// `t * phi` including charges.
    pub fn scaled(&self, t: f64) -> Self {
        let s = self.smooth.clone();
        let smooth: ScalarFn = Arc::new(move |z| t * s(z));
        let laplacian = self
            .laplacian
            .clone()
            .map(|l| Arc::new(move |z: Point| t * l(z)) as ScalarFn);
        let profile = self.profile.clone().map(|p| Arc::new(move |r| t * p(r)) as ProfileFn);
        let charges = self.charges.iter().map(|c| Charge { a: t * c.a, ..*c }).collect();
        let mut out = Potential {
            smooth,
            laplacian,
            profile,
            charges,
            ..self.clone()
        };
        out.name = format!("{t}*{}", self.name);
        out.refit_growth();
        out
    }

    /// `phi(F(z))` for the dilation `F(z) = c z`; planar Laplacian picks up `c^2`.
    pub fn dilated(&self, c: f64) -> Self {
        let s = self.smooth.clone();
        let smooth: ScalarFn = Arc::new(move |z| s(c * z));
        let laplacian = self
            .laplacian
            .clone()
            .map(|l| Arc::new(move |z: Point| c * c * l(c * z)) as ScalarFn);
        let profile = self.profile.clone().map(|p| Arc::new(move |r| p(c * r)) as ProfileFn);
        let charges = self
            .charges
            .iter()
            .map(|ch| Charge::new(ch.location() / c, ch.a))
            .collect();
        let extra: f64 = self.charges.iter().map(|ch| ch.a).sum::<f64>() * 2.0 * c.ln();
        let mut out = Potential {
            smooth,
            laplacian,
            profile,
            charges,
            ..self.clone()
        };
        out = out.plus_constant(-extra);
        out.name = format!("{}∘{c}z", self.name);
        out
    }

    /// Refits growth class and constants on the reference radial window.
    pub fn refit_growth(&mut self) {
        let (class, consts) = fit_growth(self);
        self.growth = class;
        self.growth_constants = consts;
    }
}

const FIT_WINDOW: (f64, f64) = (1e2, 1e6);
const SLOPE_TOL: f64 = 1e-3;

/// Minimum of `phi` over a circle of radius `r`, sampled at 16 angles.
fn circle_min(phi: &Potential, r: f64) -> f64 {
    (0..16)
        .map(|k| phi.eval(Point::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / 16.0)))
        .fold(f64::INFINITY, f64::min)
}

fn fit_growth(phi: &Potential) -> (GrowthClass, GrowthConstants) {
    let n = 41;
    let (a, b) = (FIT_WINDOW.0.ln(), FIT_WINDOW.1.ln());
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for k in 0..n {
        let r = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
        xs.push(fs_potential(pt(r, 0.0)));
        ys.push(circle_min(phi, r));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if ys.iter().all(|y| *y == f64::INFINITY) {
        f64::INFINITY
    } else {
        sxy / sxx
    };
    let class = if slope == f64::INFINITY {
        GrowthClass::StrictlySuperLog
    } else if !slope.is_finite() || slope < 1.0 - SLOPE_TOL {
        GrowthClass::Inadmissible
    } else if slope <= 1.0 + SLOPE_TOL {
        GrowthClass::SuperLog
    } else {
        GrowthClass::StrictlySuperLog
    };
    let epsilon = match class {
        GrowthClass::StrictlySuperLog => (slope - 1.0).min(1.0),
        _ => 0.0,
    };
    // inf of phi - (1+eps) log+ |z|^2 over a log-radial grid
    let mut c_lower = f64::INFINITY;
    for k in 0..=240 {
        let r = (-6.0 + 12.0 * k as f64 / 240.0).exp();
        let logp = (r * r).ln().max(0.0);
        c_lower = c_lower.min(circle_min(phi, r) - (1.0 + epsilon) * logp);
    }
    for k in 0..=60 {
        let r = (6.0 + (FIT_WINDOW.1.ln() - 6.0) * k as f64 / 60.0).exp();
        c_lower = c_lower.min(circle_min(phi, r) - (1.0 + epsilon) * (r * r).ln());
    }
    let c_upper = (0..64)
        .map(|k| phi.eval(Point::from_polar(1.0, 2.0 * PI * k as f64 / 64.0)))
        .fold(f64::NEG_INFINITY, f64::max);
    (
        class,
        GrowthConstants {
            epsilon,
            c_lower,
            c_upper,
        },
    )
}

/// Growth class of `phi`, refitted on the reference window.
pub fn classify_growth(phi: &Potential) -> GrowthClass {
    fit_growth(phi).0
}

/// `phi - sum a_i log|z - p_i|^2`.
pub fn quasi_hole(base: &Potential, charges: &[Charge]) -> Result<Potential> {
    let total: f64 = charges.iter().map(|c| c.a).sum();
    let limit = 1.0 + base.growth_constants.epsilon;
    if total >= limit {
        return Err(Error::ChargeTooLarge { total, limit });
    }
    if charges.iter().any(|c| c.a <= 0.0) {
        return Err(Error::Inadmissible("charge coefficients must be positive".into()));
    }
    let mut out = base.clone();
    out.charges.extend_from_slice(charges);
    if !charges.is_empty() {
        out.name = format!("{}-charges", base.name);
        out.refit_growth();
    }
    Ok(out)
}

/// `p = 2/beta - 1`.
pub fn p_of_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    Ok(2.0 / beta - 1.0)
}

/// `phi_N = N phi / (N + p)`.
pub fn rescale_phi_n(phi: &Potential, n: usize, beta: f64) -> Result<Potential> {
    let p = p_of_beta(beta)?;
    let t = n as f64 / (n as f64 + p);
    Ok(phi.scaled(t))
}

/// Bound on the outer droplet radius of `t phi` from the growth constants.
pub fn outer_radius_bound(phi: &Potential, t: f64) -> Result<f64> {
    if phi.growth != GrowthClass::StrictlySuperLog {
        return Err(Error::Inadmissible(format!(
            "{} is not strictly super-logarithmic",
            phi.name
        )));
    }
    let GrowthConstants {
        epsilon,
        c_lower,
        c_upper,
    } = phi.growth_constants;
    let delta = 1.0 - t;
    let denom = epsilon - delta * (1.0 + epsilon);
    if delta < 0.0 || denom <= 0.0 {
        return Err(Error::DeltaTooLarge { delta, epsilon });
    }
    let two_log_r = (1.0 - delta) * (c_upper - c_lower) / denom;
    Ok((0.5 * two_log_r.max(0.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_classes() {
        assert_eq!(Potential::quad(1.0).growth, GrowthClass::StrictlySuperLog);
        assert_eq!(Potential::fs().growth, GrowthClass::SuperLog);
        assert_eq!(Potential::fs_scaled(0.5).growth, GrowthClass::Inadmissible);
        assert_eq!(
            classify_growth(&Potential::fs_scaled(2.0)),
            GrowthClass::StrictlySuperLog
        );
        assert_eq!(Potential::fs_bump(0.3, 0.3, 0.6).growth, GrowthClass::SuperLog);
        assert_eq!(Potential::fs_dilated(2.0).growth, GrowthClass::SuperLog);
    }

    #[test]
    fn quasi_hole_examples() {
        let q = quasi_hole(&Potential::quad(1.0), &[Charge::new(pt(0.0, 0.0), 0.5)]).unwrap();
        let z = pt(0.3, 0.4);
        assert!((q.eval(z) - (0.25 - 0.5 * 0.25f64.ln())).abs() < 1e-14);
        assert!(q.is_radial());
        let same = quasi_hole(&Potential::fs(), &[]).unwrap();
        assert_eq!(same.eval(z), Potential::fs().eval(z));
        let pole = quasi_hole(&Potential::quad(1.0), &[Charge::new(pt(1.0, 0.0), 0.2)]).unwrap();
        assert_eq!(pole.eval(pt(1.0, 0.0)), f64::INFINITY);
        assert!(!pole.is_radial());
        assert!(matches!(
            quasi_hole(&Potential::fs(), &[Charge::new(pt(0.0, 0.0), 1.5)]),
            Err(Error::ChargeTooLarge { .. })
        ));
    }

    #[test]
    fn quasi_hole_restores_base() {
        let charges = [Charge::new(pt(0.3, -0.1), 0.2), Charge::new(pt(-1.0, 0.5), 0.3)];
        let base = Potential::quad(1.0);
        let q = quasi_hole(&base, &charges).unwrap();
        for k in 0..50 {
            let z = Point::from_polar(0.1 + 0.05 * k as f64, 0.7 * k as f64);
            let back = q.eval(z)
                + charges
                    .iter()
                    .map(|c| c.a * (z - c.location()).norm_sqr().ln())
                    .sum::<f64>();
            assert!((back - base.eval(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_examples() {
        let p = rescale_phi_n(&Potential::quad(1.0), 2, 1.0).unwrap();
        assert!((p.eval(pt(0.5, 0.5)) - (2.0 / 3.0) * 0.5).abs() < 1e-15);
        let phi = Potential::quad(1.0);
        let big = rescale_phi_n(&phi, 10_000, 0.5).unwrap();
        for k in 0..10 {
            let z = Point::from_polar(0.2 * k as f64, k as f64);
            assert!((big.eval(z) - phi.eval(z)).abs() < 1e-3);
        }
        let small = rescale_phi_n(&Potential::fs(), 1, 0.5).unwrap();
        assert!((small.eval(pt(1.0, 0.0)) - 0.25 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(small.growth, GrowthClass::Inadmissible);
        assert!(matches!(rescale_phi_n(&phi, 2, 1.5), Err(Error::BetaOutOfRange(_))));
    }

    #[test]
    fn outer_radius_examples() {
        let quad = Potential::quad(1.0);
        assert!((quad.growth_constants.epsilon - 1.0).abs() < 1e-12);
        let r = outer_radius_bound(&quad, 1.0).unwrap();
        assert!(r >= 1.0 && r.is_finite());
        let fs2 = Potential::fs_scaled(2.0);
        assert!(fs2.growth_constants.c_lower.abs() < 1e-6);
        let r2 = outer_radius_bound(&fs2, 1.0).unwrap();
        assert!(r2 >= 1.0);
        assert!(matches!(
            outer_radius_bound(&quad, 0.4),
            Err(Error::DeltaTooLarge { .. })
        ));
        assert!(outer_radius_bound(&Potential::fs(), 1.0).is_err());
    }
}
