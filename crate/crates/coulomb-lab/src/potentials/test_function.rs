use crate::geometry::{pt, zonal, Point, Quadrature, TailRule};
use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(Point) -> (f64, f64) + Send + Sync>;
type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A test function `u` with its gradient.
///
/// Radially symmetric functions about `center` also carry their profile,
/// which enables one-dimensional fast paths elsewhere.
#[derive(Clone)]
pub struct TestFunction {
    eval: ScalarFn,
    gradient: GradFn,
    pub support_radius: Option<f64>,
    pub center: Point,
    profile: Option<ProfileFn>,
    dprofile: Option<ProfileFn>,
    pub name: String,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("support_radius", &self.support_radius)
            .field("center", &self.center)
            .finish()
    }
}

/// C^2 smootherstep on `[0, 1]` and its derivative.
fn smootherstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        let s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        (s, ds)
    }
}

impl TestFunction {
    /// Builds a test function from a value closure; the gradient is taken by central differences.
    pub fn from_fn(name: &str, f: impl Fn(Point) -> f64 + Send + Sync + 'static, support_radius: Option<f64>) -> Self {
        let eval: ScalarFn = Arc::new(f);
        let e = eval.clone();
        let gradient: GradFn = Arc::new(move |z: Point| {
            let h = 1e-5 * (1.0 + z.norm());
            let gx = (e(z + pt(h, 0.0)) - e(z - pt(h, 0.0))) / (2.0 * h);
            let gy = (e(z + pt(0.0, h)) - e(z - pt(0.0, h))) / (2.0 * h);
            (gx, gy)
        });
        TestFunction {
            eval,
            gradient,
            support_radius,
            center: pt(0.0, 0.0),
            profile: None,
            dprofile: None,
            name: name.into(),
        }
    }

    /// Radial function `f(|z - center|)` with derivative `df`.
    pub fn radial(
        name: &str,
        center: Point,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_radius: Option<f64>,
    ) -> Self {
        let f: ProfileFn = Arc::new(f);
        let df: ProfileFn = Arc::new(df);
        let (f1, df1) = (f.clone(), df.clone());
        let eval: ScalarFn = Arc::new(move |z: Point| f1((z - center).norm()));
        let gradient: GradFn = Arc::new(move |z: Point| {
            let d = z - center;
            let r = d.norm();
            if r == 0.0 {
                return (0.0, 0.0);
            }
            let g = df1(r) / r;
            (g * d.re, g * d.im)
        });
        TestFunction {
            eval,
            gradient,
            support_radius,
            center,
            profile: Some(f),
            dprofile: Some(df),
            name: name.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::radial("constant", pt(0.0, 0.0), move |_| c, |_| 0.0, None)
    }

    /// `cos(theta) = (1-|z|^2)/(1+|z|^2)`, with `||u||^2_{H^1} = 2/3`.
    pub fn zonal() -> Self {
        let mut u = Self::radial(
            "zonal",
            pt(0.0, 0.0),
            |r| zonal(pt(r, 0.0)),
            |r| {
                let q = 1.0 + r * r;
                -4.0 * r / (q * q)
            },
            None,
        );
        u.name = "zonal".into();
        u
    }

    /// Height `height` on `|z - center| <= inner`, C^2 cutoff to zero at `outer`.
    pub fn bump(center: Point, inner: f64, outer: f64, height: f64) -> Self {
        assert!(outer > inner && inner >= 0.0);
        let w = outer - inner;
        Self::radial(
            "bump",
            center,
            move |r| height * (1.0 - smootherstep((r - inner) / w).0),
            move |r| -height * smootherstep((r - inner) / w).1 / w,
            Some(outer),
        )
    }

    /// `Re z`.
    pub fn real_part() -> Self {
        let mut u = Self::from_fn("re", |z| z.re, None);
        u.gradient = Arc::new(|_| (1.0, 0.0));
        u
    }

    pub fn eval(&self, z: Point) -> f64 {
        (self.eval)(z)
    }

    pub fn gradient(&self, z: Point) -> (f64, f64) {
        (self.gradient)(z)
    }

    /// Radial profile about `center`, if the function is radial.
    pub fn profile(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.profile.as_deref()
    }

    pub fn is_radial_about_origin(&self) -> bool {
        self.profile.is_some() && self.center == pt(0.0, 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let (e, g) = (self.eval.clone(), self.gradient.clone());
        TestFunction {
            eval: Arc::new(move |z| c * e(z)),
            gradient: Arc::new(move |z| {
                let (a, b) = g(z);
                (c * a, c * b)
            }),
            support_radius: self.support_radius,
            center: self.center,
            profile: self.profile.clone().map(|p| Arc::new(move |r| c * p(r)) as ProfileFn),
            dprofile: self.dprofile.clone().map(|p| Arc::new(move |r| c * p(r)) as ProfileFn),
            name: format!("{c}*{}", self.name),
        }
    }

    /// `self + other`.
    pub fn plus(&self, other: &TestFunction) -> Self {
        let (e1, g1, e2, g2) = (
            self.eval.clone(),
            self.gradient.clone(),
            other.eval.clone(),
            other.gradient.clone(),
        );
        let same_center = self.center == other.center;
        let support_radius = match (self.support_radius, other.support_radius) {
            (Some(a), Some(b)) if same_center => Some(a.max(b)),
            _ => None,
        };
        let (profile, dprofile) = match (&self.profile, &other.profile, &self.dprofile, &other.dprofile) {
            (Some(p1), Some(p2), Some(d1), Some(d2)) if same_center => {
                let (p1, p2, d1, d2) = (p1.clone(), p2.clone(), d1.clone(), d2.clone());
                (
                    Some(Arc::new(move |r| p1(r) + p2(r)) as ProfileFn),
                    Some(Arc::new(move |r| d1(r) + d2(r)) as ProfileFn),
                )
            }
            _ => (None, None),
        };
        TestFunction {
            eval: Arc::new(move |z| e1(z) + e2(z)),
            gradient: Arc::new(move |z| {
                let (a, b) = g1(z);
                let (c, d) = g2(z);
                (a + c, b + d)
            }),
            support_radius,
            center: if same_center { self.center } else { pt(0.0, 0.0) },
            profile,
            dprofile,
            name: format!("{}+{}", self.name, other.name),
        }
    }

    /// `u(F(z))` for the blow-up `F(z) = z0 + (z - z0)/scale`.
    pub fn blow_up(&self, z0: Point, scale: f64) -> Self {
        let (e, g) = (self.eval.clone(), self.gradient.clone());
        TestFunction {
            eval: Arc::new(move |z| e(z0 + (z - z0) / scale)),
            gradient: Arc::new(move |z| {
                let (a, b) = g(z0 + (z - z0) / scale);
                (a / scale, b / scale)
            }),
            support_radius: self.support_radius.map(|r| r * scale),
            center: z0 + (self.center - z0) * scale,
            profile: None,
            dprofile: None,
            name: format!("blowup({})", self.name),
        }
    }
}

/// `||u||^2_{H^1} = (1/4pi) int |grad u|^2 dlambda`.
pub fn h1_norm_sq(u: &TestFunction) -> Result<f64> {
    if let (Some(df), Some(r)) = (&u.dprofile, u.support_radius) {
        let q = Quadrature::polar(r, 400, 1, TailRule::None);
        return Ok(q.integrate_radial(|t| df(t).powi(2)) / (4.0 * PI));
    }
    if let Some(df) = &u.dprofile {
        let q = Quadrature::polar(1.0, 400, 1, TailRule::InversionChart);
        let tail: f64 = q
            .rings()
            .radii
            .iter()
            .rev()
            .take(5)
            .zip(q.rings().area.iter().rev())
            .map(|(&r, &a)| a * df(r).powi(2) * r * r)
            .sum();
        let v = q.integrate_radial(|t| df(t).powi(2)) / (4.0 * PI);
        check_finite(v, tail)?;
        return Ok(v);
    }
    let q = match u.support_radius {
        Some(r) => Quadrature::polar(r, 256, 256, TailRule::None),
        None => Quadrature::polar(1.0, 192, 192, TailRule::InversionChart),
    };
    let grad2 = |z: Point| {
        let (a, b) = u.gradient(z + u.center);
        a * a + b * b
    };
    let v = q.integrate(grad2) / (4.0 * PI);
    if u.support_radius.is_none() {
        let far = q.integrate(|z| if z.norm() > 1e3 { grad2(z) * z.norm_sqr() } else { 0.0 });
        check_finite(v, far)?;
    }
    Ok(v)
}

fn check_finite(v: f64, far: f64) -> Result<()> {
    if !v.is_finite() || !far.is_finite() || far > 1e3 * (1.0 + v) {
        return Err(Error::Divergent("gradient not square integrable".into()));
    }
    Ok(())
}
