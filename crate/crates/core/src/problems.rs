//! Nonlinear wave problems `u_tt = Δu − λu − f(u) + g` with `f = F'`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::BoundaryKind;

pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SpaceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type SpaceGrad = Arc<dyn Fn(&[f64]) -> [f64; 3] + Send + Sync>;
type SpaceTimeFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
type SpaceTimeGrad = Arc<dyn Fn(&[f64], f64) -> [f64; 3] + Send + Sync>;

/// Central-difference step used when no closed-form gradient is known.
pub const FD_STEP: f64 = 1e-6;

/// A scalar function of space, optionally with a closed-form gradient.
#[derive(Clone)]
pub struct Field {
    value: SpaceFn,
    gradient: Option<SpaceGrad>,
}

impl Field {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            gradient: None,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0).with_gradient(|_| [0.0; 3])
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Closed-form gradient if available, central differences otherwise.
    pub fn gradient(&self, x: &[f64]) -> [f64; 3] {
        if let Some(g) = &self.gradient {
            return g(x);
        }
        let mut out = [0.0; 3];
        let mut p = x.to_vec();
        for a in 0..x.len() {
            p[a] = x[a] + FD_STEP;
            let fp = self.value(&p);
            p[a] = x[a] - FD_STEP;
            let fm = self.value(&p);
            p[a] = x[a];
            out[a] = (fp - fm) / (2.0 * FD_STEP);
        }
        out
    }

    /// Negated field.
    pub fn neg(&self) -> Self {
        let v = self.value.clone();
        let mut out = Self::new(move |x| -v(x));
        if let Some(g) = self.gradient.clone() {
            out = out.with_gradient(move |x| g(x).map(|c| -c));
        }
        out
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("closed_form_gradient", &self.gradient.is_some())
            .finish()
    }
}

/// A scalar function of space and time, optionally with a closed-form
/// spatial gradient.
#[derive(Clone)]
pub struct TimeField {
    value: SpaceTimeFn,
    gradient: Option<SpaceTimeGrad>,
}

impl TimeField {
    pub fn new(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64], f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        (self.value)(x, t)
    }

    /// Snapshot at time `t`.
    pub fn at(&self, t: f64) -> Field {
        let v = self.value.clone();
        let mut out = Field::new(move |x| v(x, t));
        if let Some(g) = self.gradient.clone() {
            out = out.with_gradient(move |x| g(x, t));
        }
        out
    }
}

impl fmt::Debug for TimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeField")
            .field("closed_form_gradient", &self.gradient.is_some())
            .finish()
    }
}

/// Nonlinear wave problem on `[0,1]^dim`.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub dim: usize,
    pub lambda: f64,
    /// Potential `F`.
    pub potential: ScalarMap,
    /// `f = F'`.
    pub force: ScalarMap,
    /// SAV shift; `∫F(u) + c0` must stay positive.
    pub c0: f64,
    pub u0: Field,
    pub u1: Field,
    pub exact: Option<TimeField>,
    pub source: Option<TimeField>,
    pub bc: BoundaryKind,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lambda", &self.lambda)
            .field("c0", &self.c0)
            .field("has_exact", &self.exact.is_some())
            .field("has_source", &self.source.is_some())
            .field("bc", &self.bc)
            .finish()
    }
}

/// CLI identifiers of the catalog problems.
pub const PROBLEM_NAMES: [&str; 2] = ["klein-gordon-2d", "sine-gordon-3d"];

impl Problem {
    /// Looks up a catalog problem by identifier.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "klein-gordon-2d" => Ok(klein_gordon_2d()),
            "sine-gordon-3d" => Ok(sine_gordon_3d()),
            other => Err(Error::Config(format!(
                "unknown problem '{other}'; valid identifiers: {}",
                PROBLEM_NAMES.join(", ")
            ))),
        }
    }

    pub fn potential(&self, s: f64) -> f64 {
        (self.potential)(s)
    }

    pub fn force(&self, s: f64) -> f64 {
        (self.force)(s)
    }

    /// Largest `|(F(s+ε) − F(s−ε))/2ε − f(s)|` over a uniform sample of
    /// `[−3, 3]` with `ε = 1e-5`.
    pub fn derivative_defect(&self) -> f64 {
        let eps = 1e-5;
        (0..=600)
            .map(|i| -3.0 + i as f64 * 0.01)
            .map(|s| {
                let fd = (self.potential(s + eps) - self.potential(s - eps)) / (2.0 * eps);
                (fd - self.force(s)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Fails unless `f` is the derivative of `F` to within `1e-6`.
    pub fn check_derivative(&self) -> Result<()> {
        let d = self.derivative_defect();
        if d > 1e-6 {
            return Err(Error::Config(format!(
                "problem '{}': force is not the derivative of the potential (defect {d:e})",
                self.name
            )));
        }
        Ok(())
    }

    /// The same problem without the source term. The exact solution no
    /// longer applies and is dropped; initial data are kept.
    pub fn conservation_variant(&self) -> Self {
        Self {
            name: format!("{}-unforced", self.name),
            exact: None,
            source: None,
            ..self.clone()
        }
    }
}

/// Klein–Gordon: `u_tt = Δu + u − u³ + g₁` on the unit square, with exact
/// solution `u = e^{−t} x²(1−x)² y²(1−y)²`.
pub fn klein_gordon_2d() -> Problem {
    fn p(s: f64) -> f64 {
        s * s * (1.0 - s) * (1.0 - s)
    }
    fn dp(s: f64) -> f64 {
        2.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    }
    fn d2p(s: f64) -> f64 {
        2.0 - 12.0 * s + 12.0 * s * s
    }
    let spatial = |x: &[f64]| p(x[0]) * p(x[1]);
    let spatial_grad = |x: &[f64]| [dp(x[0]) * p(x[1]), p(x[0]) * dp(x[1]), 0.0];

    let u0 = Field::new(spatial).with_gradient(spatial_grad);
    let exact = TimeField::new(move |x, t| (-t).exp() * spatial(x))
        .with_gradient(move |x, t| spatial_grad(x).map(|c| (-t).exp() * c));
    // u_tt − Δu − u + u³ with u_tt = u.
    let source = TimeField::new(move |x, t| {
        let e = (-t).exp();
        let u = e * spatial(x);
        let lap = e * (d2p(x[0]) * p(x[1]) + p(x[0]) * d2p(x[1]));
        -lap + u * u * u
    });

    Problem {
        name: "klein-gordon-2d".into(),
        dim: 2,
        lambda: 0.0,
        potential: Arc::new(|s| s.powi(4) / 4.0 - s * s / 2.0),
        force: Arc::new(|s| s * s * s - s),
        c0: 1.0,
        u1: u0.neg(),
        u0,
        exact: Some(exact),
        source: Some(source),
        bc: BoundaryKind::Dirichlet,
    }
}

/// Sine–Gordon: `u_tt = Δu + sin(u) + g₂` on the unit cube, with exact
/// solution `u = (1 + t³) sin(2πx) sin(2πy) sin(2πz)`.
pub fn sine_gordon_3d() -> Problem {
    let k = 2.0 * PI;
    let spatial = move |x: &[f64]| (k * x[0]).sin() * (k * x[1]).sin() * (k * x[2]).sin();
    let spatial_grad = move |x: &[f64]| {
        let (s0, s1, s2) = ((k * x[0]).sin(), (k * x[1]).sin(), (k * x[2]).sin());
        let (c0, c1, c2) = ((k * x[0]).cos(), (k * x[1]).cos(), (k * x[2]).cos());
        [k * c0 * s1 * s2, k * s0 * c1 * s2, k * s0 * s1 * c2]
    };

    let u0 = Field::new(spatial).with_gradient(spatial_grad);
    let exact = TimeField::new(move |x, t| (1.0 + t * t * t) * spatial(x))
        .with_gradient(move |x, t| spatial_grad(x).map(|c| (1.0 + t * t * t) * c));
    // u_tt − Δu − sin(u) with Δu = −3k² u.
    let source = TimeField::new(move |x, t| {
        let s = spatial(x);
        let u = (1.0 + t * t * t) * s;
        6.0 * t * s + 3.0 * k * k * u - u.sin()
    });

    Problem {
        name: "sine-gordon-3d".into(),
        dim: 3,
        lambda: 0.0,
        potential: Arc::new(f64::cos),
        force: Arc::new(|s| -s.sin()),
        c0: 2.0,
        u0,
        u1: Field::zero(),
        exact: Some(exact),
        source: Some(source),
        bc: BoundaryKind::Dirichlet,
    }
}
