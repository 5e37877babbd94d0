//! Two-level Hamiltonian near a level crossing, its eigensystem in polar
//! coordinates, and parametrized drive paths.
//!
//! The Hamiltonian is `h = (E0 + y0(t))·I + g·σ·y(t)` with `y = (y1, y2, y3)`.
//! Eigenvectors use the fixed φ-gauge
//!
//! ```text
//! v+ = (cos(θ/2) e^{-iφ},  sin(θ/2))
//! v- = (sin(θ/2) e^{-iφ}, -cos(θ/2))
//! ```
//!
//! which is single valued on closed loops that avoid the poles and `y = 0`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm3, Herm2, Mat2, Spinor, Vec3};

/// Default degeneracy threshold on `|y|`, in field units.
pub const DEFAULT_R_MIN: f64 = 1e-14;

/// Relative step of the central difference used for paths without analytic
/// derivatives.
pub const DERIVATIVE_STEP_FRACTION: f64 = 1e-6;

/// Energy level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Plus,
    Minus,
}

impl Level {
    pub(crate) fn index(self) -> usize {
        match self {
            Level::Plus => 0,
            Level::Minus => 1,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Level::Plus => 1.0,
            Level::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelHamiltonian {
    /// `E(0) + y0(t)`.
    pub scalar_shift: f64,
    pub coupling_g: f64,
    pub field: Vec3,
}

impl TwoLevelHamiltonian {
    pub fn new(scalar_shift: f64, coupling_g: f64, field: Vec3) -> Result<Self> {
        if !(coupling_g > 0.0 && coupling_g.is_finite()) {
            return Err(Error::InvalidConfig(format!("coupling g must be positive, got {coupling_g}")));
        }
        if !scalar_shift.is_finite() || field.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite Hamiltonian entries".into()));
        }
        Ok(Self { scalar_shift, coupling_g, field })
    }

    pub fn field_norm(&self) -> f64 {
        norm3(&self.field)
    }

    pub fn operator(&self) -> Herm2 {
        let g = self.coupling_g;
        Herm2 { scalar: self.scalar_shift, vector: [g * self.field[0], g * self.field[1], g * self.field[2]] }
    }

    pub fn matrix(&self) -> Mat2 {
        self.operator().to_matrix()
    }

    pub fn eigensystem(&self) -> Result<Eigensystem> {
        self.eigensystem_with(DEFAULT_R_MIN)
    }

    /// `E± = shift ± g r`, eigenvectors in the φ-gauge.
    pub fn eigensystem_with(&self, r_min: f64) -> Result<Eigensystem> {
        let polar = to_polar_with(&self.field, None, r_min)?;
        let (v_plus, v_minus) = eigenvectors(polar.theta, polar.phi);
        let gr = self.coupling_g * polar.r;
        Ok(Eigensystem { e_plus: self.scalar_shift + gr, e_minus: self.scalar_shift - gr, v_plus, v_minus, polar })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem {
    pub e_plus: f64,
    pub e_minus: f64,
    pub v_plus: Spinor,
    pub v_minus: Spinor,
    pub polar: PolarField,
}

impl Eigensystem {
    pub fn energy(&self, level: Level) -> f64 {
        match level {
            Level::Plus => self.e_plus,
            Level::Minus => self.e_minus,
        }
    }

    pub fn vector(&self, level: Level) -> Spinor {
        match level {
            Level::Plus => self.v_plus,
            Level::Minus => self.v_minus,
        }
    }

    /// Columns `(v+, v-)`; maps instantaneous-basis coefficients to the
    /// fixed basis.
    pub fn frame(&self) -> Mat2 {
        Mat2::from_columns(&self.v_plus, &self.v_minus)
    }
}

/// The φ-gauge eigenvectors for direction `(θ, φ)`.
pub fn eigenvectors(theta: f64, phi: f64) -> (Spinor, Spinor) {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, -phi);
    let plus = Spinor::new(e * c, C64::new(s, 0.0));
    let minus = Spinor::new(e * s, C64::new(-c, 0.0));
    (plus, minus)
}

/// Spherical coordinates of the field with an unwrapped azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarField {
    pub r: f64,
    pub theta: f64,
    /// Continuous with the previous sample when one was supplied.
    pub phi: f64,
    /// Whole turns separating `phi` from its principal value in (-π, π].
    pub winding: i64,
    /// θ ∈ {0, π}: φ carries no information and was fixed by convention.
    pub gauge_fixed_at_pole: bool,
}

pub fn to_polar(field: &Vec3, previous: Option<&PolarField>) -> Result<PolarField> {
    to_polar_with(field, previous, DEFAULT_R_MIN)
}

pub fn to_polar_with(field: &Vec3, previous: Option<&PolarField>, r_min: f64) -> Result<PolarField> {
    let r = norm3(field);
    if !(r > r_min) {
        return Err(Error::Degenerate { r, r_min });
    }
    let rho = field[0].hypot(field[1]);
    let theta = rho.atan2(field[2]);
    if rho == 0.0 {
        // pole gauge: carry φ forward, else 0
        let (phi, winding) = previous.map_or((0.0, 0), |p| (p.phi, p.winding));
        return Ok(PolarField { r, theta, phi, winding, gauge_fixed_at_pole: true });
    }
    let principal = field[1].atan2(field[0]);
    let (phi, winding) = match previous {
        None => (principal, 0),
        Some(p) => {
            let k = ((p.phi - principal) / TAU).round();
            (principal + TAU * k, k as i64)
        }
    };
    Ok(PolarField { r, theta, phi, winding, gauge_fixed_at_pole: false })
}

pub fn from_polar(r: f64, theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [r * st * cp, r * st * sp, r * ct]
}

/// Track the azimuth along a sequence of field samples.
pub fn track_polar(fields: &[Vec3], r_min: f64) -> Result<Vec<PolarField>> {
    let mut out: Vec<PolarField> = Vec::with_capacity(fields.len());
    for y in fields {
        let p = to_polar_with(y, out.last(), r_min)?;
        out.push(p);
    }
    Ok(out)
}

/// A closed-form drive `t ↦ (y0(t), y(t))`.
pub trait Curve: Send + Sync {
    fn field(&self, t: f64) -> Vec3;

    /// Analytic `dy/dt` when available.
    fn field_rate(&self, _t: f64) -> Option<Vec3> {
        None
    }

    /// `y0(t)`, the part of the scalar shift beyond `E(0)`.
    fn scalar(&self, _t: f64) -> f64 {
        0.0
    }

    /// Interior times where the curve is only C⁰ (or switches formula);
    /// integrators and quadratures never straddle these.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Field, polar angles and their rates at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRates {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub r_dot: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
}

/// `(r, θ, φ)` and their time derivatives from `y` and `dy/dt`.
pub fn polar_rates(y: &Vec3, dy: &Vec3) -> PolarRates {
    let [x1, x2, x3] = *y;
    let [d1, d2, d3] = *dy;
    let rho2 = x1 * x1 + x2 * x2;
    let rho = rho2.sqrt();
    let r2 = rho2 + x3 * x3;
    let r = r2.sqrt();
    let radial = x1 * d1 + x2 * d2;
    let (theta_dot, phi_dot) =
        if rho > 0.0 { ((x3 * radial / rho - rho * d3) / r2, (x1 * d2 - x2 * d1) / rho2) } else { (0.0, 0.0) };
    PolarRates { r, theta: rho.atan2(x3), phi: x2.atan2(x1), r_dot: (radial + x3 * d3) / r, theta_dot, phi_dot }
}

/// A drive path over `[0, T]` together with the coupling and energy offset
/// needed to form `h(t)`.
#[derive(Clone)]
pub struct ParameterPath {
    curve: Arc<dyn Curve>,
    period: f64,
    coupling_g: f64,
    energy_offset: f64,
    r_min: f64,
    closed: bool,
    mismatch: f64,
}

impl fmt::Debug for ParameterPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParameterPath")
            .field("period", &self.period)
            .field("coupling_g", &self.coupling_g)
            .field("energy_offset", &self.energy_offset)
            .field("r_min", &self.r_min)
            .field("closed", &self.closed)
            .finish()
    }
}

impl ParameterPath {
    pub fn new(curve: Arc<dyn Curve>, period: f64, coupling_g: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidConfig(format!("period must be positive, got {period}")));
        }
        if !(coupling_g > 0.0 && coupling_g.is_finite()) {
            return Err(Error::InvalidConfig(format!("coupling g must be positive, got {coupling_g}")));
        }
        for b in curve.breakpoints() {
            if !(b > 0.0 && b < period) {
                return Err(Error::InvalidConfig(format!("breakpoint {b} outside the open interval (0, {period})")));
            }
        }
        let (a, b) = (curve.field(0.0), curve.field(period));
        let scale = norm3(&a).max(1.0);
        let dy0 = curve.scalar(period) - curve.scalar(0.0);
        let mismatch = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2) + dy0 * dy0).sqrt();
        Ok(Self {
            curve,
            period,
            coupling_g,
            energy_offset: 0.0,
            r_min: DEFAULT_R_MIN,
            closed: mismatch < 1e-12 * scale,
            mismatch,
        })
    }

    pub fn with_energy_offset(mut self, e0: f64) -> Self {
        self.energy_offset = e0;
        self
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        self
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coupling_g(&self) -> f64 {
        self.coupling_g
    }

    pub fn energy_offset(&self) -> f64 {
        self.energy_offset
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn endpoint_mismatch(&self) -> f64 {
        self.mismatch
    }

    pub fn curve(&self) -> &Arc<dyn Curve> {
        &self.curve
    }

    pub fn require_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(Error::OpenPath { mismatch: self.mismatch })
        }
    }

    pub fn field(&self, t: f64) -> Vec3 {
        self.curve.field(t)
    }

    pub fn scalar_shift(&self, t: f64) -> f64 {
        self.energy_offset + self.curve.scalar(t)
    }

    /// `dy/dt`, analytic if the curve provides it, otherwise a central
    /// difference with step `T·1e-6`.
    pub fn field_rate(&self, t: f64) -> Vec3 {
        if let Some(d) = self.curve.field_rate(t) {
            return d;
        }
        let h = self.period * DERIVATIVE_STEP_FRACTION;
        let (a, b) = (self.curve.field(t + h), self.curve.field(t - h));
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h), (a[2] - b[2]) / (2.0 * h)]
    }

    pub fn polar_rates(&self, t: f64) -> PolarRates {
        polar_rates(&self.field(t), &self.field_rate(t))
    }

    /// Smooth segment containing `t`. A breakpoint belongs to the segment
    /// that starts there; `T` belongs to the last one.
    pub fn segment_at(&self, t: f64) -> (f64, f64) {
        let segs = self.segments();
        let last = segs[segs.len() - 1];
        segs.into_iter().find(|&(a, b)| t >= a && t < b).unwrap_or(last)
    }

    /// `dy/dt` on the smooth segment `[a, b]`, one-sided at its ends so that
    /// a kink at a breakpoint never leaks into the neighbouring segment.
    pub fn field_rate_on(&self, t: f64, (a, b): (f64, f64)) -> Vec3 {
        let inset = (b - a) * 1e-12;
        let tc = t.clamp(a + inset, b - inset);
        if let Some(d) = self.curve.field_rate(tc) {
            return d;
        }
        let h = (self.period * DERIVATIVE_STEP_FRACTION).min(0.25 * (b - a));
        let f = |s: f64| self.curve.field(s);
        let combine = |w: [f64; 3], p: [Vec3; 3]| -> Vec3 {
            std::array::from_fn(|i| (w[0] * p[0][i] + w[1] * p[1][i] + w[2] * p[2][i]) / (2.0 * h))
        };
        if t - h < a {
            combine([-3.0, 4.0, -1.0], [f(t), f(t + h), f(t + 2.0 * h)])
        } else if t + h > b {
            combine([3.0, -4.0, 1.0], [f(t), f(t - h), f(t - 2.0 * h)])
        } else {
            combine([1.0, 0.0, -1.0], [f(t + h), f(t), f(t - h)])
        }
    }

    pub fn polar_rates_on(&self, t: f64, segment: (f64, f64)) -> PolarRates {
        polar_rates(&self.field(t), &self.field_rate_on(t, segment))
    }

    /// `h(t)`; `t` must lie in `[0, T]`.
    pub fn hamiltonian_at(&self, t: f64) -> Result<TwoLevelHamiltonian> {
        if !(0.0..=self.period).contains(&t) {
            return Err(Error::Domain { t, period: self.period });
        }
        Ok(self.hamiltonian_unchecked(t))
    }

    pub(crate) fn hamiltonian_unchecked(&self, t: f64) -> TwoLevelHamiltonian {
        TwoLevelHamiltonian { scalar_shift: self.scalar_shift(t), coupling_g: self.coupling_g, field: self.field(t) }
    }

    pub fn eigensystem_at(&self, t: f64) -> Result<Eigensystem> {
        self.hamiltonian_at(t)?.eigensystem_with(self.r_min)
    }

    /// Smooth sub-intervals of `[0, T]` split at the curve's breakpoints.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        let mut cuts = self.curve.breakpoints();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Vec::with_capacity(cuts.len() + 1);
        let mut a = 0.0;
        for c in cuts {
            out.push((a, c));
            a = c;
        }
        out.push((a, self.period));
        out
    }

    /// Same curve with the field scaled, `y -> ε y`.
    pub fn scaled(&self, epsilon: f64) -> Result<ParameterPath> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("scale factor must be positive, got {epsilon}")));
        }
        let curve = Arc::new(ScaledCurve { inner: self.curve.clone(), epsilon });
        Ok(ParameterPath { curve, ..self.clone() })
    }

    /// Same geometry traversed with time map `s(t)`, given as the pair
    /// `(s, ds/dt)`. `s` must map `[0, T]` monotonically onto itself.
    pub fn reparametrized(&self, map: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> ParameterPath {
        let curve = Arc::new(ReparametrizedCurve { inner: self.curve.clone(), map: Box::new(map) });
        ParameterPath { curve, ..self.clone() }
    }
}

struct ScaledCurve {
    inner: Arc<dyn Curve>,
    epsilon: f64,
}

impl Curve for ScaledCurve {
    fn field(&self, t: f64) -> Vec3 {
        self.inner.field(t).map(|x| x * self.epsilon)
    }

    fn field_rate(&self, t: f64) -> Option<Vec3> {
        self.inner.field_rate(t).map(|d| d.map(|x| x * self.epsilon))
    }

    fn scalar(&self, t: f64) -> f64 {
        self.inner.scalar(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
}

type TimeMap = Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

struct ReparametrizedCurve {
    inner: Arc<dyn Curve>,
    map: TimeMap,
}

impl Curve for ReparametrizedCurve {
    fn field(&self, t: f64) -> Vec3 {
        self.inner.field((self.map)(t).0)
    }

    fn field_rate(&self, t: f64) -> Option<Vec3> {
        let (s, ds) = (self.map)(t);
        self.inner.field_rate(s).map(|d| d.map(|x| x * ds))
    }

    fn scalar(&self, t: f64) -> f64 {
        self.inner.scalar((self.map)(t).0)
    }
}

/// A field that does not move.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCurve(pub Vec3);

impl Curve for ConstantCurve {
    fn field(&self, _t: f64) -> Vec3 {
        self.0
    }

    fn field_rate(&self, _t: f64) -> Option<Vec3> {
        Some([0.0; 3])
    }
}

/// Wrap an angle into (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}
