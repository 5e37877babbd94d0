//! Concrete drive models.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::model::{from_polar, Curve, ParameterPath};

/// Rotating field `(B0 (b1 + cos ωt), B0 sin ωt, Bz)` with coupling `g = μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSweepModel {
    #[serde(rename = "B0")]
    pub b0: f64,
    #[serde(default)]
    pub b1: f64,
    #[serde(rename = "Bz", default)]
    pub bz: f64,
    pub omega: f64,
    pub mu: f64,
    #[serde(default = "one")]
    pub periods: u32,
}

fn one() -> u32 {
    1
}

impl FieldSweepModel {
    /// `b1 = Bz = 0` circle around the crossing.
    pub fn circle(b0: f64, omega: f64, mu: f64) -> Self {
        Self { b0, b1: 0.0, bz: 0.0, omega, mu, periods: 1 }
    }

    pub fn period(&self) -> f64 {
        TAU * self.periods as f64 / self.omega.abs()
    }

    /// `μ B0 / (ħ ω)`.
    pub fn drive_ratio(&self, hbar: f64) -> f64 {
        self.mu * self.b0 / (hbar * self.omega.abs())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.b0 > 0.0 && self.b0.is_finite()) {
            return bad("B0 must be positive and finite");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu must be positive and finite");
        }
        if !self.b1.is_finite() || !self.bz.is_finite() {
            return bad("b1 and Bz must be finite");
        }
        if self.omega == 0.0 || !self.omega.is_finite() {
            return bad("omega must be nonzero: a static field traces no closed loop");
        }
        if self.periods == 0 {
            return bad("periods must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct RotatingField {
    b0: f64,
    b1: f64,
    bz: f64,
    omega: f64,
}

impl Curve for RotatingField {
    fn field(&self, t: f64) -> Vec3 {
        let (s, c) = (self.omega * t).sin_cos();
        [self.b0 * (self.b1 + c), self.b0 * s, self.bz]
    }

    fn field_rate(&self, t: f64) -> Option<Vec3> {
        let (s, c) = (self.omega * t).sin_cos();
        let k = self.b0 * self.omega;
        Some([-k * s, k * c, 0.0])
    }
}

pub fn build_field_path(model: &FieldSweepModel) -> Result<ParameterPath> {
    model.validate()?;
    let curve = RotatingField { b0: model.b0, b1: model.b1, bz: model.bz, omega: model.omega };
    ParameterPath::new(Arc::new(curve), model.period(), model.mu)
}

/// Level spacing never below `ΔE`: the out-of-plane field is pinned at
/// `ΔE / 2g` while the in-plane components rotate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoCrossingModel {
    #[serde(rename = "delta_E")]
    pub delta_e: f64,
    pub g: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    #[serde(default)]
    pub b1: f64,
    pub omega: f64,
    #[serde(default = "one")]
    pub periods: u32,
}

impl NoCrossingModel {
    pub fn pinned_field(&self) -> f64 {
        self.delta_e / (2.0 * self.g)
    }

    pub fn as_field_model(&self) -> Result<FieldSweepModel> {
        if !(self.delta_e > 0.0 && self.delta_e.is_finite()) {
            return Err(Error::InvalidConfig("delta_E must be positive and finite".into()));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidConfig("g must be positive and finite".into()));
        }
        Ok(FieldSweepModel {
            b0: self.b0,
            b1: self.b1,
            bz: self.pinned_field(),
            omega: self.omega,
            mu: self.g,
            periods: self.periods,
        })
    }
}

pub fn build_no_crossing_path(model: &NoCrossingModel) -> Result<ParameterPath> {
    build_field_path(&model.as_field_model()?)
}

pub const DEFAULT_SEGMENT_SPLIT: [f64; 3] = [0.25, 0.5, 0.25];

/// Shrink `|y|` at fixed angles, turn φ through 2π at the small radius,
/// then restore `|y|`; all within total time `period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShrinkRotateReturn {
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    pub r_start: f64,
    pub r_small: f64,
    pub period: f64,
    pub g: f64,
    #[serde(default = "default_split")]
    pub split: [f64; 3],
}

fn default_split() -> [f64; 3] {
    DEFAULT_SEGMENT_SPLIT
}

impl ShrinkRotateReturn {
    pub fn validate(&self, r_min: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.theta > 0.0 && self.theta < PI) {
            return bad(format!("theta must lie strictly between 0 and pi, got {}", self.theta));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return bad(format!("g must be positive, got {}", self.g));
        }
        if !(self.r_start.is_finite() && self.r_small.is_finite() && self.phi.is_finite()) {
            return bad("r_start, r_small and phi must be finite".into());
        }
        if self.r_small < r_min || self.r_start < r_min {
            return Err(Error::Degenerate { r: self.r_small.min(self.r_start), r_min });
        }
        let sum: f64 = self.split.iter().sum();
        if self.split.iter().any(|s| !(*s >= 0.0)) || (sum - 1.0).abs() > 1e-12 || self.split[1] <= 0.0 {
            return bad(format!(
                "split must be nonnegative, sum to 1 and give the rotation time, got {:?}",
                self.split
            ));
        }
        if self.r_start != self.r_small && (self.split[0] <= 0.0 || self.split[2] <= 0.0) {
            return bad("radial segments need nonzero time when r_start != r_small".into());
        }
        Ok(())
    }

    fn times(&self) -> (f64, f64) {
        let t1 = self.split[0] * self.period;
        (t1, t1 + self.split[1] * self.period)
    }
}

struct ShrinkRotateCurve {
    spec: ShrinkRotateReturn,
    t1: f64,
    t2: f64,
}

impl ShrinkRotateCurve {
    /// `(r, ṙ, φ, φ̇)` at `t`.
    fn profile(&self, t: f64) -> (f64, f64, f64, f64) {
        let s = &self.spec;
        let dr = s.r_start - s.r_small;
        if t < self.t1 {
            let u = PI * t / self.t1;
            (s.r_small + 0.5 * dr * (1.0 + u.cos()), -0.5 * dr * u.sin() * PI / self.t1, s.phi, 0.0)
        } else if t <= self.t2 {
            let rate = TAU / (self.t2 - self.t1);
            (s.r_small, 0.0, s.phi + rate * (t - self.t1), rate)
        } else {
            let len = s.period - self.t2;
            let u = PI * (t - self.t2) / len;
            (s.r_small + 0.5 * dr * (1.0 - u.cos()), 0.5 * dr * u.sin() * PI / len, s.phi + TAU, 0.0)
        }
    }
}

impl Curve for ShrinkRotateCurve {
    fn field(&self, t: f64) -> Vec3 {
        let (r, _, phi, _) = self.profile(t);
        from_polar(r, self.spec.theta, phi)
    }

    fn field_rate(&self, t: f64) -> Option<Vec3> {
        let (r, r_dot, phi, phi_dot) = self.profile(t);
        let (st, ct) = self.spec.theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Some([r_dot * st * cp - r * st * sp * phi_dot, r_dot * st * sp + r * st * cp * phi_dot, r_dot * ct])
    }

    fn breakpoints(&self) -> Vec<f64> {
        [self.t1, self.t2].into_iter().filter(|&b| b > 0.0 && b < self.spec.period).collect()
    }
}

pub fn build_shrink_rotate_return_path(spec: &ShrinkRotateReturn, r_min: f64) -> Result<ParameterPath> {
    spec.validate(r_min)?;
    let (t1, t2) = spec.times();
    let curve = ShrinkRotateCurve { spec: *spec, t1, t2 };
    Ok(ParameterPath::new(Arc::new(curve), spec.period, spec.g)?.with_r_min(r_min))
}

/// Closed Fourier-series loop
/// `y(t) = centre + Σ_k [a_k cos(k ω t) + b_k sin(k ω t)]`, `ω = 2π/T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierLoop {
    pub period: f64,
    pub g: f64,
    #[serde(default)]
    pub e0: f64,
    pub center: Vec3,
    #[serde(default)]
    pub cos: Vec<Vec3>,
    #[serde(default)]
    pub sin: Vec<Vec3>,
}

impl Curve for FourierLoop {
    fn field(&self, t: f64) -> Vec3 {
        let w = TAU / self.period;
        let mut y = self.center;
        for (k, a) in self.cos.iter().enumerate() {
            let c = ((k + 1) as f64 * w * t).cos();
            for i in 0..3 {
                y[i] += a[i] * c;
            }
        }
        for (k, b) in self.sin.iter().enumerate() {
            let s = ((k + 1) as f64 * w * t).sin();
            for i in 0..3 {
                y[i] += b[i] * s;
            }
        }
        y
    }

    fn field_rate(&self, t: f64) -> Option<Vec3> {
        let w = TAU / self.period;
        let mut d = [0.0; 3];
        for (k, a) in self.cos.iter().enumerate() {
            let kw = (k + 1) as f64 * w;
            let s = (kw * t).sin();
            for i in 0..3 {
                d[i] -= a[i] * kw * s;
            }
        }
        for (k, b) in self.sin.iter().enumerate() {
            let kw = (k + 1) as f64 * w;
            let c = (kw * t).cos();
            for i in 0..3 {
                d[i] += b[i] * kw * c;
            }
        }
        Some(d)
    }
}

pub fn build_fourier_path(spec: &FourierLoop) -> Result<ParameterPath> {
    let finite = |v: &Vec3| v.iter().all(|x| x.is_finite());
    if !finite(&spec.center) || !spec.cos.iter().all(finite) || !spec.sin.iter().all(finite) {
        return Err(Error::InvalidConfig("Fourier coefficients must be finite".into()));
    }
    Ok(ParameterPath::new(Arc::new(spec.clone()), spec.period, spec.g)?.with_energy_offset(spec.e0))
}
