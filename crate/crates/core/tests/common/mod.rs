#![allow(dead_code)]

use std::f64::consts::TAU;
use std::sync::Arc;

use levelcross::linalg::Herm2;
use levelcross::model::{from_polar, Curve, ParameterPath};
use levelcross::{Complex64, Spinor, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One Fourier term `a cos(k w t) + b sin(k w t)`.
#[derive(Debug, Clone, Copy)]
pub struct Harmonic {
    pub k: f64,
    pub a: f64,
    pub b: f64,
}

fn series(terms: &[Harmonic], w: f64, t: f64) -> (f64, f64) {
    terms.iter().fold((0.0, 0.0), |(v, d), h| {
        let (s, c) = (h.k * w * t).sin_cos();
        (v + h.a * c + h.b * s, d + h.k * w * (h.b * c - h.a * s))
    })
}

/// Closed loop given in polar form: `r`, `θ` periodic, `φ` winding
/// `winding` times plus a periodic wobble.
#[derive(Debug, Clone)]
pub struct PolarLoop {
    pub period: f64,
    pub r0: f64,
    pub theta0: f64,
    pub winding: f64,
    pub phi0: f64,
    pub r_terms: Vec<Harmonic>,
    pub theta_terms: Vec<Harmonic>,
    pub phi_terms: Vec<Harmonic>,
}

impl PolarLoop {
    /// `(r, θ, φ)` and their time derivatives.
    pub fn angles(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let w = TAU / self.period;
        let (r, dr) = series(&self.r_terms, w, t);
        let (th, dth) = series(&self.theta_terms, w, t);
        let (ph, dph) = series(&self.phi_terms, w, t);
        ([self.r0 + r, self.theta0 + th, self.phi0 + self.winding * w * t + ph], [dr, dth, self.winding * w + dph])
    }
}

impl Curve for PolarLoop {
    fn field(&self, t: f64) -> Vec3 {
        let ([r, th, ph], _) = self.angles(t);
        from_polar(r, th, ph)
    }

    fn field_rate(&self, t: f64) -> Option<Vec3> {
        let ([r, th, ph], [dr, dth, dph]) = self.angles(t);
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        Some([
            dr * st * cp + r * ct * cp * dth - r * st * sp * dph,
            dr * st * sp + r * ct * sp * dth + r * st * cp * dph,
            dr * ct - r * st * dth,
        ])
    }
}

fn harmonics(rng: &mut ChaCha8Rng, budget: f64) -> Vec<Harmonic> {
    let n = rng.gen_range(1..=3);
    (1..=n)
        .map(|k| {
            let scale = budget / (n as f64 * std::f64::consts::SQRT_2);
            Harmonic { k: k as f64, a: rng.gen_range(-scale..scale), b: rng.gen_range(-scale..scale) }
        })
        .collect()
}

/// Random smooth closed loop with `θ` inside `[lo, hi]`, `|y|` inside
/// `[r_lo, r_hi]` and the given azimuthal winding.
pub fn random_loop(
    rng: &mut ChaCha8Rng,
    period: f64,
    (lo, hi): (f64, f64),
    (r_lo, r_hi): (f64, f64),
    winding: f64,
) -> PolarLoop {
    let theta0 = rng.gen_range(lo..hi);
    let theta_budget = (theta0 - lo).min(hi - theta0);
    let r0 = rng.gen_range(r_lo..r_hi);
    let r_budget = (r0 - r_lo).min(r_hi - r0);
    PolarLoop {
        period,
        r0,
        theta0,
        winding,
        phi0: rng.gen_range(0.0..TAU),
        r_terms: harmonics(rng, r_budget),
        theta_terms: harmonics(rng, theta_budget),
        phi_terms: if winding == 0.0 { Vec::new() } else { harmonics(rng, 0.5) },
    }
}

pub fn path_of(curve: PolarLoop, g: f64) -> ParameterPath {
    let period = curve.period;
    ParameterPath::new(Arc::new(curve), period, g).unwrap()
}

/// Exact state for `h = g σ·y` with `y` rotating about z at rate `omega`:
/// `ψ(t) = R(t) exp(-i (h(0) - ħω σz/2) t / ħ) ψ(0)`, `R(t) = exp(-i ω t σz/2)`.
pub fn rotating_field_state(y0: Vec3, g: f64, omega: f64, hbar: f64, psi0: Spinor, t: f64) -> Spinor {
    let k = Herm2 { scalar: 0.0, vector: [g * y0[0], g * y0[1], g * y0[2] - 0.5 * hbar * omega] };
    let inner = k.propagator(t / hbar).apply(&psi0);
    let half = 0.5 * omega * t;
    Spinor::new(inner.upper * Complex64::from_polar(1.0, -half), inner.lower * Complex64::from_polar(1.0, half))
}
