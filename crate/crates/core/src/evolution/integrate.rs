//! Steppers for `iħ ẋ = K(t) x` with the dynamical integral
//! `(1/ħ) ∫ ⟨x|h|x⟩ dt` accumulated alongside.

use super::frames::Frame;
use super::{EvolutionConfig, Integrator, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::linalg::{Herm2, Spinor};

/// Steps per period used when no `max_step` is configured.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;

/// Largest phase advance `|K| h / ħ` per exponential step under the automatic
/// step choice.
pub const AUTO_PHASE_PER_STEP: f64 = 0.02;

pub(crate) struct Propagation {
    pub state: Spinor,
    pub dynamical: f64,
    pub steps: usize,
    pub min_field: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

struct Recorder<'f> {
    frame: &'f dyn Frame,
    points: Option<Vec<TrajectoryPoint>>,
    min_field: f64,
}

impl Recorder<'_> {
    fn visit(&mut self, t: f64, x: &Spinor) -> Result<()> {
        let path = self.frame.path();
        let y = path.field(t);
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        self.min_field = self.min_field.min(r);
        if let Some(points) = self.points.as_mut() {
            let state = self.frame.to_fixed(t, x)?;
            let shift = path.scalar_shift(t);
            let gr = path.coupling_g() * r;
            points.push(TrajectoryPoint { t, state, e_plus: shift + gr, e_minus: shift - gr });
        }
        Ok(())
    }
}

/// Smooth sub-intervals between `from` and `to`, in the direction of travel.
fn oriented_segments(frame: &dyn Frame, from: f64, to: f64) -> Vec<(f64, f64)> {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let mut cuts: Vec<f64> = vec![lo];
    for (a, _) in frame.path().segments() {
        if a > lo && a < hi {
            cuts.push(a);
        }
    }
    cuts.push(hi);
    let mut segs: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect();
    if from > to {
        segs.reverse();
        for s in segs.iter_mut() {
            *s = (s.1, s.0);
        }
    }
    segs
}

/// Step cap: the configured `max_step`, else an automatic choice.
fn step_cap(frame: &dyn Frame, cfg: &EvolutionConfig) -> Result<f64> {
    let period = frame.path().period();
    if let Some(h) = cfg.max_step {
        return Ok(h);
    }
    match cfg.integrator {
        Integrator::RkAdaptive => Ok(period / 16.0),
        Integrator::MidpointExponential => {
            let mut scale: f64 = 0.0;
            let samples = 256;
            for (a, b) in frame.path().segments() {
                for k in 0..=samples {
                    let t = a + (b - a) * k as f64 / samples as f64;
                    let (gen, _) = frame.operators(t, (a, b))?;
                    scale = scale.max(gen.half_gap());
                }
            }
            let by_phase = if scale > 0.0 { AUTO_PHASE_PER_STEP * cfg.hbar / scale } else { f64::INFINITY };
            Ok((period / DEFAULT_STEPS_PER_PERIOD as f64).min(by_phase))
        }
    }
}

pub(crate) fn propagate(
    frame: &dyn Frame,
    x0: Spinor,
    from: f64,
    to: f64,
    cfg: &EvolutionConfig,
) -> Result<Propagation> {
    let cap = step_cap(frame, cfg)?;
    let mut rec = Recorder { frame, points: cfg.record_trajectory.then(Vec::new), min_field: f64::INFINITY };
    rec.visit(from, &x0)?;
    let mut state = x0;
    let mut dynamical = 0.0;
    let mut steps = 0;
    for (a, b) in oriented_segments(frame, from, to) {
        let seg = match cfg.integrator {
            Integrator::MidpointExponential => midpoint_segment(frame, state, a, b, cap, cfg.hbar, &mut rec)?,
            Integrator::RkAdaptive => dopri_segment(frame, state, a, b, cap, cfg, &mut rec)?,
        };
        state = seg.0;
        dynamical += seg.1;
        steps += seg.2;
    }
    Ok(Propagation { state, dynamical, steps, min_field: rec.min_field, trajectory: rec.points })
}

/// Exponential midpoint rule: each step applies `exp(-i K(t + h/2) h / ħ)`
/// exactly, as two half-step propagators. The half-way state feeds a Simpson
/// estimate of the dynamical integral.
fn midpoint_segment(
    frame: &dyn Frame,
    x0: Spinor,
    a: f64,
    b: f64,
    cap: f64,
    hbar: f64,
    rec: &mut Recorder<'_>,
) -> Result<(Spinor, f64, usize)> {
    let seg = (a.min(b), a.max(b));
    let n = ((b - a).abs() / cap).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut x = x0;
    let mut dynamical = 0.0;
    let mut e_start = frame.operators(a, seg)?.1.expectation(&x);
    for k in 0..n {
        let t0 = a + h * k as f64;
        let t1 = if k + 1 == n { b } else { a + h * (k + 1) as f64 };
        let tm = 0.5 * (t0 + t1);
        let (gen, energy_mid) = frame.operators(tm, seg)?;
        let half = gen.propagator(0.5 * (t1 - t0) / hbar);
        let x_mid = half.apply(&x);
        let x1 = half.apply(&x_mid);
        let e_end = frame.operators(t1, seg)?.1.expectation(&x1);
        dynamical += (t1 - t0) / 6.0 * (e_start + 4.0 * energy_mid.expectation(&x_mid) + e_end) / hbar;
        x = x1;
        e_start = e_end;
        rec.visit(t1, &x)?;
    }
    Ok((x, dynamical, n))
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

type State = [f64; 5];

fn rhs(frame: &dyn Frame, t: f64, seg: (f64, f64), y: &State, hbar: f64) -> Result<State> {
    let (gen, energy) = frame.operators(t, seg)?;
    let x = Spinor::from_slice(&y[..4]);
    let kx = gen.apply(&x);
    // ẋ = -(i/ħ) K x
    Ok([
        kx.upper.im / hbar,
        -kx.upper.re / hbar,
        kx.lower.im / hbar,
        -kx.lower.re / hbar,
        energy.expectation(&x) / hbar,
    ])
}

fn rate_scale(gen: &Herm2, hbar: f64) -> f64 {
    (gen.scalar.abs() + gen.half_gap()) / hbar
}

/// Adaptive Dormand–Prince 5(4) with FSAL and a mixed absolute/relative
/// error norm. The step never exceeds `cap` and aborts below `T·1e-12`.
fn dopri_segment(
    frame: &dyn Frame,
    x0: Spinor,
    a: f64,
    b: f64,
    cap: f64,
    cfg: &EvolutionConfig,
    rec: &mut Recorder<'_>,
) -> Result<(Spinor, f64, usize)> {
    let hbar = cfg.hbar;
    let dir = (b - a).signum();
    let span = (b - a).abs();
    let underflow = frame.path().period() * 1e-12;
    let seg = (a.min(b), a.max(b));
    let x = x0.to_array();
    let mut y: State = [x[0], x[1], x[2], x[3], 0.0];
    let mut t = a;
    let mut k1 = rhs(frame, t, seg, &y, hbar)?;
    let rate = rate_scale(&frame.operators(a, seg)?.0, hbar).max(1.0 / frame.path().period());
    let mut h = (0.1 * cfg.rel_tol.powf(0.2) / rate).min(cap).min(span);
    let mut steps = 0;
    loop {
        let remaining = (b - t).abs();
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let mut k = [[0.0; 5]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let w = A[s][j] * hs * dir;
                if w != 0.0 {
                    for i in 0..5 {
                        ys[i] += w * kj[i];
                    }
                }
            }
            k[s] = rhs(frame, t + dir * C[s] * hs, seg, &ys, hbar)?;
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let w = A[6][j] * hs * dir;
            for i in 0..5 {
                y_new[i] += w * kj[i];
            }
        }
        let mut err_sq = 0.0;
        for i in 0..5 {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= hs;
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / 5.0).sqrt();
        if err <= 1.0 {
            t = if last { b } else { t + dir * hs };
            y = y_new;
            k1 = k[6];
            steps += 1;
            rec.visit(t, &Spinor::from_slice(&y[..4]))?;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (hs * grow).min(cap);
            if last {
                break;
            }
        } else {
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < underflow {
                return Err(Error::IntegrationFailure { t_reached: t, step: h });
            }
        }
    }
    Ok((Spinor::from_slice(&y[..4]), y[4], steps))
}
