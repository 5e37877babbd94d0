//! Geometric connection `A_mn·ẏ = ⟨v_m| i ∂t |v_n⟩` in the φ-gauge, its
//! finite-difference counterpart, loop integrals and solid angles.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Spinor, Vec3};
use crate::model::{eigenvectors, to_polar_with, Level, ParameterPath, PolarField};

/// Default node count for loop quadratures.
pub const DEFAULT_QUADRATURE_NODES: usize = 4096;

/// 2×2 matrix of connection values, rows/columns ordered `(+, -)`.
/// Units are rad/time: no factor of ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionMatrix {
    pub entries: [[C64; 2]; 2],
}

impl ConnectionMatrix {
    pub fn zero() -> Self {
        Self { entries: [[C64::new(0.0, 0.0); 2]; 2] }
    }

    pub fn get(&self, m: Level, n: Level) -> C64 {
        self.entries[m.index()][n.index()]
    }

    pub fn max_abs_diff(&self, other: &ConnectionMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.entries[i][j] - other.entries[i][j]).norm());
            }
        }
        d
    }

    /// Largest deviation from Hermiticity, including imaginary parts on the
    /// diagonal.
    pub fn hermiticity_defect(&self) -> f64 {
        let e = &self.entries;
        (e[0][1] - e[1][0].conj()).norm().max(e[0][0].im.abs()).max(e[1][1].im.abs())
    }
}

/// Closed-form connection in the φ-gauge:
///
/// ```text
/// A++ = (1 + cos θ) φ̇ / 2
/// A-- = (1 - cos θ) φ̇ / 2
/// A+- = (sin θ / 2) φ̇ + (i/2) θ̇ = conj(A-+)
/// ```
pub fn connection_analytic(theta: f64, theta_dot: f64, phi_dot: f64) -> ConnectionMatrix {
    let (s, c) = theta.sin_cos();
    let pm = C64::new(0.5 * s * phi_dot, 0.5 * theta_dot);
    ConnectionMatrix {
        entries: [
            [C64::new(0.5 * (1.0 + c) * phi_dot, 0.0), pm],
            [pm.conj(), C64::new(0.5 * (1.0 - c) * phi_dot, 0.0)],
        ],
    }
}

/// Connection of `path` at time `t` from the analytic formula and the path
/// derivative.
pub fn connection_on_path(path: &ParameterPath, t: f64) -> ConnectionMatrix {
    let pr = path.polar_rates_on(t, path.segment_at(t));
    connection_analytic(pr.theta, pr.theta_dot, pr.phi_dot)
}

/// Phase convention for the finite-difference connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// Eigenvectors exactly as given by the φ-gauge formula.
    #[default]
    Polar,
    /// Neighbouring eigenvectors rephased so `⟨v_n(t)|v_n(t±dt)⟩ > 0`.
    Parallel,
}

fn stencil_frame(path: &ParameterPath, t: f64, previous: Option<&PolarField>) -> Result<(PolarField, [Spinor; 2])> {
    let y: Vec3 = path.field(t);
    let p = to_polar_with(&y, previous, path.r_min()).map_err(|e| Error::Stencil { t, reason: e.to_string() })?;
    if p.gauge_fixed_at_pole {
        return Err(Error::Stencil { t, reason: "field direction at a pole".into() });
    }
    let (vp, vm) = eigenvectors(p.theta, p.phi);
    Ok((p, [vp, vm]))
}

/// `⟨v_m(t)| i (v_n(t+dt) - v_n(t-dt)) / (2 dt)⟩` with eigenvectors taken from
/// the φ-gauge formula (or rephased, for [`Gauge::Parallel`]).
pub fn connection_numeric(path: &ParameterPath, t: f64, dt: f64) -> Result<ConnectionMatrix> {
    connection_numeric_in(path, t, dt, Gauge::Polar)
}

pub fn connection_numeric_in(path: &ParameterPath, t: f64, dt: f64, gauge: Gauge) -> Result<ConnectionMatrix> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("stencil step must be positive, got {dt}")));
    }
    let (p0, centre) = stencil_frame(path, t, None)?;
    let (pb, mut back) = stencil_frame(path, t - dt, Some(&p0))?;
    let (pf, mut fwd) = stencil_frame(path, t + dt, Some(&p0))?;
    // an azimuth jump this large means the stencil straddles a pole
    if (pb.phi - p0.phi).abs() > FRAC_PI_2 || (pf.phi - p0.phi).abs() > FRAC_PI_2 {
        return Err(Error::Stencil { t, reason: "azimuth jump across stencil (pole nearby)".into() });
    }
    if gauge == Gauge::Parallel {
        for n in 0..2 {
            for v in [&mut back[n], &mut fwd[n]] {
                let ov = centre[n].inner(v);
                if ov.norm() == 0.0 {
                    return Err(Error::Stencil { t, reason: "orthogonal neighbouring eigenvectors".into() });
                }
                *v = v.scale(ov.conj() / ov.norm());
            }
        }
    }
    let mut entries = [[C64::new(0.0, 0.0); 2]; 2];
    let i_over = C64::new(0.0, 1.0 / (2.0 * dt));
    for (m, row) in entries.iter_mut().enumerate() {
        for (n, e) in row.iter_mut().enumerate() {
            let diff = fwd[n] - back[n];
            *e = centre[m].inner(&diff) * i_over;
        }
    }
    Ok(ConnectionMatrix { entries })
}

/// Integrated diagonal connection over a closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopIntegral {
    /// `∫ A++ dt`.
    pub gamma_plus: f64,
    /// `∫ A-- dt`; the adiabatic geometric phase of the lower level.
    pub gamma_minus: f64,
    /// Signed solid angle swept by the field direction, measured from the
    /// north pole.
    pub solid_angle: f64,
    /// Net azimuthal turns.
    pub winding: i64,
    pub samples: usize,
}

/// Split `n` nodes across the smooth segments, proportionally to length,
/// with an even interval count in each.
pub(crate) fn segment_nodes(path: &ParameterPath, n: usize) -> Vec<(f64, f64, usize)> {
    let t_total = path.period();
    path.segments()
        .into_iter()
        .filter(|(a, b)| b > a)
        .map(|(a, b)| {
            let share = ((b - a) / t_total * n as f64).ceil() as usize;
            let k = share.max(2);
            (a, b, k + (k % 2))
        })
        .collect()
}

/// Composite Simpson over each smooth segment of the path.
pub(crate) fn simpson_on_path(
    path: &ParameterPath,
    n: usize,
    mut f: impl FnMut(f64, (f64, f64)) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for (a, b, k) in segment_nodes(path, n) {
        let h = (b - a) / k as f64;
        let mut s = f(a, (a, b))? + f(b, (a, b))?;
        for i in 1..k {
            let t = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t, (a, b))?;
        }
        total += s * h / 3.0;
    }
    Ok(total)
}

fn unit(y: &Vec3) -> Vec3 {
    let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    [y[0] / r, y[1] / r, y[2] / r]
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Signed area of the spherical triangle `(a, b, c)`.
fn triangle_excess(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = dot(a, &cross(b, c));
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

fn fan_area(reference: &Vec3, dirs: &[Vec3], stride: usize) -> f64 {
    let pts: Vec<&Vec3> = dirs.iter().step_by(stride).collect();
    pts.windows(2).map(|w| triangle_excess(reference, w[0], w[1])).sum()
}

/// Solid angle enclosed by a closed sequence of directions (first and last
/// equal), fanned from whichever pole lies farther from the loop and
/// expressed relative to the north pole. The geodesic-polygon error is
/// removed by one Richardson step against the every-other-node polygon.
pub fn solid_angle(dirs: &[Vec3], winding: i64) -> f64 {
    let min_z = dirs.iter().map(|u| u[2]).fold(f64::INFINITY, f64::min);
    let max_z = dirs.iter().map(|u| u[2]).fold(f64::NEG_INFINITY, f64::max);
    let (reference, offset) = if 1.0 + min_z >= 1.0 - max_z {
        ([0.0, 0.0, 1.0], 0.0)
    } else {
        // area from the south pole differs by 4π per turn about the z axis
        ([0.0, 0.0, -1.0], 2.0 * TAU * winding as f64)
    };
    let fine = fan_area(&reference, dirs, 1);
    let extrapolated = if dirs.len() % 2 == 1 && dirs.len() >= 5 {
        let coarse = fan_area(&reference, dirs, 2);
        (4.0 * fine - coarse) / 3.0
    } else {
        fine
    };
    extrapolated + offset
}

/// `∮ A±± dt` by composite Simpson with about `quadrature_n` nodes, plus the
/// solid angle of the loop of field directions.
pub fn berry_loop_integral(path: &ParameterPath, quadrature_n: usize) -> Result<LoopIntegral> {
    path.require_closed()?;
    if quadrature_n < 2 {
        return Err(Error::InvalidConfig("quadrature needs at least 2 nodes".into()));
    }
    let r_min = path.r_min();
    let check = |t: f64, seg: (f64, f64)| -> Result<crate::model::PolarRates> {
        let pr = path.polar_rates_on(t, seg);
        if !(pr.r > r_min) {
            return Err(Error::Degenerate { r: pr.r, r_min });
        }
        if pr.theta.sin() <= 1e-12 {
            return Err(Error::Singular { t, reason: format!("field direction at a pole (θ = {})", pr.theta) });
        }
        Ok(pr)
    };
    let mut dirs = Vec::new();
    let mut polar: Option<PolarField> = None;
    let mut phi_start = 0.0;
    let mut samples = 0;
    let mut gp = 0.0;
    let mut gm = 0.0;
    for (a, b, k) in segment_nodes(path, quadrature_n) {
        let h = (b - a) / k as f64;
        let (mut sp, mut sm) = (0.0, 0.0);
        for i in 0..=k {
            let t = if i == k { b } else { a + h * i as f64 };
            let pr = check(t, (a, b))?;
            let w = if i == 0 || i == k {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let c = pr.theta.cos();
            sp += w * 0.5 * (1.0 + c) * pr.phi_dot;
            sm += w * 0.5 * (1.0 - c) * pr.phi_dot;
            // segment endpoints are shared; keep one copy
            if i > 0 || dirs.is_empty() {
                let y = path.field(t);
                let p = to_polar_with(&y, polar.as_ref(), r_min)?;
                if polar.is_none() {
                    phi_start = p.phi;
                }
                polar = Some(p);
                dirs.push(unit(&y));
            }
            samples += 1;
        }
        gp += sp * h / 3.0;
        gm += sm * h / 3.0;
    }
    let winding = polar.map_or(0, |p| ((p.phi - phi_start) / TAU).round() as i64);
    Ok(LoopIntegral { gamma_plus: gp, gamma_minus: gm, solid_angle: solid_angle(&dirs, winding), winding, samples })
}

/// Lower-level loop integral before and after the uniform scaling `y -> ε y`.
pub fn scaling_check(path: &ParameterPath, epsilon: f64) -> Result<(f64, f64)> {
    let before = berry_loop_integral(path, DEFAULT_QUADRATURE_NODES)?;
    let scaled = path.scaled(epsilon)?;
    let after = berry_loop_integral(&scaled, DEFAULT_QUADRATURE_NODES)?;
    Ok((before.gamma_minus, after.gamma_minus))
}

/// One row of an analytic-vs-numeric comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionComparison {
    pub t: f64,
    pub entry: &'static str,
    pub analytic: C64,
    pub numeric: C64,
    pub abs_error: f64,
}

/// Compare the closed form against central differences at `points` evenly
/// spaced interior times, with stencil `dt`.
pub fn connection_comparison(path: &ParameterPath, points: usize, dt: f64) -> Result<Vec<ConnectionComparison>> {
    const LABELS: [[&str; 2]; 2] = [["++", "+-"], ["-+", "--"]];
    let mut rows = Vec::with_capacity(4 * points);
    for k in 0..points {
        let t = path.period() * (k as f64 + 0.5) / points as f64;
        let a = connection_on_path(path, t);
        let n = connection_numeric(path, t, dt)?;
        for (i, row) in LABELS.iter().enumerate() {
            for (j, &entry) in row.iter().enumerate() {
                rows.push(ConnectionComparison {
                    t,
                    entry,
                    analytic: a.entries[i][j],
                    numeric: n.entries[i][j],
                    abs_error: (a.entries[i][j] - n.entries[i][j]).norm(),
                });
            }
        }
    }
    Ok(rows)
}
