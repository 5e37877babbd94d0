//! Unitary evolution of the two-level state in three equivalent
//! representations, and the adiabatic approximation.
//!
//! * fixed basis: `iħ ψ̇ = h(t) ψ`
//! * instantaneous eigenbasis `ψ = b+ v+ + b- v-`:
//!   `iħ ḃ = [diag(E+, E-) - ħ A] b`, off-diagonal connection included
//! * rotated basis `b = U(θ) c`: the θ̇ part of the connection cancels and
//!   only `-ħ φ̇` survives, on the `(+,+)` entry
//!
//! Mapping the effective-basis results back through `U(θ)` and the eigenframe
//! must reproduce the fixed-basis run; the tests use this as an oracle.

mod frames;
mod integrate;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::connection::{simpson_on_path, DEFAULT_QUADRATURE_NODES};
use crate::error::{Error, Result};
use crate::linalg::Spinor;
use crate::model::{Level, ParameterPath};

pub use frames::{
    instantaneous_frame_matrix, instantaneous_generator, rotated_energy, rotated_generator,
    rotated_generator_by_transform, theta_rotation, to_instantaneous, to_rotated, InstantaneousTerms, RotatedTerms,
};
pub use integrate::{AUTO_PHASE_PER_STEP, DEFAULT_STEPS_PER_PERIOD};

use frames::{FixedFrame, Frame, InstantaneousFrame, RotatedFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Exact 2×2 exponential of the midpoint generator per step; second
    /// order, unitary to rounding.
    #[default]
    MidpointExponential,
    /// Embedded Dormand–Prince 5(4) pair with step control.
    RkAdaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Basis {
    #[default]
    #[serde(rename = "original")]
    Original,
    /// Instantaneous eigenbasis (`b` coefficients).
    #[serde(rename = "b")]
    Instantaneous,
    /// θ-rotated eigenbasis (`c` coefficients).
    #[serde(rename = "c")]
    Rotated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step; `None` picks one from the path. Must not
    /// exceed `T/16`. The exponential integrator takes uniform steps of at
    /// most this size on each smooth segment.
    pub max_step: Option<f64>,
    pub integrator: Integrator,
    pub hbar: f64,
    pub record_trajectory: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            integrator: Integrator::MidpointExponential,
            hbar: 1.0,
            record_trajectory: false,
        }
    }
}

impl EvolutionConfig {
    pub fn rk(rel_tol: f64) -> Self {
        Self { rel_tol, abs_tol: rel_tol * 1e-2, integrator: Integrator::RkAdaptive, ..Self::default() }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    pub fn validate(&self, period: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return bad(format!("tolerances must be positive (rel {}, abs {})", self.rel_tol, self.abs_tol));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return bad(format!("hbar must be positive, got {}", self.hbar));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return bad(format!("max_step must be positive, got {h}"));
            }
            if h > period / 16.0 * (1.0 + 1e-12) {
                return bad(format!("max_step {h} exceeds T/16 = {}", period / 16.0));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    /// Fixed-basis state.
    pub state: Spinor,
    pub e_plus: f64,
    pub e_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionResult {
    /// Final state in the fixed basis.
    pub final_state: Spinor,
    /// Final coefficients in the basis the run was integrated in.
    pub final_coefficients: Spinor,
    pub basis: Basis,
    /// `(1/ħ) ∫ ⟨ψ|h|ψ⟩ dt`.
    pub dynamical_integral: f64,
    pub norm_drift: f64,
    pub steps: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub period: f64,
    pub path_closed: bool,
    /// `T g min|y| / (ħ π)` over the visited step points.
    pub adiabaticity_ratio: f64,
    pub hbar: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

fn check_normalized(x: &Spinor) -> Result<()> {
    if !x.is_finite() || (x.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("initial state must be normalized, |psi| = {}", x.norm())));
    }
    Ok(())
}

fn run(
    frame: &dyn Frame,
    basis: Basis,
    x0: Spinor,
    from: f64,
    to: f64,
    cfg: &EvolutionConfig,
) -> Result<EvolutionResult> {
    let path = frame.path();
    cfg.validate(path.period())?;
    check_normalized(&x0)?;
    for t in [from, to] {
        if !(0.0..=path.period()).contains(&t) {
            return Err(Error::Domain { t, period: path.period() });
        }
    }
    let prop = integrate::propagate(frame, x0, from, to, cfg)?;
    let final_state = frame.to_fixed(to, &prop.state)?;
    Ok(EvolutionResult {
        final_state,
        final_coefficients: prop.state,
        basis,
        dynamical_integral: prop.dynamical,
        norm_drift: (prop.state.norm() - 1.0).abs(),
        steps: prop.steps,
        t_start: from,
        t_end: to,
        period: path.period(),
        path_closed: path.is_closed(),
        adiabaticity_ratio: path.period() * path.coupling_g() * prop.min_field / (cfg.hbar * PI),
        hbar: cfg.hbar,
        trajectory: prop.trajectory,
    })
}

/// Evolve `psi0` over one traversal of `path` in the fixed basis.
pub fn evolve_exact(path: &ParameterPath, psi0: Spinor, cfg: &EvolutionConfig) -> Result<EvolutionResult> {
    evolve_exact_interval(path, psi0, 0.0, path.period(), cfg)
}

/// Fixed-basis evolution from `t_from` to `t_to`; `t_to < t_from` runs
/// backwards in time.
pub fn evolve_exact_interval(
    path: &ParameterPath,
    psi: Spinor,
    t_from: f64,
    t_to: f64,
    cfg: &EvolutionConfig,
) -> Result<EvolutionResult> {
    run(&FixedFrame { path }, Basis::Original, psi, t_from, t_to, cfg)
}

/// Evolve instantaneous-basis coefficients `(b+, b-)` with the full
/// effective generator.
pub fn evolve_effective_b(path: &ParameterPath, coeffs0: Spinor, cfg: &EvolutionConfig) -> Result<EvolutionResult> {
    evolve_effective_b_with(path, coeffs0, cfg, InstantaneousTerms::Full)
}

pub fn evolve_effective_b_with(
    path: &ParameterPath,
    coeffs0: Spinor,
    cfg: &EvolutionConfig,
    terms: InstantaneousTerms,
) -> Result<EvolutionResult> {
    let frame = InstantaneousFrame { path, hbar: cfg.hbar, terms };
    run(&frame, Basis::Instantaneous, coeffs0, 0.0, path.period(), cfg)
}

/// Evolve rotated-basis coefficients `(c+, c-)`.
pub fn evolve_effective_c(path: &ParameterPath, coeffs0: Spinor, cfg: &EvolutionConfig) -> Result<EvolutionResult> {
    evolve_effective_c_with(path, coeffs0, cfg, RotatedTerms::Full)
}

pub fn evolve_effective_c_with(
    path: &ParameterPath,
    coeffs0: Spinor,
    cfg: &EvolutionConfig,
    terms: RotatedTerms,
) -> Result<EvolutionResult> {
    let frame = RotatedFrame { path, hbar: cfg.hbar, terms };
    run(&frame, Basis::Rotated, coeffs0, 0.0, path.period(), cfg)
}

/// Evolve a fixed-basis initial state in the requested representation.
pub fn evolve_in(path: &ParameterPath, basis: Basis, psi0: Spinor, cfg: &EvolutionConfig) -> Result<EvolutionResult> {
    match basis {
        Basis::Original => evolve_exact(path, psi0, cfg),
        Basis::Instantaneous => evolve_effective_b(path, to_instantaneous(path, 0.0, &psi0)?, cfg),
        Basis::Rotated => evolve_effective_c(path, to_rotated(path, 0.0, &psi0)?, cfg),
    }
}

/// Phases acquired by an eigenstate under the adiabatic approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticPhase {
    /// `dynamical + geometric`.
    pub total: f64,
    /// `-(1/ħ) ∫ E_level dt`.
    pub dynamical: f64,
    /// `∫ A_level,level dt`, unwrapped.
    pub geometric: f64,
}

/// Adiabatic phases of `level` around the closed path, by Simpson quadrature
/// with at least `T / max_step` (default 4096) nodes.
pub fn evolve_adiabatic(path: &ParameterPath, level: Level, cfg: &EvolutionConfig) -> Result<AdiabaticPhase> {
    path.require_closed()?;
    cfg.validate(path.period())?;
    let n = cfg
        .max_step
        .map_or(DEFAULT_QUADRATURE_NODES, |h| ((path.period() / h).ceil() as usize).max(DEFAULT_QUADRATURE_NODES));
    let sign = level.sign();
    let g = path.coupling_g();
    let energy = simpson_on_path(path, n, |t, seg| {
        let pr = frames::regular_rates(path, t, seg)?;
        Ok(path.scalar_shift(t) + sign * g * pr.r)
    })?;
    let geometric = simpson_on_path(path, n, |t, seg| {
        let pr = frames::regular_rates(path, t, seg)?;
        Ok(0.5 * (1.0 + sign * pr.theta.cos()) * pr.phi_dot)
    })?;
    let dynamical = -energy / cfg.hbar;
    Ok(AdiabaticPhase { total: dynamical + geometric, dynamical, geometric })
}
