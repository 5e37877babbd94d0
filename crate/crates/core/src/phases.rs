//! Finite-T phase decomposition of a completed run.
//!
//! For a run over a closed path the total phase `arg⟨ψ(0)|ψ(T)⟩` is split as
//! `total = -dynamical + geometric (mod 2π)` with
//! `dynamical = (1/ħ) ∫⟨ψ|h|ψ⟩ dt`. The split is only meaningful when the
//! state returns close to its starting ray, so the cyclicity fidelity
//! `|⟨ψ(0)|ψ(T)⟩|` is reported with it.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::EvolutionResult;
use crate::linalg::Spinor;
use crate::model::{wrap_phase, Level, ParameterPath};

pub const DEFAULT_FIDELITY_FLOOR: f64 = 0.98;

/// Branch used for every reported phase.
pub const PHASE_BRANCH: &str = "(-pi, pi]";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseDecomposition {
    /// `arg⟨ψ(0)|ψ(T)⟩` in (-π, π].
    pub total_phase: f64,
    /// `(1/ħ) ∫⟨ψ|h|ψ⟩ dt`, unwrapped.
    pub dynamical_phase: f64,
    /// `total + dynamical` wrapped into (-π, π].
    pub geometric_phase: f64,
    pub cyclicity_fidelity: f64,
    /// `T g min|y| / (ħ π)`.
    pub adiabaticity_ratio: f64,
    pub fidelity_floor: f64,
    /// Fidelity below the floor: the geometric phase is not trustworthy.
    pub below_fidelity_floor: bool,
}

impl PhaseDecomposition {
    /// Residual of `geometric ≡ total + dynamical (mod 2π)`.
    pub fn consistency_residual(&self) -> f64 {
        wrap_phase(self.geometric_phase - self.total_phase - self.dynamical_phase).abs()
    }
}

pub fn decompose_phase(result: &EvolutionResult, psi0: &Spinor) -> Result<PhaseDecomposition> {
    decompose_phase_with_floor(result, psi0, DEFAULT_FIDELITY_FLOOR)
}

pub fn decompose_phase_with_floor(
    result: &EvolutionResult,
    psi0: &Spinor,
    fidelity_floor: f64,
) -> Result<PhaseDecomposition> {
    if !result.path_closed {
        return Err(Error::OpenPath { mismatch: f64::NAN });
    }
    let overlap = psi0.inner(&result.final_state);
    let total_phase = overlap.arg();
    let cyclicity_fidelity = overlap.norm().min(1.0);
    Ok(PhaseDecomposition {
        total_phase,
        dynamical_phase: result.dynamical_integral,
        geometric_phase: wrap_phase(total_phase + result.dynamical_integral),
        cyclicity_fidelity,
        adiabaticity_ratio: result.adiabaticity_ratio,
        fidelity_floor,
        below_fidelity_floor: cyclicity_fidelity < fidelity_floor,
    })
}

/// `⟨v_level(y(T))|ψ(T)⟩` at the end time of the run.
pub fn projected_amplitude(result: &EvolutionResult, path: &ParameterPath, level: Level) -> Result<C64> {
    let t = result.t_end;
    let es = path.eigensystem_at(t).map_err(|e| match e {
        Error::Degenerate { r, r_min } => {
            Error::Singular { t, reason: format!("degenerate levels at the endpoint: |y| = {r:e} <= {r_min:e}") }
        }
        other => other,
    })?;
    Ok(es.vector(level).inner(&result.final_state))
}

/// Weight of the upper level at the end of a run started in the lower one.
pub fn transition_probability(result: &EvolutionResult, path: &ParameterPath) -> Result<f64> {
    Ok(projected_amplitude(result, path, Level::Plus)?.norm_sqr().min(1.0))
}
