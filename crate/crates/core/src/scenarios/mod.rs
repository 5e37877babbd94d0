//! Drive models, single-run scenarios, parameter sweeps and their file
//! formats.

pub mod config;
pub mod models;
pub mod output;
pub mod sweep;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::evolution::{evolve_adiabatic, evolve_in, Basis, EvolutionConfig, EvolutionResult};
use crate::linalg::Spinor;
use crate::model::{Level, ParameterPath, DEFAULT_R_MIN};
use crate::phases::{
    decompose_phase_with_floor, projected_amplitude, transition_probability, PhaseDecomposition, DEFAULT_FIDELITY_FLOOR,
};

pub use models::{
    build_field_path, build_fourier_path, build_no_crossing_path, build_shrink_rotate_return_path, FieldSweepModel,
    FourierLoop, NoCrossingModel, ShrinkRotateReturn, DEFAULT_SEGMENT_SPLIT,
};
pub use output::{write_connection_csv, write_trajectory_csv};
pub use sweep::{sweep_phase_map, write_sweep_csv, SweepOptions, SweepRecord, CSV_SCHEMA_VERSION};

/// Scenario runs start in the lower instantaneous eigenstate.
pub fn initial_state(path: &ParameterPath) -> Result<Spinor> {
    Ok(path.eigensystem_at(0.0)?.v_minus)
}

/// One evolved run with its phase analysis.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub psi0: Spinor,
    pub result: EvolutionResult,
    pub decomposition: PhaseDecomposition,
    pub transition_probability: f64,
    /// `⟨v-(y(T))|ψ(T)⟩`.
    pub lower_amplitude: C64,
    /// Adiabatic lower-level geometric phase `∮ A-- dt`, when the eigenframe
    /// is regular along the loop.
    pub adiabatic_geometric_phase: Option<f64>,
}

pub fn simulate(path: &ParameterPath, basis: Basis, cfg: &EvolutionConfig, fidelity_floor: f64) -> Result<Simulation> {
    let psi0 = initial_state(path)?;
    let result = evolve_in(path, basis, psi0, cfg)?;
    let decomposition = decompose_phase_with_floor(&result, &psi0, fidelity_floor)?;
    let transition_probability = transition_probability(&result, path)?;
    let lower_amplitude = projected_amplitude(&result, path, Level::Minus)?;
    let adiabatic_geometric_phase = evolve_adiabatic(path, Level::Minus, cfg).ok().map(|p| p.geometric);
    Ok(Simulation { psi0, result, decomposition, transition_probability, lower_amplitude, adiabatic_geometric_phase })
}

/// Run the shrink, rotate, return cycle in the fixed basis and decompose the
/// phase of the lower-level start state.
pub fn scenario_shrink_rotate_return(spec: &ShrinkRotateReturn, cfg: &EvolutionConfig) -> Result<PhaseDecomposition> {
    let path = build_shrink_rotate_return_path(spec, DEFAULT_R_MIN)?;
    Ok(simulate(&path, Basis::Original, cfg, DEFAULT_FIDELITY_FLOOR)?.decomposition)
}

/// Flat JSON view of a [`Simulation`].
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub kind: String,
    pub basis: Basis,
    pub integrator: crate::evolution::Integrator,
    pub hbar: f64,
    pub period: f64,
    #[serde(flatten)]
    pub decomposition: PhaseDecomposition,
    pub phase_branch: &'static str,
    pub transition_probability: f64,
    pub lower_amplitude_re: f64,
    pub lower_amplitude_im: f64,
    pub adiabatic_geometric_phase: Option<f64>,
    pub steps: usize,
    pub norm_drift: f64,
}

impl SimulationReport {
    pub fn new(kind: &str, sim: &Simulation, cfg: &EvolutionConfig) -> Self {
        Self {
            kind: kind.to_string(),
            basis: sim.result.basis,
            integrator: cfg.integrator,
            hbar: cfg.hbar,
            period: sim.result.period,
            decomposition: sim.decomposition,
            phase_branch: crate::phases::PHASE_BRANCH,
            transition_probability: sim.transition_probability,
            lower_amplitude_re: sim.lower_amplitude.re,
            lower_amplitude_im: sim.lower_amplitude.im,
            adiabatic_geometric_phase: sim.adiabatic_geometric_phase,
            steps: sim.result.steps,
            norm_drift: sim.result.norm_drift,
        }
    }
}
