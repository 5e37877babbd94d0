//! JSON scenario and sweep files.
//!
//! Errors name the offending key path, e.g. `scenario.B0: missing field`.
//! The published schemas live in `docs/`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::models::{
    build_field_path, build_fourier_path, build_no_crossing_path, build_shrink_rotate_return_path, FieldSweepModel,
    FourierLoop, NoCrossingModel, ShrinkRotateReturn,
};
use crate::error::{Error, Result};
use crate::evolution::{Basis, EvolutionConfig, Integrator};
use crate::model::{ParameterPath, DEFAULT_R_MIN};
use crate::phases::DEFAULT_FIDELITY_FLOOR;

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::InvalidConfig(inner.to_string())
        } else {
            Error::InvalidConfig(format!("{path}: {inner}"))
        }
    })
}

fn keyed(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidConfig(m) => Error::InvalidConfig(format!("{prefix}: {m}")),
        other => other,
    }
}

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_abs_tol() -> f64 {
    1e-12
}

fn default_r_min() -> f64 {
    DEFAULT_R_MIN
}

fn default_floor() -> f64 {
    DEFAULT_FIDELITY_FLOOR
}

/// The `evolution` block shared by scenario and sweep files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default)]
    pub basis: Basis,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            integrator: Integrator::default(),
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_step: None,
            basis: Basis::default(),
            r_min: default_r_min(),
        }
    }
}

impl EvolutionSection {
    pub fn config(&self, hbar: f64) -> EvolutionConfig {
        EvolutionConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            integrator: self.integrator,
            hbar,
            record_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    FieldSweep(FieldSweepModel),
    NoCrossing(NoCrossingModel),
    ShrinkRotateReturn(ShrinkRotateReturn),
    Custom(FourierLoop),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::FieldSweep(_) => "field_sweep",
            Scenario::NoCrossing(_) => "no_crossing",
            Scenario::ShrinkRotateReturn(_) => "shrink_rotate_return",
            Scenario::Custom(_) => "custom",
        }
    }

    pub fn build_path(&self, r_min: f64) -> Result<ParameterPath> {
        let path = match self {
            Scenario::FieldSweep(m) => build_field_path(m),
            Scenario::NoCrossing(m) => build_no_crossing_path(m),
            Scenario::ShrinkRotateReturn(s) => build_shrink_rotate_return_path(s, r_min),
            Scenario::Custom(f) => build_fourier_path(f),
        };
        Ok(path.map_err(|e| keyed("scenario", e))?.with_r_min(r_min))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_floor")]
    pub fidelity_floor: f64,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { fidelity_floor: default_floor() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub hbar: f64,
    pub scenario: Scenario,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub outputs: Outputs,
}

fn check_common(hbar: f64, evo: &EvolutionSection, floor: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidConfig(format!("hbar: must be positive, got {hbar}")));
    }
    if !(evo.rel_tol > 0.0) {
        return Err(Error::InvalidConfig(format!("evolution.rel_tol: must be positive, got {}", evo.rel_tol)));
    }
    if !(evo.abs_tol > 0.0) {
        return Err(Error::InvalidConfig(format!("evolution.abs_tol: must be positive, got {}", evo.abs_tol)));
    }
    if let Some(h) = evo.max_step {
        if !(h > 0.0) {
            return Err(Error::InvalidConfig(format!("evolution.max_step: must be positive, got {h}")));
        }
    }
    if !(evo.r_min > 0.0) {
        return Err(Error::InvalidConfig(format!("evolution.r_min: must be positive, got {}", evo.r_min)));
    }
    if !(0.0..=1.0).contains(&floor) {
        return Err(Error::InvalidConfig(format!("fidelity_floor: must lie in [0, 1], got {floor}")));
    }
    Ok(())
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = parse(text)?;
        check_common(file.hbar, &file.evolution, file.outputs.fidelity_floor)?;
        if let Scenario::FieldSweep(m) = &file.scenario {
            m.validate().map_err(|e| keyed("scenario", e))?;
        }
        Ok(file)
    }

    pub fn build_path(&self) -> Result<ParameterPath> {
        self.scenario.build_path(self.evolution.r_min)
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        self.evolution.config(self.hbar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Grid axis: an explicit list, or evenly spaced in value or in log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Log { log: RangeSpec },
    Linear { linear: RangeSpec },
}

impl Grid {
    pub fn values(&self, key: &str) -> Result<Vec<f64>> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("{key}: {m}")));
        let out: Vec<f64> = match self {
            Grid::Values(v) => v.clone(),
            Grid::Log { log: r } => {
                if !(r.start > 0.0 && r.stop > 0.0) {
                    return bad("log spacing needs positive start and stop".into());
                }
                spaced(r.start.ln(), r.stop.ln(), r.count).into_iter().map(f64::exp).collect()
            }
            Grid::Linear { linear: r } => spaced(r.start, r.stop, r.count),
        };
        if out.is_empty() {
            return bad("grid is empty".into());
        }
        if out.iter().any(|x| !x.is_finite()) {
            return bad("grid values must be finite".into());
        }
        Ok(out)
    }
}

fn spaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        n => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBase {
    #[serde(default)]
    pub b1: f64,
    #[serde(rename = "Bz", default)]
    pub bz: f64,
    pub mu: f64,
    #[serde(default = "one")]
    pub periods: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub hbar: f64,
    pub base: SweepBase,
    #[serde(rename = "B0")]
    pub b0: Grid,
    pub omega: Grid,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default = "default_floor")]
    pub fidelity_floor: f64,
}

impl SweepFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SweepFile = parse(text)?;
        check_common(file.hbar, &file.evolution, file.fidelity_floor)?;
        file.b0.values("B0")?;
        file.omega.values("omega")?;
        if !(file.base.mu > 0.0 && file.base.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("base.mu: must be positive, got {}", file.base.mu)));
        }
        Ok(file)
    }

    /// Template model; `B0` and `omega` are filled per grid point.
    pub fn base_model(&self) -> FieldSweepModel {
        FieldSweepModel {
            b0: f64::NAN,
            b1: self.base.b1,
            bz: self.base.bz,
            omega: f64::NAN,
            mu: self.base.mu,
            periods: self.base.periods,
        }
    }

    pub fn grid(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.b0.values("B0")?, self.omega.values("omega")?))
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        self.evolution.config(self.hbar)
    }
}
