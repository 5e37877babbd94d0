//! `(B0, ω)` grid scans of the rotating-field model.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::models::{build_field_path, FieldSweepModel};
use super::simulate;
use crate::error::{Error, Result};
use crate::evolution::{Basis, EvolutionConfig};

pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub fidelity_floor: f64,
    /// Fill `runtime_ms`; leave it off for byte-reproducible output.
    pub record_runtime: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { fidelity_floor: crate::phases::DEFAULT_FIDELITY_FLOOR, record_runtime: true }
    }
}

/// One grid point. Numerical columns are empty when the point failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub index: usize,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub omega: f64,
    /// `μ B0 / (ħ ω)`.
    pub drive_ratio: f64,
    pub adiabaticity_ratio: Option<f64>,
    pub geometric_phase: Option<f64>,
    pub cyclicity_fidelity: Option<f64>,
    pub transition_probability: Option<f64>,
    pub below_fidelity_floor: Option<bool>,
    pub runtime_ms: Option<f64>,
    pub status: String,
}

/// Evaluate every `(B0, ω)` pair, B0 outer and ω inner. Failed points are
/// recorded in their row; the sweep never aborts. Points run in parallel on
/// the current rayon pool and come back in grid order.
pub fn sweep_phase_map(
    b0_values: &[f64],
    omega_values: &[f64],
    base: &FieldSweepModel,
    cfg: &EvolutionConfig,
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    if b0_values.is_empty() || omega_values.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    let points: Vec<(usize, f64, f64)> = b0_values
        .iter()
        .flat_map(|&b| omega_values.iter().map(move |&w| (b, w)))
        .enumerate()
        .map(|(i, (b, w))| (i, b, w))
        .collect();
    let records: Vec<SweepRecord> = points
        .par_iter()
        .map(|&(index, b0, omega)| {
            let model = FieldSweepModel { b0, omega, ..*base };
            let started = Instant::now();
            let outcome =
                build_field_path(&model).and_then(|path| simulate(&path, Basis::Original, cfg, opts.fidelity_floor));
            let runtime_ms = opts.record_runtime.then(|| started.elapsed().as_secs_f64() * 1e3);
            let drive_ratio = model.drive_ratio(cfg.hbar);
            match outcome {
                Ok(sim) => SweepRecord {
                    index,
                    b0,
                    omega,
                    drive_ratio,
                    adiabaticity_ratio: Some(sim.decomposition.adiabaticity_ratio),
                    geometric_phase: Some(sim.decomposition.geometric_phase),
                    cyclicity_fidelity: Some(sim.decomposition.cyclicity_fidelity),
                    transition_probability: Some(sim.transition_probability),
                    below_fidelity_floor: Some(sim.decomposition.below_fidelity_floor),
                    runtime_ms,
                    status: "ok".into(),
                },
                Err(e) => SweepRecord {
                    index,
                    b0,
                    omega,
                    drive_ratio,
                    adiabaticity_ratio: None,
                    geometric_phase: None,
                    cyclicity_fidelity: None,
                    transition_probability: None,
                    below_fidelity_floor: None,
                    runtime_ms,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect();
    let expected = b0_values.len() * omega_values.len();
    if records.len() != expected || records.iter().enumerate().any(|(i, r)| r.index != i) {
        return Err(Error::InvalidState(format!("incomplete sweep: {} of {expected} records", records.len())));
    }
    Ok(records)
}

/// Write the sweep as CSV: `# schema=1`, an optional `# timestamp=` line,
/// then a header row and one row per grid point.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W, timestamp: Option<&str>) -> std::io::Result<()> {
    writeln!(out, "# schema={CSV_SCHEMA_VERSION}")?;
    if let Some(ts) = timestamp {
        writeln!(out, "# timestamp={ts}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_points_are_recorded_not_fatal() {
        let base = FieldSweepModel::circle(1.0, 1.0, 1.0);
        let cfg = EvolutionConfig::default();
        let recs = sweep_phase_map(&[1.0, -1.0], &[1.0], &base, &cfg, &SweepOptions::default()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].status, "ok");
        assert!(recs[1].status.starts_with("error"));
        assert!(recs[1].geometric_phase.is_none());
    }

    #[test]
    fn csv_layout() {
        let base = FieldSweepModel::circle(1.0, 1.0, 1.0);
        let cfg = EvolutionConfig::default();
        let opts = SweepOptions { record_runtime: false, ..Default::default() };
        let recs = sweep_phase_map(&[0.5, 1.0, 2.0], &[1.0, 2.0, 4.0], &base, &cfg, &opts).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&recs, &mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema=1");
        assert!(lines[1].starts_with("index,B0,omega,drive_ratio,adiabaticity_ratio,geometric_phase"));
        assert_eq!(lines.len(), 2 + 9);
    }

    #[test]
    fn empty_grid_rejected() {
        let base = FieldSweepModel::circle(1.0, 1.0, 1.0);
        let r = sweep_phase_map(&[], &[1.0], &base, &EvolutionConfig::default(), &SweepOptions::default());
        assert!(r.is_err());
    }
}
