use std::f64::consts::PI;

use levelcross::evolution::{Basis, EvolutionConfig, Integrator};
use levelcross::model::{wrap_phase, DEFAULT_R_MIN};
use levelcross::phases::DEFAULT_FIDELITY_FLOOR;
use levelcross::scenarios::config::{Grid, Scenario, ScenarioFile, SweepFile};
use levelcross::scenarios::{
    build_field_path, build_shrink_rotate_return_path, simulate, sweep_phase_map, write_sweep_csv, FieldSweepModel,
    ShrinkRotateReturn, SweepOptions, DEFAULT_SEGMENT_SPLIT,
};
use levelcross::Error;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    Grid::Log { log: levelcross::scenarios::config::RangeSpec { start: lo, stop: hi, count: n } }.values("B0").unwrap()
}

fn quiet() -> SweepOptions {
    SweepOptions { record_runtime: false, ..SweepOptions::default() }
}

#[test]
fn crossover_rises_from_trivial_to_topological() {
    let base = FieldSweepModel::circle(1.0, 1.0, 1.0);
    let cfg = EvolutionConfig::default();
    let b0 = log_grid(0.01, 100.0, 17);
    let recs = sweep_phase_map(&b0, &[1.0], &base, &cfg, &quiet()).unwrap();
    assert_eq!(recs.len(), 17);
    let mut last = 0.0;
    for r in &recs {
        let g = r.geometric_phase.unwrap();
        if r.drive_ratio <= 0.02 + 1e-12 {
            assert!(g.abs() < 0.05, "{r:?}");
        }
        if r.drive_ratio >= 50.0 - 1e-9 {
            assert!(wrap_phase(g - PI).abs() < 0.02 * PI, "{r:?}");
        }
        // the decomposition is only read where the state returns to its ray
        if !r.below_fidelity_floor.unwrap() {
            assert!(g.abs() >= last - 0.02, "{r:?} after {last}");
            last = g.abs();
        }
    }
    assert!(last > 3.0);
}

#[test]
fn halving_field_and_frequency_together_keeps_the_phase() {
    let base = FieldSweepModel::circle(1.0, 1.0, 1.0);
    let cfg = EvolutionConfig::default();
    for (b0, omega) in [(0.02, 1.0), (1.0, 1.0), (5.0, 0.5), (50.0, 1.0)] {
        let recs = sweep_phase_map(&[b0, 0.5 * b0], &[omega, 0.5 * omega], &base, &cfg, &quiet()).unwrap();
        // rows: (b0, ω), (b0, ω/2), (b0/2, ω), (b0/2, ω/2)
        let (a, b) = (recs[0].geometric_phase.unwrap(), recs[3].geometric_phase.unwrap());
        assert!(wrap_phase(a - b).abs() < 0.02, "{a} vs {b}");
        assert_eq!(recs[0].drive_ratio, recs[3].drive_ratio);
    }
}

#[test]
fn single_point_grid_equals_direct_simulation() {
    let base = FieldSweepModel { b0: f64::NAN, b1: 0.2, bz: 0.3, omega: f64::NAN, mu: 1.2, periods: 1 };
    let cfg = EvolutionConfig::default();
    let recs = sweep_phase_map(&[2.0], &[0.7], &base, &cfg, &quiet()).unwrap();
    assert_eq!(recs.len(), 1);
    let model = FieldSweepModel { b0: 2.0, omega: 0.7, ..base };
    let sim = simulate(&build_field_path(&model).unwrap(), Basis::Original, &cfg, DEFAULT_FIDELITY_FLOOR).unwrap();
    assert_eq!(recs[0].geometric_phase, Some(sim.decomposition.geometric_phase));
    assert_eq!(recs[0].transition_probability, Some(sim.transition_probability));
}

#[test]
fn scaling_the_field_moves_along_the_crossover() {
    let cfg = EvolutionConfig::default();
    let model = FieldSweepModel::circle(10.0, 1.0, 1.0);
    let path = build_field_path(&model).unwrap();
    let base = simulate(&path, Basis::Original, &cfg, DEFAULT_FIDELITY_FLOOR).unwrap();
    for eps in [0.5, 0.1, 0.01] {
        let scaled = simulate(&path.scaled(eps).unwrap(), Basis::Original, &cfg, DEFAULT_FIDELITY_FLOOR).unwrap();
        let direct_model = FieldSweepModel::circle(10.0 * eps, 1.0, 1.0);
        let direct =
            simulate(&build_field_path(&direct_model).unwrap(), Basis::Original, &cfg, DEFAULT_FIDELITY_FLOOR).unwrap();
        assert!(wrap_phase(scaled.decomposition.geometric_phase - direct.decomposition.geometric_phase).abs() < 1e-9);
        let ratio = scaled.decomposition.adiabaticity_ratio / base.decomposition.adiabaticity_ratio;
        assert!((ratio - eps).abs() < 1e-12);
    }
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let base = FieldSweepModel::circle(1.0, 1.0, 1.0);
    let cfg = EvolutionConfig::default();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let recs =
            pool.install(|| sweep_phase_map(&[0.1, 1.0, 10.0], &[0.5, 1.0, 2.0], &base, &cfg, &quiet())).unwrap();
        let mut out = Vec::new();
        write_sweep_csv(&recs, &mut out, None).unwrap();
        out
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn shrink_rotate_return_examples() {
    let spec = ShrinkRotateReturn {
        theta: PI / 2.0,
        phi: 0.0,
        r_start: 1.0,
        r_small: 1e-20,
        period: 1.0,
        g: 1.0,
        split: DEFAULT_SEGMENT_SPLIT,
    };
    assert!(matches!(build_shrink_rotate_return_path(&spec, DEFAULT_R_MIN), Err(Error::Degenerate { .. })));
    let bad_split = ShrinkRotateReturn { r_small: 0.1, split: [0.5, 0.0, 0.5], ..spec };
    assert!(matches!(build_shrink_rotate_return_path(&bad_split, DEFAULT_R_MIN), Err(Error::InvalidConfig(_))));
}

#[test]
fn scenario_file_round_trip() {
    let text = r#"{
        "hbar": 1.0,
        "scenario": {"kind": "field_sweep", "B0": 50.0, "omega": 1.0, "mu": 1.0},
        "evolution": {"integrator": "rk_adaptive", "rel_tol": 1e-9, "basis": "c"},
        "outputs": {"fidelity_floor": 0.9}
    }"#;
    let file = ScenarioFile::from_json(text).unwrap();
    assert_eq!(file.scenario.kind(), "field_sweep");
    assert_eq!(file.evolution.integrator, Integrator::RkAdaptive);
    assert_eq!(file.evolution.basis, Basis::Rotated);
    assert_eq!(file.outputs.fidelity_floor, 0.9);
    let cfg = file.evolution_config();
    assert_eq!(cfg.rel_tol, 1e-9);
    let sim = simulate(&file.build_path().unwrap(), file.evolution.basis, &cfg, 0.9).unwrap();
    assert!(wrap_phase(sim.decomposition.geometric_phase - PI).abs() < 0.02 * PI);
    let again = ScenarioFile::from_json(&serde_json::to_string(&file).unwrap()).unwrap();
    assert_eq!(again, file);
}

#[test]
fn every_scenario_kind_parses() {
    for scenario in [
        r#"{"kind": "no_crossing", "delta_E": 2.0, "g": 1.0, "B0": 100.0, "omega": 0.5}"#,
        r#"{"kind": "shrink_rotate_return", "theta": 1.0, "r_start": 1.0, "r_small": 0.1, "period": 4.0, "g": 1.0}"#,
        r#"{"kind": "custom", "period": 6.0, "g": 1.0, "center": [0, 0, 0.5], "cos": [[1, 0, 0]], "sin": [[0, 1, 0]]}"#,
    ] {
        let text = format!(r#"{{"hbar": 1.0, "scenario": {scenario}}}"#);
        let file = ScenarioFile::from_json(&text).unwrap();
        assert!(matches!(
            file.scenario,
            Scenario::NoCrossing(_) | Scenario::ShrinkRotateReturn(_) | Scenario::Custom(_)
        ));
        file.build_path().unwrap();
    }
}

fn config_error(text: &str) -> String {
    match ScenarioFile::from_json(text) {
        Err(Error::InvalidConfig(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn config_errors_name_the_key() {
    let missing = config_error(r#"{"hbar": 1.0, "scenario": {"kind": "field_sweep", "omega": 1.0, "mu": 1.0}}"#);
    assert!(missing.contains("B0"), "{missing}");
    let unknown = config_error(
        r#"{"hbar": 1.0, "scenario": {"kind": "field_sweep", "B0": 1.0, "omega": 1.0, "mu": 1.0}, "evolution": {"rel_tol": 1e-9, "tolerance": 3}}"#,
    );
    assert!(unknown.contains("evolution") && unknown.contains("tolerance"), "{unknown}");
    let wrong_type = config_error(r#"{"hbar": "one", "scenario": {"kind": "custom"}}"#);
    assert!(wrong_type.contains("hbar"), "{wrong_type}");
    let no_hbar = config_error(r#"{"scenario": {"kind": "field_sweep", "B0": 1.0, "omega": 1.0, "mu": 1.0}}"#);
    assert!(no_hbar.contains("hbar"), "{no_hbar}");
    let zero_omega =
        config_error(r#"{"hbar": 1.0, "scenario": {"kind": "field_sweep", "B0": 1.0, "omega": 0.0, "mu": 1.0}}"#);
    assert!(zero_omega.contains("omega"), "{zero_omega}");
    let kind = config_error(r#"{"hbar": 1.0, "scenario": {"kind": "spiral"}}"#);
    assert!(kind.contains("scenario"), "{kind}");
}

#[test]
fn sweep_file_grids() {
    let text = r#"{
        "hbar": 1.0,
        "base": {"mu": 1.0},
        "B0": {"log": {"start": 0.01, "stop": 100.0, "count": 5}},
        "omega": [1.0, 2.0]
    }"#;
    let file = SweepFile::from_json(text).unwrap();
    let (b0, omega) = file.grid().unwrap();
    let expected = [0.01, 0.1, 1.0, 10.0, 100.0];
    assert!(b0.iter().zip(expected).all(|(a, b)| ((a - b) / b).abs() < 1e-12));
    assert_eq!(omega, vec![1.0, 2.0]);
    let linear = r#"{"hbar": 1.0, "base": {"mu": 1.0}, "B0": {"linear": {"start": 1.0, "stop": 2.0, "count": 3}}, "omega": [1.0]}"#;
    assert_eq!(SweepFile::from_json(linear).unwrap().grid().unwrap().0, vec![1.0, 1.5, 2.0]);
    let empty = r#"{"hbar": 1.0, "base": {"mu": 1.0}, "B0": [], "omega": [1.0]}"#;
    assert!(matches!(SweepFile::from_json(empty), Err(Error::InvalidConfig(m)) if m.contains("B0")));
    let missing_mu = r#"{"hbar": 1.0, "base": {}, "B0": [1.0], "omega": [1.0]}"#;
    assert!(matches!(SweepFile::from_json(missing_mu), Err(Error::InvalidConfig(m)) if m.contains("mu")));
}
