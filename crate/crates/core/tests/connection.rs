mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use common::{path_of, random_loop, Harmonic, PolarLoop};
use levelcross::connection::{
    berry_loop_integral, connection_analytic, connection_numeric, connection_on_path, scaling_check,
    DEFAULT_QUADRATURE_NODES,
};
use levelcross::model::{from_polar, Curve, ParameterPath};
use levelcross::scenarios::{build_field_path, FieldSweepModel};
use levelcross::Vec3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Ellipse {
    a: f64,
    b: f64,
    z: f64,
    tilt: f64,
}

impl Curve for Ellipse {
    fn field(&self, t: f64) -> Vec3 {
        let (s, c) = (TAU * t).sin_cos();
        let (x, y) = (self.a * c, self.b * s);
        let (st, ct) = self.tilt.sin_cos();
        [x * ct + self.z * st, y, -x * st + self.z * ct]
    }
}

fn circle(theta: f64, r: f64) -> ParameterPath {
    let model = FieldSweepModel { b0: r * theta.sin(), b1: 0.0, bz: r * theta.cos(), omega: TAU, mu: 1.0, periods: 1 };
    build_field_path(&model).unwrap()
}

fn tilted_circle() -> ParameterPath {
    ParameterPath::new(Arc::new(Ellipse { a: 1.0, b: 1.0, z: 0.6, tilt: 0.4 }), 1.0, 1.0).unwrap()
}

#[test]
fn equator_circle_matches_analytic_within_dt_squared() {
    let path = build_field_path(&FieldSweepModel::circle(1.0, 3.0, 1.0)).unwrap();
    let exact = connection_analytic(FRAC_PI_2, 0.0, 3.0);
    for dt in [1e-3, 1e-4] {
        for t in [0.0, 0.3, 1.1, 2.0] {
            let n = connection_numeric(&path, t, dt).unwrap();
            assert!(n.max_abs_diff(&exact) < 10.0 * dt * dt * 27.0, "dt {dt} t {t}");
        }
    }
}

#[test]
fn halving_dt_quarters_the_error() {
    let path = tilted_circle();
    let t = 0.31;
    let reference = connection_on_path(&path, t);
    let err = |dt: f64| connection_numeric(&path, t, dt).unwrap().max_abs_diff(&reference);
    let (e1, e2, e3) = (err(4e-3), err(2e-3), err(1e-3));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }
}

#[test]
fn circle_loop_examples() {
    let li = berry_loop_integral(&circle(PI / 3.0, 1.0), DEFAULT_QUADRATURE_NODES).unwrap();
    assert!((li.gamma_minus - FRAC_PI_2).abs() < 1e-10);
    let li = berry_loop_integral(&circle(FRAC_PI_2, 2.0), DEFAULT_QUADRATURE_NODES).unwrap();
    assert!((li.gamma_minus - PI).abs() < 1e-10);
    assert!((li.solid_angle - TAU).abs() < 1e-6);
    let mut previous = f64::INFINITY;
    for theta in [0.3, 0.1, 0.01, 0.001] {
        let g = berry_loop_integral(&circle(theta, 1.0), DEFAULT_QUADRATURE_NODES).unwrap().gamma_minus;
        assert!(g > 0.0 && g < previous);
        previous = g;
    }
    assert!(previous < 1e-5);
}

#[test]
fn upper_and_lower_phases_add_to_full_turns() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for winding in [-2.0, -1.0, 0.0, 1.0, 3.0] {
        for _ in 0..5 {
            let path = path_of(random_loop(&mut rng, 2.0, (0.2, PI - 0.2), (0.5, 2.0), winding), 1.0);
            let li = berry_loop_integral(&path, DEFAULT_QUADRATURE_NODES).unwrap();
            assert_eq!(li.winding as f64, winding);
            assert!((li.gamma_plus + li.gamma_minus - TAU * winding).abs() < 1e-9);
            // the lower-level phase is half the solid angle seen from the north pole
            assert!((li.solid_angle - 2.0 * li.gamma_minus).abs() < 1e-6, "{li:?}");
        }
    }
}

#[test]
fn reparametrization_leaves_loop_integrals_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let path = path_of(random_loop(&mut rng, 3.0, (0.2, PI - 0.2), (0.5, 2.0), 1.0), 1.0);
        let period = path.period();
        let warped = path.reparametrized(move |t| (period * (t / period).powi(2), 2.0 * t / period));
        let a = berry_loop_integral(&path, DEFAULT_QUADRATURE_NODES).unwrap();
        let b = berry_loop_integral(&warped, DEFAULT_QUADRATURE_NODES).unwrap();
        assert!((a.gamma_minus - b.gamma_minus).abs() < 1e-8);
        assert!((a.gamma_plus - b.gamma_plus).abs() < 1e-8);
    }
}

#[test]
fn scaling_examples() {
    let (before, after) = scaling_check(&circle(FRAC_PI_2, 1.0), 1e-3).unwrap();
    assert!((before - PI).abs() < 1e-9 && (after - PI).abs() < 1e-9);
    let ellipse = ParameterPath::new(Arc::new(Ellipse { a: 2.0, b: 0.7, z: 0.5, tilt: 0.3 }), 1.0, 1.0).unwrap();
    let reference = berry_loop_integral(&ellipse, 10 * DEFAULT_QUADRATURE_NODES).unwrap().gamma_minus;
    let (before, after) = scaling_check(&ellipse, 0.1).unwrap();
    assert!((before - after).abs() < 1e-9);
    assert!((before - reference).abs() < 1e-9);
}

#[test]
fn offset_circle_does_not_enclose_the_crossing() {
    let model = FieldSweepModel { b0: 1.0, b1: 2.0, bz: 0.0, omega: 1.0, mu: 1.0, periods: 1 };
    let li = berry_loop_integral(&build_field_path(&model).unwrap(), DEFAULT_QUADRATURE_NODES).unwrap();
    assert_eq!(li.winding, 0);
    assert!(li.gamma_minus.abs() < 1e-10);
}

#[test]
fn wobbling_latitude_keeps_half_solid_angle() {
    // θ wobbles, r pulses; the solid angle fan and the line integral agree
    let curve = PolarLoop {
        period: 1.0,
        r0: 1.0,
        theta0: 1.2,
        winding: 1.0,
        phi0: 0.0,
        r_terms: vec![Harmonic { k: 2.0, a: 0.3, b: 0.0 }],
        theta_terms: vec![Harmonic { k: 3.0, a: 0.0, b: 0.4 }],
        phi_terms: vec![],
    };
    let path = path_of(curve, 1.0);
    let li = berry_loop_integral(&path, DEFAULT_QUADRATURE_NODES).unwrap();
    // ∮ (1 - cos θ)/2 dφ with θ = θ0 + 0.4 sin 6πt, φ̇ = 2π
    assert!((li.gamma_minus - PI * (1.0 - 1.2f64.cos() * bessel_j0(0.4))).abs() < 1e-9);
}

/// `J0(x)` by its power series, enough terms for `|x| < 1`.
fn bessel_j0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        term *= -(x * x / 4.0) / (k * k) as f64;
        sum += term;
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn numeric_connection_tracks_analytic(seed in any::<u64>(), t_frac in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = path_of(random_loop(&mut rng, 1.0, (0.1, PI - 0.1), (0.3, 3.0), 1.0), 1.0);
        let n = connection_numeric(&path, t_frac, 1e-5).unwrap();
        let a = connection_on_path(&path, t_frac);
        prop_assert!(n.max_abs_diff(&a) < 1e-6);
        prop_assert!(a.hermiticity_defect() == 0.0);
    }

    #[test]
    fn polar_loop_field_matches_angles(seed in any::<u64>(), t in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let curve = random_loop(&mut rng, 2.0, (0.1, PI - 0.1), (0.3, 3.0), 1.0);
        let ([r, th, ph], _) = curve.angles(t);
        let y = curve.field(t);
        let back = from_polar(r, th, ph);
        prop_assert!((0..3).all(|i| (y[i] - back[i]).abs() < 1e-14));
    }
}
