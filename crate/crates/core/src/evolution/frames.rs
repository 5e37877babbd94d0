//! Generators of the two-component equation `iħ ẋ = K(t) x` in the three
//! representations, and the maps from each back to the fixed basis.

use num_complex::Complex64 as C64;

use crate::connection::connection_analytic;
use crate::error::{Error, Result};
use crate::linalg::{Herm2, Mat2, Spinor};
use crate::model::{eigenvectors, ParameterPath, PolarRates};

/// Which connection terms the instantaneous-basis generator keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InstantaneousTerms {
    /// Diagonal energies plus the full connection, off-diagonals included.
    #[default]
    Full,
    /// Adiabatic approximation: drop `A+-` and `A-+`.
    DiagonalOnly,
}

/// Which terms the rotated-basis generator keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotatedTerms {
    #[default]
    Full,
    /// Drop the `-g r sin θ` mixing, keep `± g r cos θ` and `-ħ φ̇`.
    DropMixing,
    /// Drop every `g r` term; only the scalar shift and `-ħ φ̇` remain.
    DropCoupling,
}

/// A representation: generator, energy operator and the map back to the
/// fixed basis, all at time `t`.
pub(crate) trait Frame: Sync {
    fn path(&self) -> &ParameterPath;

    /// `(K, h)` where `iħ ẋ = K x` and `h` is the physical Hamiltonian
    /// expressed in this frame.
    /// `segment` is the smooth piece of the path being integrated.
    fn operators(&self, t: f64, segment: (f64, f64)) -> Result<(Herm2, Herm2)>;

    fn to_fixed(&self, t: f64, x: &Spinor) -> Result<Spinor>;
}

pub(crate) struct FixedFrame<'a> {
    pub path: &'a ParameterPath,
}

impl Frame for FixedFrame<'_> {
    fn path(&self) -> &ParameterPath {
        self.path
    }

    fn operators(&self, t: f64, _segment: (f64, f64)) -> Result<(Herm2, Herm2)> {
        let h = self.path.hamiltonian_unchecked(t).operator();
        Ok((h, h))
    }

    fn to_fixed(&self, _t: f64, x: &Spinor) -> Result<Spinor> {
        Ok(*x)
    }
}

/// Polar data at `t`, rejecting the crossing point and the poles.
pub(crate) fn regular_rates(path: &ParameterPath, t: f64, segment: (f64, f64)) -> Result<PolarRates> {
    let pr = path.polar_rates_on(t, segment);
    if !(pr.r > path.r_min()) {
        return Err(Error::Singular {
            t,
            reason: format!("level crossing: |y| = {:e} <= r_min = {:e}", pr.r, path.r_min()),
        });
    }
    if pr.theta.sin() <= 1e-12 {
        return Err(Error::Singular { t, reason: format!("field direction at a pole (θ = {})", pr.theta) });
    }
    Ok(pr)
}

/// Instantaneous-eigenbasis generator
/// `diag(E+, E-) - ħ A` with `A` the φ-gauge connection.
pub fn instantaneous_generator(path: &ParameterPath, t: f64, hbar: f64, terms: InstantaneousTerms) -> Result<Herm2> {
    let pr = regular_rates(path, t, path.segment_at(t))?;
    Ok(instantaneous_parts(path, t, &pr, hbar, terms).0)
}

fn instantaneous_parts(
    path: &ParameterPath,
    t: f64,
    pr: &PolarRates,
    hbar: f64,
    terms: InstantaneousTerms,
) -> (Herm2, Herm2) {
    let s = path.scalar_shift(t);
    let gr = path.coupling_g() * pr.r;
    let a = connection_analytic(pr.theta, pr.theta_dot, pr.phi_dot);
    let off = match terms {
        InstantaneousTerms::Full => a.entries[0][1] * (-hbar),
        InstantaneousTerms::DiagonalOnly => C64::new(0.0, 0.0),
    };
    let k = Herm2::from_entries(s + gr - hbar * a.entries[0][0].re, s - gr - hbar * a.entries[1][1].re, off);
    let energy = Herm2::from_entries(s + gr, s - gr, C64::new(0.0, 0.0));
    (k, energy)
}

pub(crate) struct InstantaneousFrame<'a> {
    pub path: &'a ParameterPath,
    pub hbar: f64,
    pub terms: InstantaneousTerms,
}

impl Frame for InstantaneousFrame<'_> {
    fn path(&self) -> &ParameterPath {
        self.path
    }

    fn operators(&self, t: f64, segment: (f64, f64)) -> Result<(Herm2, Herm2)> {
        let pr = regular_rates(self.path, t, segment)?;
        Ok(instantaneous_parts(self.path, t, &pr, self.hbar, self.terms))
    }

    fn to_fixed(&self, t: f64, x: &Spinor) -> Result<Spinor> {
        let pr = regular_rates(self.path, t, self.path.segment_at(t))?;
        Ok(instantaneous_frame_matrix(pr.theta, pr.phi).apply(x))
    }
}

/// Columns `(v+, v-)` of the φ-gauge eigenframe.
pub fn instantaneous_frame_matrix(theta: f64, phi: f64) -> Mat2 {
    let (vp, vm) = eigenvectors(theta, phi);
    Mat2::from_columns(&vp, &vm)
}

/// Real rotation mixing the eigenbasis into the rotated basis:
/// `b = U(θ) c`.
pub fn theta_rotation(theta: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    Mat2([[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]])
}

/// `dU/dt = θ̇ dU/dθ`.
fn theta_rotation_rate(theta: f64, theta_dot: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    let k = 0.5 * theta_dot;
    Mat2([[C64::new(-k * s, 0.0), C64::new(-k * c, 0.0)], [C64::new(k * c, 0.0), C64::new(-k * s, 0.0)]])
}

/// Rotated-basis generator in closed form:
///
/// ```text
/// [ s + g r cos θ - ħ φ̇     -g r sin θ     ]
/// [ -g r sin θ              s - g r cos θ  ]
/// ```
pub fn rotated_generator(path: &ParameterPath, t: f64, hbar: f64, terms: RotatedTerms) -> Result<Herm2> {
    let pr = regular_rates(path, t, path.segment_at(t))?;
    Ok(rotated_parts(path, t, &pr, hbar, terms).0)
}

fn rotated_parts(path: &ParameterPath, t: f64, pr: &PolarRates, hbar: f64, terms: RotatedTerms) -> (Herm2, Herm2) {
    let s = path.scalar_shift(t);
    let gr = path.coupling_g() * pr.r;
    let (st, ct) = pr.theta.sin_cos();
    let energy = Herm2::from_entries(s + gr * ct, s - gr * ct, C64::new(-gr * st, 0.0));
    let k = match terms {
        RotatedTerms::Full => {
            Herm2::from_entries(s + gr * ct - hbar * pr.phi_dot, s - gr * ct, C64::new(-gr * st, 0.0))
        }
        RotatedTerms::DropMixing => {
            Herm2::from_entries(s + gr * ct - hbar * pr.phi_dot, s - gr * ct, C64::new(0.0, 0.0))
        }
        RotatedTerms::DropCoupling => Herm2::from_entries(s - hbar * pr.phi_dot, s, C64::new(0.0, 0.0)),
    };
    (k, energy)
}

/// The rotated-basis generator obtained the long way,
/// `U† H_b U - iħ U† dU/dt`, from the full instantaneous generator.
pub fn rotated_generator_by_transform(path: &ParameterPath, t: f64, hbar: f64) -> Result<Mat2> {
    let pr = regular_rates(path, t, path.segment_at(t))?;
    let hb = instantaneous_parts(path, t, &pr, hbar, InstantaneousTerms::Full).0.to_matrix();
    let u = theta_rotation(pr.theta);
    let du = theta_rotation_rate(pr.theta, pr.theta_dot);
    let ud = u.adjoint();
    Ok(ud * hb * u - (ud * du).scale(C64::new(0.0, hbar)))
}

/// Physical Hamiltonian in the rotated basis (no geometric term).
pub fn rotated_energy(path: &ParameterPath, t: f64) -> Result<Herm2> {
    let pr = regular_rates(path, t, path.segment_at(t))?;
    Ok(rotated_parts(path, t, &pr, 1.0, RotatedTerms::Full).1)
}

pub(crate) struct RotatedFrame<'a> {
    pub path: &'a ParameterPath,
    pub hbar: f64,
    pub terms: RotatedTerms,
}

impl Frame for RotatedFrame<'_> {
    fn path(&self) -> &ParameterPath {
        self.path
    }

    fn operators(&self, t: f64, segment: (f64, f64)) -> Result<(Herm2, Herm2)> {
        let pr = regular_rates(self.path, t, segment)?;
        Ok(rotated_parts(self.path, t, &pr, self.hbar, self.terms))
    }

    fn to_fixed(&self, t: f64, x: &Spinor) -> Result<Spinor> {
        let pr = regular_rates(self.path, t, self.path.segment_at(t))?;
        let b = theta_rotation(pr.theta).apply(x);
        Ok(instantaneous_frame_matrix(pr.theta, pr.phi).apply(&b))
    }
}

/// Fixed-basis state to instantaneous-basis coefficients at `t`.
pub fn to_instantaneous(path: &ParameterPath, t: f64, psi: &Spinor) -> Result<Spinor> {
    let pr = regular_rates(path, t, path.segment_at(t))?;
    Ok(instantaneous_frame_matrix(pr.theta, pr.phi).adjoint().apply(psi))
}

/// Fixed-basis state to rotated-basis coefficients at `t`.
pub fn to_rotated(path: &ParameterPath, t: f64, psi: &Spinor) -> Result<Spinor> {
    let pr = regular_rates(path, t, path.segment_at(t))?;
    let b = instantaneous_frame_matrix(pr.theta, pr.phi).adjoint().apply(psi);
    Ok(theta_rotation(pr.theta).adjoint().apply(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;
    use crate::model::Curve;
    use proptest::prelude::*;
    use std::sync::Arc;

    /// Field with prescribed polar angles at t = 0 and prescribed rates.
    struct Linearized {
        r: f64,
        theta: f64,
        phi: f64,
        rates: (f64, f64, f64),
    }

    impl Curve for Linearized {
        fn field(&self, t: f64) -> Vec3 {
            let (dr, dth, dph) = self.rates;
            crate::model::from_polar(self.r + dr * t, self.theta + dth * t, self.phi + dph * t)
        }
        fn field_rate(&self, t: f64) -> Option<Vec3> {
            let (dr, dth, dph) = self.rates;
            let (r, th, ph) = (self.r + dr * t, self.theta + dth * t, self.phi + dph * t);
            let (st, ct) = th.sin_cos();
            let (sp, cp) = ph.sin_cos();
            Some([
                dr * st * cp + r * ct * cp * dth - r * st * sp * dph,
                dr * st * sp + r * ct * sp * dth + r * st * cp * dph,
                dr * ct - r * st * dth,
            ])
        }
    }

    fn path(c: Linearized) -> ParameterPath {
        ParameterPath::new(Arc::new(c), 1.0, 0.7).unwrap().with_energy_offset(0.25)
    }

    #[test]
    fn combined_frame_is_diagonal_phase() {
        // V(θ, φ) U(θ) = diag(e^{-iφ}, -1) for every θ
        let m = instantaneous_frame_matrix(1.234, 0.77) * theta_rotation(1.234);
        let expect =
            Mat2([[C64::from_polar(1.0, -0.77), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]]);
        assert!(m.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn pole_is_singular_for_effective_frames() {
        let p = path(Linearized { r: 1.0, theta: 0.0, phi: 0.0, rates: (0.0, 0.0, 1.0) });
        assert!(matches!(instantaneous_generator(&p, 0.0, 1.0, Default::default()), Err(Error::Singular { .. })));
        assert!(matches!(rotated_generator(&p, 0.0, 1.0, Default::default()), Err(Error::Singular { .. })));
    }

    proptest! {
        #[test]
        fn transform_route_reproduces_closed_form(
            r in 0.1..3.0f64, theta in 0.1..3.0f64, phi in -3.0..3.0f64,
            dr in -2.0..2.0f64, dth in -2.0..2.0f64, dph in -2.0..2.0f64, hbar in 0.5..2.0f64,
        ) {
            let p = path(Linearized { r, theta, phi, rates: (dr, dth, dph) });
            let long = rotated_generator_by_transform(&p, 0.0, hbar).unwrap();
            let short = rotated_generator(&p, 0.0, hbar, RotatedTerms::Full).unwrap().to_matrix();
            prop_assert!(long.max_abs_diff(&short) < 1e-12);
        }

        #[test]
        fn theta_rate_never_reaches_rotated_generator(
            r in 0.1..3.0f64, theta in 0.1..3.0f64, dth in -5.0..5.0f64,
        ) {
            // φ̇ = 0: what remains after removing the energy is exactly zero
            let p = path(Linearized { r, theta, phi: 0.3, rates: (0.0, dth, 0.0) });
            let long = rotated_generator_by_transform(&p, 0.0, 1.0).unwrap();
            let energy = rotated_energy(&p, 0.0).unwrap().to_matrix();
            prop_assert!(long.max_abs_diff(&energy) < 1e-12);
        }
    }
}
