//! Exact dynamics of a driven two-level system near a level crossing.
//!
//! * [`model`]: the Hamiltonian `(E0 + y0)·I + g·σ·y`, its polar-gauge
//!   eigensystem and drive paths.
//! * [`connection`]: the geometric connection `⟨v_m| i ∂t |v_n⟩` (diagonal and
//!   off-diagonal), loop integrals and solid angles.
//! * [`evolution`]: unitary evolution in the fixed basis, the instantaneous
//!   eigenbasis and the θ-rotated basis, plus the adiabatic approximation.
//! * [`phases`]: cyclic phase decomposition and transition diagnostics.
//! * [`scenarios`]: concrete drive models, parameter sweeps and the JSON/CSV
//!   formats used by the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connection;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod model;
pub mod phases;
pub mod scenarios;

pub use error::{Error, Result};
pub use linalg::{Herm2, Mat2, Spinor, Vec3};
pub use model::{
    from_polar, to_polar, ConstantCurve, Curve, Eigensystem, Level, ParameterPath, PolarField, TwoLevelHamiltonian,
};
pub use num_complex::Complex64;
