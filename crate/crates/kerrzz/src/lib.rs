//! Simulation toolkit for a pair of Kerr-cat qubits whose effective ZZ
//! interaction is switched by two transmon couplers.
//!
//! The system is two identical Kerr parametric oscillators (KPOs) exchange
//! coupled to two transmon couplers. Setting the coupler detunings to opposite
//! values cancels the residual ZZ coupling; sweeping one detuning through a
//! smooth schedule accumulates a conditional phase and realizes an Rzz(Θ)
//! entangling gate. The crate provides
//!
//! * truncated bosonic bases and tensor-product operator algebra ([`hilbert`]),
//! * rotating-frame Hamiltonians for two coupler circuit variants ([`model`]),
//! * circuit-level parameter derivation from element values ([`circuit`]),
//! * the coupler detuning schedule and its accumulated angle ([`schedule`]),
//! * master-equation and pure-state propagators ([`dynamics`]),
//! * state preparation, fidelity metrics and closed-form dephasing references
//!   ([`analysis`]),
//! * canned experiment drivers with CSV/manifest output ([`experiments`]),
//! * key-value run configuration with explicit units ([`config`]).
//!
//! All frequencies are stored internally as angular frequencies (rad/s); the
//! configuration layer accepts ordinary `value/2π` frequencies and converts.
//! Tensor products are always ordered (KPO1, KPO2, coupler1, coupler2).

pub mod analysis;
pub mod circuit;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod schedule;

pub use error::{Error, Result};

/// Planck constant, J s (2018 SI exact value).
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK_H / (2.0 * std::f64::consts::PI);
/// Elementary charge, C (2018 SI exact value).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
