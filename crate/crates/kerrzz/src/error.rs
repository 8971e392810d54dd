//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("operator/state defined on basis {found}, expected {expected}")]
    BasisMismatch { expected: String, found: String },

    #[error("truncated state norm {achieved:.3e} below required {required:.3e}; raise the Fock cutoff")]
    Truncation { achieved: f64, required: f64 },

    #[error("retained KPO pair overlaps the coherent-state span with fidelity {fidelity:.12} < {required}")]
    BasisQuality { fidelity: f64, required: f64 },

    #[error("coupler detuning is zero; conditioned displacement is singular")]
    SingularDetuning,

    #[error("detuning condition is singular: g_kpo*delta2 == g2^2")]
    SingularCondition,

    #[error("flux bias {phi_dc} rad gives non-positive junction energy cos(phi/2) <= 0")]
    InvalidBias { phi_dc: f64 },

    #[error("schedule cannot reach theta = {target} rad within alpha_c^max < 1 at t_f = {t_f} s")]
    InfeasibleSchedule { target: f64, t_f: f64 },

    #[error("root solve failed to converge: {0}")]
    RootSolve(String),

    #[error("integrator step size underflow at t = {t:.6e} s (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("density-matrix trace drifted to {trace} at t = {t:.6e} s (|1 - trace| > {limit:.1e})")]
    TraceDrift { trace: f64, t: f64, limit: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
