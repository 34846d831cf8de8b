//! Parallel amplitude estimation toolkit.

// NaN-rejecting guards are written as `!(x <= tol)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit_sim;
pub mod core_model;
pub mod error;
pub mod experiments;
pub mod pae_driver;
pub mod qsp_synthesis;
pub mod rpe;

pub use core_model::{
    build_explicit_oracle, build_grover_unitary, grover_plane, make_instance, AmplitudeInstance,
    ExplicitOracle, GroverPlaneOperator, OracleStyle, C64,
};
pub use error::{PaeError, Result};
pub use qsp_synthesis::{AngleSequence, PhaseShifterSpec, SolveMethod};
