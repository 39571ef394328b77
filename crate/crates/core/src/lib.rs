//! Simulation of two-mode interference in a truncated Fock space: states,
//! linear optical networks, normal-ordered correlations and the
//! which-path/visibility complementarity built from them.

pub mod correlation;
pub mod duality;
pub mod error;
pub mod fock;
pub mod optics;
pub mod spec;
pub mod states;

pub use error::{Error, Result};
pub use fock::{CMatrix, FockSpace, MomentRequest, QuantumState};
pub use spec::StateSpec;
