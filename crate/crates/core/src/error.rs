use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("Hilbert dimension (cutoff {cutoff} + 1)^{num_modes} exceeds the limit of {limit}")]
    DimensionLimit {
        num_modes: usize,
        cutoff: usize,
        limit: usize,
    },

    #[error("mode index {mode} out of range for a {num_modes}-mode space")]
    ModeOutOfRange { mode: usize, num_modes: usize },

    #[error("operator power {power} on mode {mode} exceeds the cutoff {cutoff}")]
    PowerExceedsCutoff { mode: usize, power: usize, cutoff: usize },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error(
        "truncation tail mass {tail:.3e} exceeds threshold {threshold:.1e}; increase the cutoff (currently {cutoff})"
    )]
    TailMass { tail: f64, threshold: f64, cutoff: usize },

    #[error("invalid state specification: {0}")]
    InvalidSpec(String),

    #[error("invalid mode unitary: {0}")]
    InvalidUnitary(String),

    #[error(
        "state carries weight {weight:.3e} in photon-number sectors above the cutoff {cutoff}, where the network is not representable"
    )]
    NetworkLeakage { weight: f64, cutoff: usize },

    #[error("cutoff {cutoff} is insufficient: {reason}")]
    CutoffInsufficient { cutoff: usize, reason: String },

    #[error("moment {name} has imaginary part {imag:.3e}; expected a real value")]
    NonRealMoment { name: String, imag: f64 },

    #[error("zero intensity in mode {0}; normalized correlation is undefined")]
    ZeroIntensity(String),

    #[error("correlation record is missing {0}")]
    MissingMoment(String),

    #[error("invalid correlation record: {0}")]
    InvalidRecord(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}
