//! The non-free theory built on compiled circuits: noisy measurements, the
//! veil of propriety, local tomography, the accept / reject / none
//! measurement, causality checks and the allowed-circuit validator.

mod instance;
mod measure;
mod noisy;
mod prep;
mod validate;
mod veil;

use alloc::string::String;

use crate::circuit::CircuitError;
use crate::compiler::CompileError;

pub use instance::{
    assemble_instance, check_causality, CatalogueMeasurement, CausalityCheck, CausalityReport,
    SystemKind, SystemType, TheoryInstance, TheoryOptions,
};
pub use measure::{final_measurement, FinalMeasurement};
pub use noisy::{
    active_wires, mat_mul, mixing_inverse, mixing_matrix, noisy_effect_pair, noisy_statistics,
    restrict_to_wires, tomography_reconstruct, tomography_round_trip, NoisyMeasurement,
    RoundTripMethod, MAX_TOMOGRAPHY_WIDTH,
};
pub use prep::{
    downward_closure, enumerate_preparations, gate_predecessors, Preparation,
    PreparationDescriptor, PreparationLimits, PreparationSet,
};
pub use validate::{validate_allowed_circuit, AllowedCircuitDescriptor, Validation, WireMeasurement};
pub use veil::{proper_at, veil_search, VeilResult, MAX_ACTIVE_WIRES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("noise parameter {0} is outside (0, 1]")]
    NoiseOutOfRange(String),
    #[error("D(0) is singular")]
    Singular,
    #[error("{0} wires is too many for a full outcome table")]
    TooWide(usize),
    #[error("outcome string {0:#b} is wider than the register")]
    OutcomeOutOfRange(u128),
    #[error("preparation list is empty")]
    NoPreparations,
    #[error("gate {index} does not exist; the circuit has {count} gates")]
    DanglingGate { index: usize, count: usize },
    #[error("expected {expected} wires, got {given}")]
    AssignmentLength { expected: usize, given: usize },
}
