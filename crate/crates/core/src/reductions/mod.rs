//! Both directions of the equivalence between gap functions and affine
//! machines, plus exact cross-checks of the resulting identities.

mod aff_to_gap;
mod crosscheck;
mod gap_to_aff;

use alloc::string::String;

use crate::machine::MachineError;

pub use aff_to_gap::{afftm_to_gap, AffToGap, AffToGapSpec};
pub use crosscheck::{
    crosscheck_reductions, CrosscheckOptions, CrosscheckReport, IdentityCheck, Mutation,
    ReductionSource,
};
pub use gap_to_aff::{gap_to_afftm, GapToAffSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("source machine is not uniform: {0}")]
    NotUniform(String),
    #[error("dampening exponent must be at least 1")]
    BadExponent,
    #[error("construction too large: {0}")]
    TooLarge(String),
}
