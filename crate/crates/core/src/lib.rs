//! Affine Turing machines and the circuits that simulate them.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every algorithmic
//! piece of the pipeline:
//!
//! * [`machine`]: nondeterministic and affine Turing machines, exact execution,
//!   gap functions and uniformization.
//! * [`reductions`]: gap function to affine machine and back, with cross-checks.
//! * [`circuit`]: affine gates, sparse and dense simulation, effects.
//! * [`compiler`]: the cell encoding and the `G`/`I`/`S` gate construction
//!   turning a machine into a circuit.
//! * [`theory`]: noisy measurements, the veil of propriety, local tomography,
//!   causality checks and the allowed-circuit validator.
//! * [`acceptor`] and [`sat`]: acceptance semantics and the UNIQUE-SAT demo.
//!
//! File formats, reports and the command line live in the `awpp` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod acceptor;
pub mod circuit;
pub mod compiler;
pub mod corpus;
pub mod machine;
pub mod rational;
pub mod reductions;
pub mod sat;
pub mod theory;

pub use rational::Rational;
