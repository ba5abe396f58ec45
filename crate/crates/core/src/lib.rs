//! Simulation and statistical verification of chordal and two-sided radial
//! SLE: Loewner-chain sampling, Green's functions, natural parametrization,
//! measures on curve space and the length-biased aggregate identity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod content;
pub mod curvespace;
pub mod loewner;
pub mod measures;
pub mod quad;
pub mod error;
pub mod green;
pub mod rng;
pub mod stats;
pub mod twosided;
pub mod aggregate;
pub mod harness;

pub use conformal::C64;
pub use error::{Result, SleError};
