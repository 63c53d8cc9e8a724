//! Numerical toolkit for pair correlation of real sequences: sequence
//! generators, pair-correlation counts, additive energies, planar lattice
//! geometry, exponential-sum moments and inequality verifiers.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod energy;
pub mod error;
pub mod lattice;
pub mod numeric;
pub mod paircorr;
pub mod report;
pub mod sequences;
pub mod verifier;

pub use error::{Error, Result};
pub use report::{RatioReport, SweepResult, Witness};
pub use sequences::{SequenceSpec, SequenceWindow};
