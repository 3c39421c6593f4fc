//! Construction, verification, classification and equivalence testing of
//! 6×6 complex Hadamard matrices.
//!
//! A complex Hadamard matrix has unimodular entries and pairwise-orthogonal
//! rows (`HH* = nI`). Two such matrices are equivalent when one is carried to
//! the other by permutations and unitary diagonal scalings on both sides.
//! This crate provides:
//!
//! - phase-based matrix types where unimodularity is structural ([`matrix`]),
//! - the two-entry row completion and the Haagerup product test ([`completion`]),
//! - exact constructors for the named order-6 matrices, a non-affine
//!   one-parameter family connecting the Fourier and Diţă matrices, the block
//!   tensor construction and affine-family ingestion ([`catalogue`]),
//! - the invariant-set filter and an exhaustive equivalence decision
//!   procedure with verified certificates ([`equivalence`]),
//! - a multi-start Gauss-Newton classifier for dephased symmetric matrices
//!   under diagonal restrictions ([`classify`]).

pub mod catalogue;
pub mod classify;
pub mod completion;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod matrix;
pub mod unit;

pub use error::{Error, Result};
pub use matrix::{CHMatrix, Tolerances};
pub use unit::UnitComplex;
