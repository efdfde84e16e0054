//! Detection of planted rank-1 matrices in generic linear subspaces.
//!
//! The crate covers three workflows that share the same constraint matrix
//! (rows indexed by 2×2 minors, columns by pairs of basis elements):
//!
//! - exact certificates over a prime field that the constraint matrix has
//!   full column rank for a given parameter case ([`certify`]);
//! - floating-point recovery of planted rank-1 matrices from an orthonormal
//!   basis via kernel computation and simultaneous diagonalization
//!   ([`recover`]);
//! - CP decomposition of order-3, order-4 and symmetric order-4 tensors by
//!   flattening and rank-1 recovery on the column span ([`tensor`]).
//!
//! All matrices are vectorized row-major: entry `(i, j)` of an `m × n`
//! matrix sits at position `i * n + j`. Indices are zero-based throughout.

pub mod bounds;
pub mod certify;
pub mod error;
pub mod field;
pub mod linalg;
pub mod minor_forms;
pub mod proof_check;
pub mod recover;
pub mod rng;
pub mod subspaces;
pub mod tensor;

pub use bounds::{PlantSpec, ProblemShape};
pub use error::{Error, Result};
