//! # dschain
//!
//! Quantum evolution seen through doubly stochastic matrices.
//!
//! A trace-preserving Kraus set `{A_α}` on `C^n` descends to the column-stochastic
//! matrix `M_ij = Σ_α |⟨i|A_α|j⟩|²`, which is doubly stochastic exactly when the set
//! is also unital. This crate provides:
//!
//! - [`simplex`]: probability vectors, stochastic matrices, contraction coefficients
//!   and seeded samplers.
//! - [`entropy`]: classical and quantum Rényi entropies and the checks that doubly
//!   stochastic matrices (and only those) never decrease them.
//! - [`kraus`]: Kraus sets, their descent to stochastic matrices, the rank-one
//!   inverse construction, channel action and projector dephasing.
//! - [`dilation`]: a unitary on system ⊗ `C^{2N}` whose reduction reproduces the
//!   descended matrix.
//! - [`birkhoff`]: decomposition into convex combinations of permutations.
//! - [`process`]: Poisson-clocked reductions, trajectory and ensemble simulation,
//!   history probabilities and chain contraction.
//! - [`io`]: JSON documents and CSV tables.
//!
//! Matrices act on column vectors and their columns sum to one.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod birkhoff;
pub mod dilation;
pub mod entropy;
pub mod error;
pub mod io;
pub mod kraus;
pub mod linalg;
pub mod process;
pub mod rng;
pub mod simplex;

pub use error::{Error, Result};
