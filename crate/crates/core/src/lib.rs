//! Concatenated sphere packings over the Eisenstein integers.
//!
//! The crate is organised bottom-up:
//!
//! - [`eisenstein`]: exact arithmetic in `Z[ω]`, prime splitting in `Q(√-3)`,
//!   residue alphabets and the embedding `C -> R²`.
//! - [`lattice`]: integer lattices, the root lattices `A_{n-1}`, dimension
//!   augmentation, the complexification `P + ωP` and packing-density metrics.
//! - [`coding`]: the `q`-ary entropy function, the Gilbert–Varshamov rate and
//!   small explicit codes over residue alphabets.
//! - [`concat`]: the concatenation `C_0 + t C_1 + ... + t^ℓ P`, built explicitly
//!   and checked by brute force.
//! - [`asymptotics`]: closed-form density-exponent bounds for the ring of
//!   integers, principal and congruence lattice families, and the parameter
//!   searches over them.
//! - [`cli`]: the command-line front end (feature `cli`).

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod coding;
pub mod concat;
pub mod eisenstein;
mod error;
pub mod lattice;
pub mod numeric;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
