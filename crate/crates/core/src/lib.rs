//! p-adic quantum calculus on truncated character bases.
//!
//! The quantum derivative of a function `f` on the p-adic integers is the
//! commutator `df = [M_f, S]` of multiplication by `f` with the Hilbert
//! operator `S`, which acts on the character `χ_α` by the quadratic sign
//! `sgn(α)`. This crate builds `df` at a finite level `N` (a `p^N × p^N`
//! matrix in the character basis, or a matrix-free applier), computes its rank
//! and singular values, and evaluates the function-space seminorms that
//! control them.

pub mod error;
pub mod function_space;
pub mod operators;
pub mod padic;
pub mod seminorms;
pub mod spectral;
pub mod verify;

pub use error::{PqcError, Result};
