//! Factorizations `A ⊕ B = Z_M` of cyclic groups of order `M = (pqr)^2`.
//!
//! The crate provides exact residue-set arithmetic, division sets and the two
//! factorization tests (a coverage table and Sands' divisor criterion), exact
//! cyclotomic divisibility of mask polynomials, the Szabó certificate with its
//! builders and structural checks, and an exact-cover complement search.

pub mod cyclotomic;
pub mod divsets;
pub mod error;
pub mod modulus;
pub mod search;
pub mod set;
pub mod strata;
pub mod szabo;

pub use error::{Error, Result};
pub use modulus::{Axis, ModulusContext};
pub use set::{RawSet, ZmSet};
