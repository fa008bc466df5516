//! Feasibility arithmetic and exhaustive orbit searches for finite linear
//! spaces admitting a line-transitive, point-imprimitive automorphism group.
//!
//! - [`arith`]: parameter rows `(k, x, y, c, d)` and class-intersection types.
//! - [`groups`]: affine and explicit permutation groups, pair orbits, block
//!   systems and the group filters that any such group must pass.
//! - [`search`]: base-block search under line-regular groups, with a
//!   brute-force oracle and isomorphism classification.
//! - [`designs`] and [`canon`]: verification, intersection types against a
//!   partition, Singer planes and canonical forms.
//! - [`catalog`]: bundled fixtures and reproduction manifests.

pub mod arith;
pub mod canon;
pub mod catalog;
pub mod designs;
pub mod error;
pub mod field;
pub mod groups;
pub mod perm;
pub mod search;

pub use error::{Error, Result};
