//! Exact-arithmetic toolkit for smooth complete toric varieties.
//!
//! A variety is presented by its fan (primitive ray generators plus maximal
//! cones). On top of that presentation the crate computes primitive
//! collections and relations, the lattice of 1-cycle classes, the cone of
//! curves with projectivity certificates, contractible and extremal classes,
//! contraction morphisms as fan surgery, smooth equivariant blow-ups and
//! blow-downs with class bookkeeping, and integral decompositions of
//! effective classes into contractible classes.
//!
//! All arithmetic is exact: arbitrary-precision integers and rationals
//! throughout, including the internal LP feasibility solver. There is no
//! floating point anywhere in the crate.

pub mod blowup;
pub mod catalog;
pub mod contract;
pub mod cycles;
pub mod error;
pub mod fan;
pub mod lattice;
pub mod mori;

pub use error::Error;
