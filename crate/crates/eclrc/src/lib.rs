//! Elliptic-curve locally repairable codes.
//!
//! This crate builds, from scratch and in exact arithmetic:
//!
//! - small finite fields GF(p^a) ([`gf`]),
//! - Weierstrass curves over them with the full group law in every
//!   characteristic ([`curve`]),
//! - the rational-function machinery of the curve's function field:
//!   valuations, principal divisors and Riemann-Roch bases ([`funcfield`]),
//! - the automorphism group of the function field as a semidirect product
//!   of translations and the stabilizer of the infinite place, with
//!   subgroup and abelian-subgroup analysis ([`autgroup`]),
//! - optimal locally repairable codes evaluated on the free orbits of such
//!   subgroups: encoding, single-erasure local repair, erasure decoding
//!   and optimality verification ([`lrc`]).
//!
//! [`selftest`] packages the end-to-end verification suite used both by
//! the `acceptance` integration test and by the CLI.

pub mod autgroup;
pub mod curve;
pub mod funcfield;
pub mod gf;
mod linalg;
pub mod lrc;
pub mod poly;
// pub mod selftest;




pub use gf::{Field, FieldElement, GfError};

pub use poly::Poly;
