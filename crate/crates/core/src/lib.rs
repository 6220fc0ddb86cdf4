// Copyright 2026 The latsym Authors.
// SPDX-License-Identifier: Apache-2.0

//! Symbolic-numeric calculus for difference equations on integer lattices.
//!
//! The crate houses expression trees over lattice jet coordinates
//! ([`expr`]), the shift/prolongation/Euler operator calculus
//! ([`calculus`]), randomized identity testing on solution manifolds
//! ([`verify`]), numeric orbit and quad-graph generation ([`simulate`]),
//! and the in-memory model of catalog entries ([`catalog`]).
//!
//! Everything here is `no_std` with `alloc`; file formats, the catalog
//! files themselves and the command-line front end live in the `latsym`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calculus;
pub mod catalog;
pub mod expr;
mod index;
pub mod simulate;
pub mod verify;

pub use calculus::{Characteristic, ConservationLaw, Lagrangian};
pub use expr::{Environment, Expr, Number, Symbol, Var};
pub use index::MultiIndex;
pub use verify::{DifferenceSystem, Sampling, Status, Verdict, ZeroTestConfig};

/// Exact rational numbers used for constants and exact evaluation.
pub type Rational = num_rational::BigRational;
