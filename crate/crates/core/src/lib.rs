//! Finite-dimensional index-2 C*-inclusions.
//!
//! The crate works with concrete matrix realizations of:
//!
//! * unital inclusions `A ⊂ B` with a conditional expectation `E` ([`inclusion`]),
//! * the basic construction `C*<B, e_A>` in two independent models ([`basic`]),
//! * involutive `A`-`A` equivalence bimodules ([`bimodule`]),
//! * the two functors between these classes and their round trips ([`correspondence`]),
//! * `Z_2` crossed products, 2Z-inner systems and the trichotomy classifier ([`dynamics`]).
//!
//! Every structural claim is checked numerically and reported as a
//! [`check::CheckReport`] of residuals against a [`matkernel::Tol`].

pub mod basic;
pub mod bimodule;
pub mod check;
pub mod correspondence;
pub mod cstar;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod inclusion;
pub mod matkernel;
pub mod subspace;

pub use check::{Check, CheckReport};
pub use cstar::CStarAlg;
pub use error::{Error, Result};
pub use matkernel::{CMat, Tol};
