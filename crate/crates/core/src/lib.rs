//! Quantum Markov semigroups with detailed balance: functional inequalities,
//! Beckner-type constants, noncommutative transport and Ricci curvature bounds.

// `!(x > 0.0)` guards are deliberate: NaN must fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod dirichlet;
pub mod entropy;
pub mod error;
pub mod operator_core;
pub mod ricci;
pub mod sampling;
pub mod semigroup;
pub mod state;
pub mod transport;

pub use error::{Error, Result};
pub use operator_core::{CMat, C64};
pub use semigroup::{DbcLindbladian, JumpTerm, Picture};
pub use state::Reference;

/// Eigenvalue floor below which a reference state counts as singular.
pub const STRICT_FLOOR: f64 = 1e-12;
