//! Zero-temperature Grüneisen parameter of quantum spin models.
//!
//! The crate computes `Γ₀ᵏ = −(∂²E₀/∂h∂g)/(h ∂²E₀/∂h²)` for two-parameter
//! ground-state energies, locates where it diverges, and relates those
//! points to entanglement measures of the same ground states.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ed;
pub mod elliptic;
pub mod entanglement;
pub mod error;
pub mod gamma;
pub mod kane;
pub mod linalg;
pub mod quadrature;
pub mod selftest;
pub mod tfim;

pub use error::{Error, Result};
