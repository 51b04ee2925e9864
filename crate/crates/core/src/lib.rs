//! Numerical verification of the gravitational Chern-Simons term for the
//! adiabatic family of metrics `g_ε = ε κ⊗κ + π*h` on circle bundles over a
//! surface chart.
//!
//! Every closed form is paired with an independent generic computation:
//! Christoffel symbols of the assembled metric, the spin connection from its
//! defining formula, and the Chern-Simons density in trace form.

// Index loops mirror tensor notation; negated comparisons also reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chern_simons;
pub mod config;
pub mod connection;
pub mod error;
pub mod export;
pub mod frames;
pub mod geometry;
pub mod kaluza_klein;
pub mod presets;
pub mod quadrature;
pub mod suite;

pub use error::{Error, Result};
