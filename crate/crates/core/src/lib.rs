//! Stability analysis for incommensurate fractional-order linear systems
//! `D^alpha x = A x` with Caputo derivatives of orders in `(0, 1]`.

pub mod approx;
pub mod charpoly;
pub mod cli;
pub mod error;
pub mod general;
pub mod matrix;
pub mod order;
pub mod problem;
pub mod pseudospectrum;
pub mod simulate;
pub mod spectrum;
pub mod system;

pub use error::{Error, Result};
