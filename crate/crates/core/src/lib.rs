//! Finite-difference schemes for stationary Hamilton-Jacobi equations.

pub mod error;
pub mod grid;
pub mod operators;
pub mod problems;
pub mod schemes;
pub mod solver;
pub mod harness;

pub use error::{Error, Result};
