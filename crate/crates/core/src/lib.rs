//! Computations with finite-dimensional representations of type A quivers
//! under arbitrary exact structures: interval combinatorics, an exact
//! rational matrix oracle, Gen-Sub and Coker-Ker closure operators,
//! tilting mutation, and generic Jordan form estimation.

pub mod closure;
pub mod error;
pub mod exact;
pub mod jordan;
pub mod matrix;
pub mod modp;
pub mod oracle;
pub mod quiver;
pub(crate) mod tables;
pub mod tilting;

pub use error::{Error, Result};
