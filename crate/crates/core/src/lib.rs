//! Polynomial entropy of piecewise-linear maps on finite metric graphs.
//!
//! The crate provides exact rational PL dynamics (composition, lap numbers,
//! preimage-component counts, fixed points), separated/spanning-set counting
//! under the dynamic metric, growth-exponent estimation, and finite-subset
//! hyperspaces with the Hausdorff metric.

pub mod catalog;
pub mod entropy_lab;
pub mod error;
pub mod hyperspace;
pub mod phase_space;
pub mod pl_dynamics;
pub mod rational;

pub use error::{Error, Result};
