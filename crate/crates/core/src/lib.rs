//! Numerical laboratory for skew-evolution semiflows on `X x R^p`.
//!
//! The crate evaluates semiflow/cocycle pairs, fits and checks witnesses ("certificates")
//! for exponential decay, instability, exponential instability and integral instability,
//! and replays the constructive steps that connect these properties. Every verdict is
//! relative to a finite [`algebra::SampleGrid`]: a pass means no counterexample was found
//! on that grid.

// `!(x >= y)` is used deliberately so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod models;
pub mod numeric;
pub mod quadrature;
pub mod theorems;

pub use error::{LabError, Result};

/// Version string embedded in certificates and reports.
pub const TOOL_VERSION: &str = concat!("cocycle-lab ", env!("CARGO_PKG_VERSION"));
