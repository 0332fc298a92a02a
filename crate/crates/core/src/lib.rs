//! Numerical kernels for three-dimensional Seiberg-Witten experiments.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command line driver and parallel fan-out live in the `swlab` crate.

#![no_std]

extern crate alloc;

pub mod clifford;
pub mod error;
pub mod field;
pub mod fourier;
pub mod linalg;
pub mod neck;
pub mod quasi;
pub mod sflow;
pub mod torus;

pub use error::{Error, Result};
