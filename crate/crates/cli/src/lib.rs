//! Library half of the `symgrpd` verification harness.
//!
//! The binary is a thin argument parser over these modules, so integration
//! tests (and other tooling) can drive the exact suite code the CLI runs:
//! [`config`] holds the run configuration and the flat `key = value` file
//! format, [`suites`] maps each named suite to deterministic residual records,
//! [`convergence`] refits those records across resolutions or step sizes, and
//! [`report`] renders everything to the byte-stable report document.

pub mod config;
pub mod convergence;
pub mod report;
pub mod sampling;
pub mod suites;
