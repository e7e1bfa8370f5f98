//! Numerical kernels for verifying identities of affine Poisson structures, their
//! symplectic groupoids, discretized loop-group holonomy, and quasi-Hamiltonian
//! double spaces.
//!
//! The crate is organized around five fixed matrix-group instances (`lie`), affine
//! Poisson data built from Lie-algebra 2-cocycles and integrating group 1-cocycles
//! (`poisson`), action-groupoid calculus with a simplicial differential (`groupoid`),
//! the canonical 2-form on `G x g*` together with its central-extension reduction
//! (`symplectic`), a discretized loop group with holonomy (`loops`), and the
//! identities tying loop holonomy to the conjugation double (`amm`).
//!
//! All randomness flows through seeded, per-trial ChaCha streams (`sample`), so
//! every residual in the crate is reproducible in isolation.

pub mod amm;
pub mod consts;
pub mod error;
pub mod groupoid;
pub mod lie;
pub mod loops;
pub mod poisson;
pub mod sample;
pub mod stats;
pub mod symplectic;

pub use error::{Error, Result};
