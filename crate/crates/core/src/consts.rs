//! Centralized tolerances and default run parameters.
//!
//! Every check in the crate draws its budget from here so that the meaning of a
//! reported residual is stable across suites, tests, and the CLI.

/// Tolerance budgets, grouped by the error model they answer to.
pub mod tol {
    /// Identities that hold in exact arithmetic: rounding noise only.
    pub const ALGEBRAIC: f64 = 1e-10;
    /// Discretized loop identities (relative): quadrature and ODE floors.
    pub const DISCRETIZED_REL: f64 = 1e-6;
    /// Identities probed through finite-difference exterior derivatives.
    pub const FD: f64 = 1e-4;
    /// Structure-map compatibilities whose error budget is ODE-only.
    pub const MORPHISM: f64 = 1e-8;
    /// Principal angles between computed and predicted kernels.
    pub const KERNEL_ANGLE: f64 = 1e-6;
    /// Contraction identities evaluated analytically on the double.
    pub const CONTRACTION: f64 = 1e-10;
    /// Trust limit for post-step projection corrections in the holonomy ODE.
    pub const PROJECTION_LIMIT: f64 = 1e-6;
    /// Group-membership residual required after projection.
    pub const MEMBERSHIP: f64 = 1e-12;
    /// Condition-number trust limit for dense solves.
    pub const COND_LIMIT: f64 = 1e12;
    /// Singular values below this count as kernel directions.
    pub const SV_FLOOR: f64 = 1e-8;
    /// Near-singular stratum threshold for kernel-dimension bookkeeping.
    pub const NEAR_SINGULAR: f64 = 1e-6;
    /// Negative controls must degrade residuals beyond this.
    pub const NEGATIVE_CONTROL: f64 = 1e-3;
    /// Residual above which a matrix is declared outside the algebra span.
    pub const ALGEBRA_SPAN: f64 = 1e-8;
}

/// Default run parameters shared by the CLI and the integration tests.
pub mod defaults {
    /// Circle grid resolution (a power of two, at least 32).
    pub const GRID_N: usize = 256;
    /// RK4 substeps per grid cell in the holonomy ODE.
    pub const SUBSTEPS: usize = 4;
    /// Random trials per check.
    pub const TRIALS: usize = 100;
    /// Seed for the per-trial ChaCha streams.
    pub const SEED: u64 = 42;
    /// Finite-difference step for directional derivatives on groups.
    pub const FD_STEP: f64 = 1e-4;
    /// Highest Fourier mode used when sampling loops and connections.
    pub const BAND_LIMIT: usize = 5;
}

/// Denominator floor when converting absolute residuals to relative ones.
pub const SCALE_FLOOR: f64 = 1e-3;
