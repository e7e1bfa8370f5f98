use thiserror::Error;

/// Failure modes of the numerical kernels.
///
/// Anything that indicates a genuinely broken computation (rather than a bad
/// argument, which panics) is routed through this enum so callers can map it to
/// a diagnostic with the offending magnitudes attached.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that should lie in the span of the algebra basis does not.
    #[error("matrix is not in the {instance} algebra span (residual {residual:.3e})")]
    NotInAlgebra {
        instance: &'static str,
        residual: f64,
    },

    /// No built-in integrating group cocycle exists for the requested 2-cocycle.
    #[error("no integrating group cocycle on {instance}: {obstruction}")]
    UnsupportedCocycle {
        instance: &'static str,
        obstruction: String,
    },

    /// Post-step projection moved a holonomy point by more than the trust limit,
    /// meaning the ODE step was too coarse for the requested accuracy.
    #[error(
        "holonomy projection correction {correction:.3e} at s = {s:.6} exceeds {limit:.1e}; \
         increase substeps or grid resolution"
    )]
    StepSize { s: f64, correction: f64, limit: f64 },

    /// A 2-form block that must be invertible is numerically singular.
    #[error("2-form block is numerically singular (smallest singular value {sigma_min:.3e})")]
    SingularForm { sigma_min: f64 },

    /// A linear solve exceeded the conditioning trust limit.
    #[error("linear solve is ill-conditioned (condition estimate {cond:.3e} > {limit:.1e})")]
    IllConditioned { cond: f64, limit: f64 },

    /// Loop data too coarse: a finite-difference derivative left the algebra span.
    #[error("under-resolved loop: derivative residual {residual:.3e} off the algebra at sample {index}")]
    UnderResolved { index: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
