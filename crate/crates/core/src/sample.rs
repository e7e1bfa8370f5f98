//! Seeded random ensembles.
//!
//! Every randomized check draws from a ChaCha stream keyed by `(seed, suite,
//! trial)`, so any single trial can be replayed in isolation: the trial index
//! selects a stream, not a position in a shared sequence, and parallel
//! execution cannot perturb the draws.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::lie::{AlgebraElement, Covector, GroupPoint, LieInstance};

/// The RNG used everywhere randomness is needed.
pub type TrialRng = ChaCha12Rng;

/// Per-trial stream: `seed` picks the key, `(suite, trial)` picks the stream.
pub fn rng_for(seed: u64, suite: u32, trial: u64) -> TrialRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(((suite as u64) << 40) ^ trial);
    rng
}

/// Coefficient vector with entries uniform in `[-1, 1]`.
pub fn rand_coeffs(dim: usize, rng: &mut TrialRng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
}

pub fn rand_algebra(inst: &'static LieInstance, rng: &mut TrialRng) -> AlgebraElement {
    inst.alg(rand_coeffs(inst.dim(), rng))
}

pub fn rand_covector(inst: &'static LieInstance, rng: &mut TrialRng) -> Covector {
    inst.covector(rand_coeffs(inst.dim(), rng))
}

pub fn rand_group(inst: &'static LieInstance, rng: &mut TrialRng) -> GroupPoint {
    inst.exp(&rand_algebra(inst, rng))
}

/// A vector-valued trigonometric polynomial on the unit circle:
/// `p(s) = a0 + sum_m cos(2 pi m s) c_m + sin(2 pi m s) d_m`, with exact
/// derivative available. Band-limited data keeps circle quadrature and
/// trigonometric interpolation spectrally exact on power-of-two grids.
#[derive(Clone, Debug)]
pub struct VecTrigPoly {
    pub a0: DVector<f64>,
    pub cos_coeffs: Vec<DVector<f64>>,
    pub sin_coeffs: Vec<DVector<f64>>,
}

impl VecTrigPoly {
    pub fn eval(&self, s: f64) -> DVector<f64> {
        let mut v = self.a0.clone();
        for (m, (c, d)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let w = 2.0 * std::f64::consts::PI * (m + 1) as f64 * s;
            v += c * w.cos() + d * w.sin();
        }
        v
    }

    pub fn deriv(&self, s: f64) -> DVector<f64> {
        let mut v = DVector::zeros(self.a0.len());
        for (m, (c, d)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let omega = 2.0 * std::f64::consts::PI * (m + 1) as f64;
            let w = omega * s;
            v += d * (omega * w.cos()) - c * (omega * w.sin());
        }
        v
    }
}

/// Random trig polynomial with per-mode amplitude `amp(m)` (`m = 0` is the
/// constant term) and coefficients uniform in `[-amp, amp]`.
pub fn rand_trig_poly(
    dim: usize,
    band: usize,
    rng: &mut TrialRng,
    amp: impl Fn(usize) -> f64,
) -> VecTrigPoly {
    let a = amp(0);
    let a0 = DVector::from_fn(dim, |_, _| rng.random_range(-a..a));
    let mut cos_coeffs = Vec::with_capacity(band);
    let mut sin_coeffs = Vec::with_capacity(band);
    for m in 1..=band {
        let a = amp(m);
        cos_coeffs.push(DVector::from_fn(dim, |_, _| rng.random_range(-a..a)));
        sin_coeffs.push(DVector::from_fn(dim, |_, _| rng.random_range(-a..a)));
    }
    VecTrigPoly { a0, cos_coeffs, sin_coeffs }
}

/// Amplitude profile for dual-side data (connections, tangent covectors):
/// flat across the band.
pub fn connection_amp(_m: usize) -> f64 {
    1.0
}

/// Amplitude profile for loop-group generators: decaying so that pointwise
/// exponentials stay well inside the injectivity radius.
pub fn generator_amp(m: usize) -> f64 {
    0.7 / (1.0 + m as f64)
}
