//! Shared random ensembles for the suites.
//!
//! Loop data comes in two amplitude profiles: `rand_connection` keeps every
//! Fourier mode at unit scale (integration variables for holonomy work),
//! while the generator-profile samplers damp mode `m` by `0.7 / (1 + m)`
//! (group elements, tangents, and base points, where smoothness keeps the
//! discretization floors well under the relative budgets).

use symgrpd_core::amm::{DPoint, DTangent, LoopPoint, LoopTangent};
use symgrpd_core::lie::{AlgebraElement, GroupKind, LieInstance};
use symgrpd_core::loops::{AlgebraLoop, DiscreteConnection, DiscreteLoop, Grid};
use symgrpd_core::poisson::{integrate_cocycle, GroupCocycle, TwoCocycle};
use symgrpd_core::sample::{
    connection_amp, generator_amp, rand_algebra, rand_covector, rand_group, rand_trig_poly,
    TrialRng, VecTrigPoly,
};
use symgrpd_core::Result as CoreResult;

pub fn rand_connection(
    inst: &'static LieInstance,
    grid: Grid,
    band: usize,
    rng: &mut TrialRng,
) -> DiscreteConnection {
    DiscreteConnection::from_trig(inst, grid, &rand_trig_poly(inst.dim(), band, rng, connection_amp))
}

pub fn rand_gen_connection(
    inst: &'static LieInstance,
    grid: Grid,
    band: usize,
    rng: &mut TrialRng,
) -> DiscreteConnection {
    DiscreteConnection::from_trig(inst, grid, &rand_trig_poly(inst.dim(), band, rng, generator_amp))
}

pub fn rand_algebra_loop(
    inst: &'static LieInstance,
    grid: Grid,
    band: usize,
    rng: &mut TrialRng,
) -> AlgebraLoop {
    AlgebraLoop::from_trig(inst, grid, &rand_trig_poly(inst.dim(), band, rng, generator_amp))
}

pub fn rand_loop(
    inst: &'static LieInstance,
    grid: Grid,
    band: usize,
    rng: &mut TrialRng,
) -> DiscreteLoop {
    DiscreteLoop::from_exp_trig(inst, grid, &rand_trig_poly(inst.dim(), band, rng, generator_amp))
}

pub fn rand_loop_tangent(
    inst: &'static LieInstance,
    grid: Grid,
    band: usize,
    rng: &mut TrialRng,
) -> LoopTangent {
    LoopTangent::new(
        rand_algebra_loop(inst, grid, band, rng),
        rand_gen_connection(inst, grid, band, rng),
    )
}

pub fn rand_loop_point(
    inst: &'static LieInstance,
    grid: Grid,
    band: usize,
    rng: &mut TrialRng,
) -> LoopPoint {
    LoopPoint::new(rand_loop(inst, grid, band, rng), rand_gen_connection(inst, grid, band, rng))
}

pub fn rand_dpoint(inst: &'static LieInstance, rng: &mut TrialRng) -> DPoint {
    DPoint::new(rand_group(inst, rng), rand_group(inst, rng))
}

pub fn rand_dtangent(inst: &'static LieInstance, rng: &mut TrialRng) -> DTangent {
    DTangent::new(rand_algebra(inst, rng), rand_algebra(inst, rng))
}

/// The constant connection with value `v` at every node.
pub fn constant_connection(
    inst: &'static LieInstance,
    grid: Grid,
    v: &AlgebraElement,
) -> DiscreteConnection {
    let dual = inst.gram() * &v.coeffs;
    DiscreteConnection::from_samples(inst, grid, vec![dual; grid.n()])
}

/// Pointwise bracket of two algebra loops, with the Leibniz derivative.
pub fn bracket_loop(v: &AlgebraLoop, w: &AlgebraLoop) -> AlgebraLoop {
    let inst = v.instance();
    let n = v.grid.n();
    let mut samples = Vec::with_capacity(n);
    let mut deriv = Vec::with_capacity(n);
    for k in 0..n {
        samples.push(inst.bracket_coeffs(&v.samples[k], &w.samples[k]));
        deriv.push(
            inst.bracket_coeffs(&v.deriv[k], &w.samples[k])
                + inst.bracket_coeffs(&v.samples[k], &w.deriv[k]),
        );
    }
    AlgebraLoop::from_parts(inst, v.grid, samples, deriv)
}

/// The cocycle family each group contributes to the affine suites: an exact
/// cocycle at a random base covector where coboundaries span everything, the
/// area form on the flat plane, and the trivial class on the torus, each with
/// its integrating group cocycle.
pub fn cocycle_family(
    inst: &'static LieInstance,
    rng: &mut TrialRng,
) -> CoreResult<(TwoCocycle, GroupCocycle)> {
    let lambda = match inst.kind() {
        GroupKind::Su2 | GroupKind::So3 => TwoCocycle::exact(inst, &rand_covector(inst, rng)),
        GroupKind::Abelian2 => TwoCocycle::area(inst),
        GroupKind::Torus2 | GroupKind::Heisenberg3 => TwoCocycle::zero(inst),
    };
    let chi = integrate_cocycle(&lambda)?;
    Ok((lambda, chi))
}

/// Trig data for one arrow with two tangents, rebuildable at any grid so a
/// single draw can be compared across resolutions.
pub struct ArrowDraw {
    inst: &'static LieInstance,
    gamma: VecTrigPoly,
    a: VecTrigPoly,
    t1v: VecTrigPoly,
    t1b: VecTrigPoly,
    t2v: VecTrigPoly,
    t2b: VecTrigPoly,
}

pub fn draw_arrow(inst: &'static LieInstance, band: usize, rng: &mut TrialRng) -> ArrowDraw {
    let d = inst.dim();
    ArrowDraw {
        inst,
        gamma: rand_trig_poly(d, band, rng, generator_amp),
        a: rand_trig_poly(d, band, rng, generator_amp),
        t1v: rand_trig_poly(d, band, rng, generator_amp),
        t1b: rand_trig_poly(d, band, rng, generator_amp),
        t2v: rand_trig_poly(d, band, rng, generator_amp),
        t2b: rand_trig_poly(d, band, rng, generator_amp),
    }
}

impl ArrowDraw {
    pub fn build(&self, grid: Grid) -> (LoopPoint, LoopTangent, LoopTangent) {
        let inst = self.inst;
        let p = LoopPoint::new(
            DiscreteLoop::from_exp_trig(inst, grid, &self.gamma),
            DiscreteConnection::from_trig(inst, grid, &self.a),
        );
        let t1 = LoopTangent::new(
            AlgebraLoop::from_trig(inst, grid, &self.t1v),
            DiscreteConnection::from_trig(inst, grid, &self.t1b),
        );
        let t2 = LoopTangent::new(
            AlgebraLoop::from_trig(inst, grid, &self.t2v),
            DiscreteConnection::from_trig(inst, grid, &self.t2b),
        );
        (p, t1, t2)
    }
}
