//! End-to-end scenarios through the public API only: from a Lie algebra
//! 2-cocycle to the symplectic groupoid over the dual, and from a drawn loop
//! arrow through holonomy transport to the closed identity chain.

use symgrpd_core::amm::{ArrowLab, LoopPoint, LoopTangent};
use symgrpd_core::lie::{instance, GroupKind};
use symgrpd_core::loops::{holonomy, AlgebraLoop, DiscreteConnection, DiscreteLoop, Grid};
use symgrpd_core::poisson::{integrate_cocycle, jacobi_defect, TwoCocycle};
use symgrpd_core::sample::{
    generator_amp, rand_algebra, rand_covector, rand_group, rand_trig_poly, rng_for,
};
use symgrpd_core::symplectic::{GammaGroupoid, GammaPoint, GammaTangent};

#[test]
fn affine_cocycle_integrates_into_the_symplectic_groupoid() {
    for kind in [GroupKind::Su2, GroupKind::So3, GroupKind::Abelian2] {
        let inst = instance(kind);
        let mut rng = rng_for(7, 710, 0);
        let lambda = match kind {
            GroupKind::Abelian2 => TwoCocycle::area(inst),
            _ => TwoCocycle::exact(inst, &rand_covector(inst, &mut rng)),
        };
        let chi = integrate_cocycle(&lambda).expect("built-in cocycles integrate");
        let gg = GammaGroupoid::new(lambda.clone(), chi);

        for trial in 0..25u64 {
            let mut rng = rng_for(7, 710, trial);
            let (a, b, c) = (
                rand_algebra(inst, &mut rng),
                rand_algebra(inst, &mut rng),
                rand_algebra(inst, &mut rng),
            );
            let xi = rand_covector(inst, &mut rng);
            let jac = jacobi_defect(&lambda, &a, &b, &c, &xi).abs();
            assert!(jac < 1e-12, "affine Jacobi defect {jac:.3e} on {}", kind.name());

            let p = GammaPoint { g: rand_group(inst, &mut rng), eta: xi };
            let sol = gg.realize(&p, &a).expect("2-form stays nondegenerate");
            let cf = gg.realize_closed_form(&p, &a);
            let gap = sol.v.sub(&cf.v).norm().max(sol.zeta.sub(&cf.zeta).norm());
            assert!(gap < 1e-12, "realization gap {gap:.3e} on {}", kind.name());

            let t = GammaTangent { v: b, zeta: rand_covector(inst, &mut rng) };
            let contraction = (gg.omega(&p, &sol, &t) - t.zeta.pair(&a)).abs();
            assert!(contraction < 1e-12, "defining contraction off by {contraction:.3e}");

            let (g, h) = (rand_group(inst, &mut rng), rand_group(inst, &mut rng));
            let eta = rand_covector(inst, &mut rng);
            let t1 = (
                rand_algebra(inst, &mut rng),
                rand_algebra(inst, &mut rng),
                rand_covector(inst, &mut rng),
            );
            let t2 = (
                rand_algebra(inst, &mut rng),
                rand_algebra(inst, &mut rng),
                rand_covector(inst, &mut rng),
            );
            let mult = gg.multiplicativity_defect(&g, &h, &eta, &t1, &t2).abs();
            assert!(mult < 1e-12, "multiplicativity defect {mult:.3e} on {}", kind.name());
        }
    }
}

#[test]
fn loop_transport_closes_the_identity_chain() {
    let inst = instance(GroupKind::Su2);
    let grid = Grid::new(256);
    let d = inst.dim();
    for trial in 0..10u64 {
        let mut rng = rng_for(7, 711, trial);
        let p = LoopPoint::new(
            DiscreteLoop::from_exp_trig(inst, grid, &rand_trig_poly(d, 2, &mut rng, generator_amp)),
            DiscreteConnection::from_trig(inst, grid, &rand_trig_poly(d, 2, &mut rng, generator_amp)),
        );
        let t1 = LoopTangent::new(
            AlgebraLoop::from_trig(inst, grid, &rand_trig_poly(d, 2, &mut rng, generator_amp)),
            DiscreteConnection::from_trig(inst, grid, &rand_trig_poly(d, 2, &mut rng, generator_amp)),
        );
        let t2 = LoopTangent::new(
            AlgebraLoop::from_trig(inst, grid, &rand_trig_poly(d, 2, &mut rng, generator_amp)),
            DiscreteConnection::from_trig(inst, grid, &rand_trig_poly(d, 2, &mut rng, generator_amp)),
        );

        let path = holonomy(&p.a, 4).expect("holonomy integrates");
        assert!(
            path.max_membership < 1e-12,
            "membership drift {:.3e}",
            path.max_membership
        );

        let lab = ArrowLab::new(p, 4).expect("arrow lab evaluates");
        let c = lab.chain_sample(&t1, &t2);
        let scale = c.scale().max(1e-3);
        for (name, defect) in [
            ("equivalence", c.equivalence_defect()),
            ("coboundary", c.coboundary_defect()),
            ("inversion", c.inversion_defect()),
        ] {
            assert!(
                defect.abs() < 1e-6 * scale,
                "{name} defect {:.3e} against scale {scale:.3e}",
                defect.abs()
            );
        }
    }
}
