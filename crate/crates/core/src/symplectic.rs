//! The canonical multiplicative 2-form on the action groupoid `G x g*` of an
//! affine coadjoint action, together with its symplectic-realization and
//! Hamiltonian specializations, and the reduction picture through a central
//! extension carrying a pseudo-connection 1-form.
//!
//! At a point `(g, eta)` with left-trivialized tangents `(v_i, zeta_i)`:
//!
//! `omega((v1, zeta1), (v2, zeta2)) =
//!     <zeta1, v2> - <zeta2, v1> - <eta, [v1, v2]> - lambda(v1, v2)`.
//!
//! In stacked coordinates `(v, zeta)` this is the block matrix
//! `[[-K, -G^T], [G, 0]]` with `K_ij = <eta, [e_i, e_j]> + lambda(e_i, e_j)`
//! and `G` the pairing Gram matrix, so the form is nondegenerate whenever the
//! pairing is, independent of `K`.

use nalgebra::{DMatrix, DVector};

use crate::consts::tol;
use crate::error::{Error, Result};
use crate::groupoid::{partial2_2, AffineModel, Pair, PairTangent};
use crate::lie::{AlgebraElement, Covector, GroupKind, GroupPoint, LieInstance};
use crate::poisson::{integrate_cocycle, GroupCocycle, TwoCocycle};

/// A point of `Gamma = G x g*`.
#[derive(Clone, Debug)]
pub struct GammaPoint {
    pub g: GroupPoint,
    pub eta: Covector,
}

/// A left-trivialized tangent to `Gamma`.
#[derive(Clone, Debug)]
pub struct GammaTangent {
    pub v: AlgebraElement,
    pub zeta: Covector,
}

impl GammaTangent {
    pub fn stack(&self) -> DVector<f64> {
        let d = self.v.coeffs.len();
        let mut s = DVector::zeros(2 * d);
        s.rows_mut(0, d).copy_from(&self.v.coeffs);
        s.rows_mut(d, d).copy_from(&self.zeta.coeffs);
        s
    }
}

/// The groupoid `G x g*` with its multiplicative 2-form.
pub struct GammaGroupoid {
    pub lambda: TwoCocycle,
    pub chi: GroupCocycle,
}

impl GammaGroupoid {
    pub fn new(lambda: TwoCocycle, chi: GroupCocycle) -> GammaGroupoid {
        assert!(std::ptr::eq(lambda.instance(), chi.instance()), "cocycle instances disagree");
        GammaGroupoid { lambda, chi }
    }

    pub fn instance(&self) -> &'static LieInstance {
        self.lambda.instance()
    }

    /// The underlying affine action model (source/target/multiplication).
    pub fn model(&self) -> AffineModel {
        AffineModel::new(self.lambda.clone(), self.chi.clone())
    }

    /// The 2-form at `p` on two tangents.
    pub fn omega(&self, p: &GammaPoint, t1: &GammaTangent, t2: &GammaTangent) -> f64 {
        t1.zeta.pair(&t2.v) - t2.zeta.pair(&t1.v)
            - p.eta.pair(&t1.v.bracket(&t2.v))
            - self.lambda.eval(&t1.v, &t2.v)
    }

    /// The matrix of the 2-form at `p` in stacked `(v, zeta)` coordinates.
    pub fn omega_matrix(&self, p: &GammaPoint) -> DMatrix<f64> {
        let inst = self.instance();
        let d = inst.dim();
        let mut k = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let (ei, ej) = (inst.basis_element(i), inst.basis_element(j));
                k[(i, j)] = p.eta.pair(&ei.bracket(&ej)) + self.lambda.eval(&ei, &ej);
            }
        }
        let g = inst.gram();
        let mut m = DMatrix::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&(-&k));
        m.view_mut((0, d), (d, d)).copy_from(&(-g.transpose()));
        m.view_mut((d, 0), (d, d)).copy_from(g);
        m
    }

    /// Smallest singular value and condition number of the 2-form matrix.
    pub fn nondegeneracy(&self, p: &GammaPoint) -> (f64, f64) {
        let m = self.omega_matrix(p);
        let sv = m.svd(false, false).singular_values;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for s in sv.iter() {
            lo = lo.min(*s);
            hi = hi.max(*s);
        }
        (lo, hi / lo)
    }

    /// Solve `omega(x, .) = s* dl_v` for the tangent `x`, where
    /// `s* dl_v (w, zeta) = <zeta, v>`.
    pub fn realize(&self, p: &GammaPoint, v: &AlgebraElement) -> Result<GammaTangent> {
        let inst = self.instance();
        let d = inst.dim();
        let m = self.omega_matrix(p);
        let sv = m.clone().svd(false, false).singular_values;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for s in sv.iter() {
            lo = lo.min(*s);
            hi = hi.max(*s);
        }
        if lo < tol::SV_FLOOR {
            return Err(Error::SingularForm { sigma_min: lo });
        }
        if hi / lo > tol::COND_LIMIT {
            return Err(Error::IllConditioned { cond: hi / lo, limit: tol::COND_LIMIT });
        }
        // omega(x, z) = x^T M z must equal r . z with r = (0, G v).
        let mut r = DVector::zeros(2 * d);
        r.rows_mut(d, d).copy_from(&(inst.gram() * &v.coeffs));
        let x = m
            .transpose()
            .lu()
            .solve(&r)
            .ok_or(Error::SingularForm { sigma_min: lo })?;
        Ok(GammaTangent {
            v: inst.alg(x.rows(0, d).into_owned()),
            zeta: inst.covector(x.rows(d, d).into_owned()),
        })
    }

    /// Closed form of the realization: `x = (-v, -ad_star(v, eta) - flat(v))`.
    pub fn realize_closed_form(&self, p: &GammaPoint, v: &AlgebraElement) -> GammaTangent {
        let inst = self.instance();
        let zeta = v.ad_star(&p.eta).add(&self.lambda.flat(v)).scale(-1.0);
        GammaTangent { v: inst.alg(-&v.coeffs), zeta }
    }

    /// Multiplicativity defect of the 2-form on a composable pair:
    /// `pr1* omega + pr2* omega - m* omega` through the simplicial machinery.
    pub fn multiplicativity_defect(
        &self,
        g: &GroupPoint,
        h: &GroupPoint,
        eta: &Covector,
        t1: &(AlgebraElement, AlgebraElement, Covector),
        t2: &(AlgebraElement, AlgebraElement, Covector),
    ) -> f64 {
        let model = self.model();
        let pair = Pair::<AffineModel> { g: g.clone(), h: h.clone(), b: eta.clone() };
        let om = |gg: &GroupPoint, bb: &Covector, a: &(AlgebraElement, Covector), b2: &(AlgebraElement, Covector)| {
            self.omega(
                &GammaPoint { g: gg.clone(), eta: bb.clone() },
                &GammaTangent { v: a.0.clone(), zeta: a.1.clone() },
                &GammaTangent { v: b2.0.clone(), zeta: b2.1.clone() },
            )
        };
        let pt1 = PairTangent::<AffineModel> { v: t1.0.clone(), w: t1.1.clone(), xi: t1.2.clone() };
        let pt2 = PairTangent::<AffineModel> { v: t2.0.clone(), w: t2.1.clone(), xi: t2.2.clone() };
        partial2_2(&model, &om, &pair, &pt1, &pt2)
    }

    /// The fundamental vector field of the Hamiltonian specialization
    /// (`lambda = 0`): `rho(u)|_(g, eta) = (-Ad_{g^-1} u, 0)`.
    pub fn rho(&self, p: &GammaPoint, u: &AlgebraElement) -> GammaTangent {
        assert!(self.lambda.is_zero(), "rho is the lambda = 0 specialization");
        GammaTangent {
            v: p.g.inverse().adjoint(u).scale(-1.0),
            zeta: self.instance().zero_covector(),
        }
    }

    /// The moment function `f_u(g, eta) = <coadjoint(g, eta), u>`.
    pub fn moment_fn(&self, p: &GammaPoint, u: &AlgebraElement) -> f64 {
        assert!(self.lambda.is_zero(), "moment function is the lambda = 0 specialization");
        p.g.coadjoint(&p.eta).pair(u)
    }

    /// `df_u` on a tangent: `<zeta - ad_star(w, eta), Ad_{g^-1} u>`.
    pub fn moment_differential(&self, p: &GammaPoint, u: &AlgebraElement, t: &GammaTangent) -> f64 {
        assert!(self.lambda.is_zero(), "moment differential is the lambda = 0 specialization");
        t.zeta.sub(&t.v.ad_star(&p.eta)).pair(&p.g.inverse().adjoint(u))
    }
}

/// The Heisenberg central extension of the translation plane by the area
/// cocycle, with the level-one reduction identifying the extended cotangent
/// groupoid over the affine Poisson structure downstairs.
pub struct CentralExtension {
    base: &'static LieInstance,
    ext: &'static LieInstance,
    lambda: TwoCocycle,
}

impl CentralExtension {
    pub fn heisenberg_over_plane() -> CentralExtension {
        let base = crate::lie::instance(GroupKind::Abelian2);
        let ext = crate::lie::instance(GroupKind::Heisenberg3);
        CentralExtension { base, ext, lambda: TwoCocycle::area(base) }
    }

    pub fn base(&self) -> &'static LieInstance {
        self.base
    }

    pub fn ext(&self) -> &'static LieInstance {
        self.ext
    }

    pub fn lambda(&self) -> &TwoCocycle {
        &self.lambda
    }

    /// Split an extended algebra element into (base part, center coefficient).
    pub fn split_alg(&self, vt: &AlgebraElement) -> (AlgebraElement, f64) {
        (self.base.alg_from(&[vt.coeffs[0], vt.coeffs[1]]), vt.coeffs[2])
    }

    pub fn join_alg(&self, v: &AlgebraElement, r: f64) -> AlgebraElement {
        self.ext.alg_from(&[v.coeffs[0], v.coeffs[1], r])
    }

    pub fn split_cov(&self, xt: &Covector) -> (Covector, f64) {
        (self.base.covector_from(&[xt.coeffs[0], xt.coeffs[1]]), xt.coeffs[2])
    }

    pub fn join_cov(&self, xi: &Covector, t: f64) -> Covector {
        self.ext.covector_from(&[xi.coeffs[0], xi.coeffs[1], t])
    }

    /// Project an extended group element to the base translation.
    pub fn project_group(&self, h: &GroupPoint) -> GroupPoint {
        let m = h.matrix();
        self.base.exp(&self.base.alg_from(&[m[(0, 1)].re, m[(1, 2)].re]))
    }

    /// Residual between the extension bracket computed with matrices upstairs
    /// and the cocycle form `([v1, v2]_base, lambda(v1, v2))` downstairs.
    pub fn bracket_route_residual(&self, vt1: &AlgebraElement, vt2: &AlgebraElement) -> f64 {
        let upstairs = vt1.bracket(vt2);
        let (v1, _) = self.split_alg(vt1);
        let (v2, _) = self.split_alg(vt2);
        let base_br = v1.bracket(&v2);
        let downstairs = self.join_alg(&base_br, self.lambda.eval(&v1, &v2));
        upstairs.sub(&downstairs).norm()
    }

    /// Extract the base group cocycle from the extension:
    /// `<chi(p(h)), v> = -pr_center(Ad_{h^-1} (v, 0))`.
    pub fn chi_from_extension(&self, h: &GroupPoint) -> Covector {
        let hinv = h.inverse();
        let mut coeffs = DVector::zeros(2);
        for i in 0..2 {
            let lifted = self.join_alg(&self.base.basis_element(i), 0.0);
            let (_, r) = self.split_alg(&hinv.adjoint(&lifted));
            coeffs[i] = -r;
        }
        // coeffs[i] = <chi, e_i> = (G chi)_i, so convert through the Gram.
        let chi = self.base.sharp(&self.base.covector(coeffs));
        self.base.covector(chi.coeffs)
    }

    /// Residuals of the level-set coadjoint bookkeeping at `(h, xi, t)`:
    /// preservation of the center slot, invariance under central translations,
    /// and agreement of the base slot with the affine action downstairs.
    pub fn coadjoint_level_residuals(&self, h: &GroupPoint, xi: &Covector, t_level: f64) -> (f64, f64, f64) {
        let eta_ext = self.join_cov(xi, t_level);
        let moved = h.coadjoint(&eta_ext);
        let (base_part, t_after) = self.split_cov(&moved);

        let t_slot = (t_after - t_level).abs();

        let center = self.ext.exp(&self.ext.basis_element(2).scale(0.37));
        let left = center.mul(h).coadjoint(&eta_ext);
        let right = h.mul(&center).coadjoint(&eta_ext);
        let center_inv = moved.sub(&left).norm().max(moved.sub(&right).norm());

        // Downstairs: the affine action with chi integrating the area cocycle,
        // scaled by the level.
        let chi = integrate_cocycle(&self.lambda).expect("area cocycle integrates on the plane");
        let p = self.project_group(h);
        let affine = p.coadjoint(xi).sub(&chi.eval(&p).scale(t_level));
        let quotient = base_part.sub(&affine).norm();

        (t_slot, center_inv, quotient)
    }

    /// The pseudo-connection 1-form on the level-one slice:
    /// `theta(xi; (vt, zeta)) = <(xi, 1), vt>` in the extended pairing.
    pub fn theta(&self, xi: &Covector, vt: &AlgebraElement) -> f64 {
        self.join_cov(xi, 1.0).pair(vt)
    }

    /// Cartan-formula exterior derivative of `theta` with left-invariant group
    /// extensions and constant dual extensions, by central finite differences,
    /// compared against the base 2-form `omega_Gamma` pulled back through the
    /// projection. Returns the absolute residual.
    pub fn curvature_residual(
        &self,
        h: &GroupPoint,
        xi: &Covector,
        t1: &(AlgebraElement, Covector),
        t2: &(AlgebraElement, Covector),
        fd: f64,
    ) -> f64 {
        let theta_of = |xi_at: &Covector, vt: &AlgebraElement| self.theta(xi_at, vt);
        // Directional derivative of theta(X2) along the flow of X1 (and vice
        // versa): the base point moves as xi + s zeta1, and theta does not
        // depend on the group slot.
        let d1 = (theta_of(&xi.add(&t1.1.scale(fd)), &t2.0) - theta_of(&xi.add(&t1.1.scale(-fd)), &t2.0))
            / (2.0 * fd);
        let d2 = (theta_of(&xi.add(&t2.1.scale(fd)), &t1.0) - theta_of(&xi.add(&t2.1.scale(-fd)), &t1.0))
            / (2.0 * fd);
        let bracket_term = theta_of(xi, &t1.0.bracket(&t2.0));
        let dtheta = d1 - d2 - bracket_term;

        // Pullback of the base form: project the tangents and evaluate at
        // (p(h), xi).
        let (v1, _) = self.split_alg(&t1.0);
        let (v2, _) = self.split_alg(&t2.0);
        let omega_base = t1.1.pair(&v2) - t2.1.pair(&v1)
            - xi.pair(&v1.bracket(&v2))
            - self.lambda.eval(&v1, &v2);
        let _ = h;
        (dtheta - omega_base).abs()
    }

    /// Simplicial differential of `theta` on a composable pair of the extended
    /// groupoid (plain coadjoint action upstairs). Vanishes identically by
    /// the duality of `Ad` and its coadjoint.
    pub fn partial_theta(
        &self,
        gt: &GroupPoint,
        ht: &GroupPoint,
        eta_ext: &Covector,
        t: &(AlgebraElement, AlgebraElement, Covector),
    ) -> f64 {
        let model = AffineModel::new(TwoCocycle::zero(self.ext), GroupCocycle::zero(self.ext));
        let pair = Pair::<AffineModel> { g: gt.clone(), h: ht.clone(), b: eta_ext.clone() };
        let pt = PairTangent::<AffineModel> { v: t.0.clone(), w: t.1.clone(), xi: t.2.clone() };
        let theta_arrow = |_g: &GroupPoint, b: &Covector, v: &AlgebraElement, _zeta: &Covector| b.pair(v);
        crate::groupoid::partial2_1(&model, &theta_arrow, &pair, &pt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::axiom_residuals;
    use crate::lie::instance;
    use crate::sample::{rand_algebra, rand_covector, rand_group, rng_for, TrialRng};

    fn gamma_su2(rng: &mut TrialRng) -> GammaGroupoid {
        let su2 = instance(GroupKind::Su2);
        let lambda = TwoCocycle::exact(su2, &rand_covector(su2, rng));
        let chi = integrate_cocycle(&lambda).unwrap();
        GammaGroupoid::new(lambda, chi)
    }

    fn gamma_area() -> GammaGroupoid {
        let ab = instance(GroupKind::Abelian2);
        let lambda = TwoCocycle::area(ab);
        let chi = integrate_cocycle(&lambda).unwrap();
        GammaGroupoid::new(lambda, chi)
    }

    fn rand_point(gg: &GammaGroupoid, rng: &mut TrialRng) -> GammaPoint {
        let inst = gg.instance();
        GammaPoint { g: rand_group(inst, rng), eta: rand_covector(inst, rng) }
    }

    fn rand_tangent(gg: &GammaGroupoid, rng: &mut TrialRng) -> GammaTangent {
        let inst = gg.instance();
        GammaTangent { v: rand_algebra(inst, rng), zeta: rand_covector(inst, rng) }
    }

    #[test]
    fn omega_matrix_matches_direct_evaluation() {
        let mut rng = rng_for(21, 92, 0);
        for gg in [gamma_su2(&mut rng), gamma_area()] {
            for _ in 0..10 {
                let p = rand_point(&gg, &mut rng);
                let t1 = rand_tangent(&gg, &mut rng);
                let t2 = rand_tangent(&gg, &mut rng);
                let direct = gg.omega(&p, &t1, &t2);
                let via_matrix = t1.stack().dot(&(gg.omega_matrix(&p) * t2.stack()));
                assert!(
                    (direct - via_matrix).abs() < 1e-12,
                    "matrix form residual {:.3e}",
                    (direct - via_matrix).abs()
                );
                // antisymmetry
                assert!((gg.omega(&p, &t2, &t1) + direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn realization_solve_matches_closed_form_and_defining_property() {
        let mut rng = rng_for(22, 92, 1);
        for gg in [gamma_su2(&mut rng), gamma_area()] {
            for _ in 0..10 {
                let p = rand_point(&gg, &mut rng);
                let v = rand_algebra(gg.instance(), &mut rng);
                let x = gg.realize(&p, &v).unwrap();
                let cf = gg.realize_closed_form(&p, &v);
                let diff = x.v.sub(&cf.v).norm().max(x.zeta.sub(&cf.zeta).norm());
                assert!(diff < 1e-12, "closed-form residual {:.3e}", diff);
                for _ in 0..3 {
                    let z = rand_tangent(&gg, &mut rng);
                    let lhs = gg.omega(&p, &x, &z);
                    let rhs = z.zeta.pair(&v);
                    assert!((lhs - rhs).abs() < 1e-12, "defining property residual {:.3e}", (lhs - rhs).abs());
                }
            }
        }
    }

    #[test]
    fn source_map_pulls_back_the_affine_bracket() {
        let mut rng = rng_for(23, 92, 2);
        for gg in [gamma_su2(&mut rng), gamma_area()] {
            for _ in 0..10 {
                let p = rand_point(&gg, &mut rng);
                let v1 = rand_algebra(gg.instance(), &mut rng);
                let v2 = rand_algebra(gg.instance(), &mut rng);
                let x1 = gg.realize(&p, &v1).unwrap();
                let x2 = gg.realize(&p, &v2).unwrap();
                let bracket = p.eta.pair(&v1.bracket(&v2)) + gg.lambda.eval(&v1, &v2);
                let err = (gg.omega(&p, &x1, &x2) - bracket).abs();
                assert!(err < 1e-12, "realization bracket residual {:.3e}", err);
            }
        }
    }

    #[test]
    fn omega_is_multiplicative_and_the_negative_control_is_not() {
        let mut rng = rng_for(24, 92, 3);
        for gg in [gamma_su2(&mut rng), gamma_area()] {
            let inst = gg.instance();
            let mut control_worst: f64 = 0.0;
            for _ in 0..10 {
                let g = rand_group(inst, &mut rng);
                let h = rand_group(inst, &mut rng);
                let eta = rand_covector(inst, &mut rng);
                let t1 = (rand_algebra(inst, &mut rng), rand_algebra(inst, &mut rng), rand_covector(inst, &mut rng));
                let t2 = (rand_algebra(inst, &mut rng), rand_algebra(inst, &mut rng), rand_covector(inst, &mut rng));
                let defect = gg.multiplicativity_defect(&g, &h, &eta, &t1, &t2);
                assert!(defect.abs() < 1e-12, "{} multiplicativity defect {:.3e}", inst.name(), defect.abs());

                // Wrong-sign control: flipping the cocycle term breaks it.
                let model = gg.model();
                let pair = Pair::<AffineModel> { g, h, b: eta };
                let bad = |gg2: &GroupPoint, bb: &Covector, a: &(AlgebraElement, Covector), b2: &(AlgebraElement, Covector)| {
                    let p = GammaPoint { g: gg2.clone(), eta: bb.clone() };
                    let ta = GammaTangent { v: a.0.clone(), zeta: a.1.clone() };
                    let tb = GammaTangent { v: b2.0.clone(), zeta: b2.1.clone() };
                    gg.omega(&p, &ta, &tb) + 2.0 * gg.lambda.eval(&ta.v, &tb.v)
                };
                let pt1 = PairTangent::<AffineModel> { v: t1.0, w: t1.1, xi: t1.2 };
                let pt2 = PairTangent::<AffineModel> { v: t2.0, w: t2.1, xi: t2.2 };
                control_worst = control_worst.max(partial2_2(&model, &bad, &pair, &pt1, &pt2).abs());
            }
            assert!(control_worst > 1e-3, "{} wrong-sign control too small: {:.3e}", inst.name(), control_worst);
        }
    }

    #[test]
    fn form_is_nondegenerate_at_random_points() {
        let mut rng = rng_for(25, 92, 4);
        for gg in [gamma_su2(&mut rng), gamma_area()] {
            for _ in 0..10 {
                let p = rand_point(&gg, &mut rng);
                let (sigma_min, cond) = gg.nondegeneracy(&p);
                assert!(sigma_min > 1e-8, "sigma_min {:.3e}", sigma_min);
                assert!(cond < 1e6, "cond {:.3e}", cond);
            }
        }
    }

    #[test]
    fn hamiltonian_moment_identity_holds_when_lambda_vanishes() {
        let mut rng = rng_for(26, 92, 5);
        let su2 = instance(GroupKind::Su2);
        let gg = GammaGroupoid::new(TwoCocycle::zero(su2), GroupCocycle::zero(su2));
        for _ in 0..20 {
            let p = rand_point(&gg, &mut rng);
            let u = rand_algebra(su2, &mut rng);
            let t = rand_tangent(&gg, &mut rng);
            let lhs = gg.omega(&p, &gg.rho(&p, &u), &t);
            let rhs = gg.moment_differential(&p, &u, &t);
            assert!((lhs - rhs).abs() < 1e-12, "moment identity residual {:.3e}", (lhs - rhs).abs());
        }
    }

    #[test]
    fn moment_fn_differential_matches_finite_differences() {
        let mut rng = rng_for(27, 92, 6);
        let su2 = instance(GroupKind::Su2);
        let gg = GammaGroupoid::new(TwoCocycle::zero(su2), GroupCocycle::zero(su2));
        let fd = 1e-5;
        for _ in 0..10 {
            let p = rand_point(&gg, &mut rng);
            let u = rand_algebra(su2, &mut rng);
            let t = rand_tangent(&gg, &mut rng);
            let at = |s: f64| {
                let q = GammaPoint {
                    g: p.g.mul(&su2.exp(&t.v.scale(s))),
                    eta: p.eta.add(&t.zeta.scale(s)),
                };
                gg.moment_fn(&q, &u)
            };
            let fd_val = (at(fd) - at(-fd)) / (2.0 * fd);
            let err = (fd_val - gg.moment_differential(&p, &u, &t)).abs();
            assert!(err < 1e-7, "moment differential FD residual {:.3e}", err);
        }
    }

    #[test]
    fn affine_groupoid_axioms_hold_on_gamma() {
        let mut rng = rng_for(28, 92, 7);
        let gg = gamma_su2(&mut rng);
        let model = gg.model();
        let inst = gg.instance();
        for _ in 0..5 {
            let r = axiom_residuals(
                &model,
                &rand_group(inst, &mut rng),
                &rand_group(inst, &mut rng),
                &rand_group(inst, &mut rng),
                &rand_covector(inst, &mut rng),
            );
            assert!(r.max() < 1e-12, "axiom residual {:.3e}", r.max());
        }
    }

    #[test]
    fn extension_bracket_routes_agree() {
        let mut rng = rng_for(29, 92, 8);
        let ce = CentralExtension::heisenberg_over_plane();
        for _ in 0..20 {
            let vt1 = rand_algebra(ce.ext(), &mut rng);
            let vt2 = rand_algebra(ce.ext(), &mut rng);
            let r = ce.bracket_route_residual(&vt1, &vt2);
            assert!(r < 1e-13, "bracket route residual {:.3e}", r);
        }
    }

    #[test]
    fn extension_recovers_the_area_cocycle_chi() {
        let mut rng = rng_for(30, 92, 9);
        let ce = CentralExtension::heisenberg_over_plane();
        let chi = integrate_cocycle(ce.lambda()).unwrap();
        for _ in 0..20 {
            let h = rand_group(ce.ext(), &mut rng);
            let from_ext = ce.chi_from_extension(&h);
            let downstairs = chi.eval(&ce.project_group(&h));
            let r = from_ext.sub(&downstairs).norm();
            assert!(r < 1e-13, "chi extraction residual {:.3e}", r);
        }
    }

    #[test]
    fn coadjoint_level_bookkeeping_is_exact() {
        let mut rng = rng_for(31, 92, 10);
        let ce = CentralExtension::heisenberg_over_plane();
        for _ in 0..20 {
            let h = rand_group(ce.ext(), &mut rng);
            let xi = rand_covector(ce.base(), &mut rng);
            let (t_slot, center_inv, quotient) = ce.coadjoint_level_residuals(&h, &xi, 1.0);
            assert!(t_slot < 1e-13, "t-slot residual {:.3e}", t_slot);
            assert!(center_inv < 1e-13, "center invariance residual {:.3e}", center_inv);
            assert!(quotient < 1e-13, "quotient action residual {:.3e}", quotient);
            // Other levels scale the cocycle part linearly.
            let (ts2, ci2, q2) = ce.coadjoint_level_residuals(&h, &xi, -2.5);
            assert!(ts2 < 1e-13 && ci2 < 1e-13 && q2 < 1e-12);
        }
    }

    #[test]
    fn pseudo_connection_curvature_is_the_base_form() {
        let mut rng = rng_for(32, 92, 11);
        let ce = CentralExtension::heisenberg_over_plane();
        for _ in 0..20 {
            let h = rand_group(ce.ext(), &mut rng);
            let xi = rand_covector(ce.base(), &mut rng);
            let t1 = (rand_algebra(ce.ext(), &mut rng), rand_covector(ce.base(), &mut rng));
            let t2 = (rand_algebra(ce.ext(), &mut rng), rand_covector(ce.base(), &mut rng));
            let r = ce.curvature_residual(&h, &xi, &t1, &t2, 1e-4);
            assert!(r < 1e-9, "curvature residual {:.3e}", r);
        }
    }

    #[test]
    fn pseudo_connection_is_simplicially_closed() {
        let mut rng = rng_for(33, 92, 12);
        let ce = CentralExtension::heisenberg_over_plane();
        for _ in 0..20 {
            let gt = rand_group(ce.ext(), &mut rng);
            let ht = rand_group(ce.ext(), &mut rng);
            let eta = ce.join_cov(&rand_covector(ce.base(), &mut rng), 1.0);
            let t = (
                rand_algebra(ce.ext(), &mut rng),
                rand_algebra(ce.ext(), &mut rng),
                ce.join_cov(&rand_covector(ce.base(), &mut rng), 0.0),
            );
            let r = ce.partial_theta(&gt, &ht, &eta, &t).abs();
            assert!(r < 1e-13, "partial theta residual {:.3e}", r);
        }
    }
}
