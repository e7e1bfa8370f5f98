//! Action groupoids over a left action, with the simplicial differential on
//! low-degree nerve forms and a finite-difference exterior derivative on flat
//! base spaces.
//!
//! An arrow is a pair `(g, b)` with source `b` and target `g . b`; arrows
//! compose as `(g, h . b) (h, b) = (g h, b)`. Tangents are left-trivialized in
//! the group slot: the pair `(v, xi)` stands for the curve
//! `t -> (g exp(t v), b + t xi)`. A composable pair is parametrized by
//! `(g, h, b)` carrying the tangent `(v, w, xi)`, and its three faces are
//!
//! * `pr1 = (g, h . b)` with tangent `(v, act_push(h, b, w, xi))`,
//! * `pr2 = (h, b)` with tangent `(w, xi)`,
//! * `m = (g h, b)` with tangent `(Ad_{h^-1} v + w, xi)`.
//!
//! The simplicial differential of an arrow form is
//! `(partial f)(pair) = pr1* f + pr2* f - m* f`, and of a base form
//! `(partial f)(arrow) = s* f - t* f`; these compose to zero.

use crate::lie::{AlgebraElement, Covector, GroupPoint};
use crate::poisson::{GroupCocycle, TwoCocycle};

/// A left action of a group-like object on a base, with enough tangent
/// structure to push curves through the action.
pub trait ActionModel {
    /// Group element.
    type G: Clone;
    /// Base point.
    type B: Clone;
    /// Left-trivialized group tangent.
    type TG: Clone;
    /// Base tangent.
    type TB: Clone;

    fn act(&self, g: &Self::G, b: &Self::B) -> Self::B;
    fn compose(&self, g: &Self::G, h: &Self::G) -> Self::G;
    fn identity_g(&self) -> Self::G;
    fn inverse_g(&self, g: &Self::G) -> Self::G;
    /// `d/dt|_0 (h exp(t w)) . (b + t xi)`.
    fn act_push(&self, h: &Self::G, b: &Self::B, w: &Self::TG, xi: &Self::TB) -> Self::TB;
    /// `Ad_{h^-1} v`.
    fn ad_inv(&self, h: &Self::G, v: &Self::TG) -> Self::TG;
    fn tg_add(&self, a: &Self::TG, b: &Self::TG) -> Self::TG;
    fn g_dist(&self, a: &Self::G, b: &Self::G) -> f64;
    fn b_dist(&self, a: &Self::B, b: &Self::B) -> f64;
}

/// Tangent to a composable pair `(g, h, b)`.
#[derive(Clone, Debug)]
pub struct PairTangent<M: ActionModel> {
    pub v: M::TG,
    pub w: M::TG,
    pub xi: M::TB,
}

/// A composable pair of arrows, `((g, h . b), (h, b))`.
pub struct Pair<M: ActionModel> {
    pub g: M::G,
    pub h: M::G,
    pub b: M::B,
}

impl<M: ActionModel> Pair<M> {
    /// Face arrows `(pr1, pr2, m)` as `(group part, base point)`.
    pub fn face_points(&self, model: &M) -> [(M::G, M::B); 3] {
        [
            (self.g.clone(), model.act(&self.h, &self.b)),
            (self.h.clone(), self.b.clone()),
            (model.compose(&self.g, &self.h), self.b.clone()),
        ]
    }

    /// Pushforward of a pair tangent through the three faces.
    pub fn face_tangents(&self, model: &M, t: &PairTangent<M>) -> [(M::TG, M::TB); 3] {
        [
            (t.v.clone(), model.act_push(&self.h, &self.b, &t.w, &t.xi)),
            (t.w.clone(), t.xi.clone()),
            (model.tg_add(&model.ad_inv(&self.h, &t.v), &t.w), t.xi.clone()),
        ]
    }
}

/// `(partial f)(g, b) = f(s) - f(t)` for a base 0-form.
pub fn partial_base0<M: ActionModel>(
    model: &M,
    f: &dyn Fn(&M::B) -> f64,
    g: &M::G,
    b: &M::B,
) -> f64 {
    f(b) - f(&model.act(g, b))
}

/// `(partial alpha)(arrow tangent) = alpha(s* .) - alpha(t* .)` for a base 1-form.
pub fn partial_base1<M: ActionModel>(
    model: &M,
    alpha: &dyn Fn(&M::B, &M::TB) -> f64,
    g: &M::G,
    b: &M::B,
    v: &M::TG,
    xi: &M::TB,
) -> f64 {
    alpha(b, xi) - alpha(&model.act(g, b), &model.act_push(g, b, v, xi))
}

/// `(partial f)(pair) = f(pr1) + f(pr2) - f(m)` for an arrow 0-form.
pub fn partial2_0<M: ActionModel>(model: &M, f: &dyn Fn(&M::G, &M::B) -> f64, pair: &Pair<M>) -> f64 {
    let pts = pair.face_points(model);
    f(&pts[0].0, &pts[0].1) + f(&pts[1].0, &pts[1].1) - f(&pts[2].0, &pts[2].1)
}

/// Simplicial differential of an arrow 1-form on a composable pair.
pub fn partial2_1<M: ActionModel>(
    model: &M,
    alpha: &dyn Fn(&M::G, &M::B, &M::TG, &M::TB) -> f64,
    pair: &Pair<M>,
    t: &PairTangent<M>,
) -> f64 {
    let pts = pair.face_points(model);
    let tans = pair.face_tangents(model, t);
    alpha(&pts[0].0, &pts[0].1, &tans[0].0, &tans[0].1)
        + alpha(&pts[1].0, &pts[1].1, &tans[1].0, &tans[1].1)
        - alpha(&pts[2].0, &pts[2].1, &tans[2].0, &tans[2].1)
}

/// Simplicial differential of an arrow 2-form on a composable pair: the
/// multiplicativity defect of the form.
pub fn partial2_2<M: ActionModel>(
    model: &M,
    omega: &dyn Fn(&M::G, &M::B, &(M::TG, M::TB), &(M::TG, M::TB)) -> f64,
    pair: &Pair<M>,
    t1: &PairTangent<M>,
    t2: &PairTangent<M>,
) -> f64 {
    let pts = pair.face_points(model);
    let a = pair.face_tangents(model, t1);
    let b = pair.face_tangents(model, t2);
    omega(&pts[0].0, &pts[0].1, &a[0], &b[0]) + omega(&pts[1].0, &pts[1].1, &a[1], &b[1])
        - omega(&pts[2].0, &pts[2].1, &a[2], &b[2])
}

/// Residuals of the groupoid axioms at sampled elements.
#[derive(Clone, Copy, Debug)]
pub struct AxiomResiduals {
    /// `g . (h . b)` vs `(g h) . b`.
    pub action_law: f64,
    /// `(g1 g2) g3` vs `g1 (g2 g3)`.
    pub associativity: f64,
    /// `e g = g e = g` and `e . b = b`.
    pub identity: f64,
    /// `g g^-1 = g^-1 g = e` and `g^-1 . (g . b) = b`.
    pub inverse: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.action_law.max(self.associativity).max(self.identity).max(self.inverse)
    }
}

pub fn axiom_residuals<M: ActionModel>(
    model: &M,
    g1: &M::G,
    g2: &M::G,
    g3: &M::G,
    b: &M::B,
) -> AxiomResiduals {
    let action_law = model.b_dist(
        &model.act(g1, &model.act(g2, b)),
        &model.act(&model.compose(g1, g2), b),
    );
    let associativity = model.g_dist(
        &model.compose(&model.compose(g1, g2), g3),
        &model.compose(g1, &model.compose(g2, g3)),
    );
    let e = model.identity_g();
    let identity = model
        .g_dist(&model.compose(&e, g1), g1)
        .max(model.g_dist(&model.compose(g1, &e), g1))
        .max(model.b_dist(&model.act(&e, b), b));
    let ginv = model.inverse_g(g1);
    let inverse = model
        .g_dist(&model.compose(g1, &ginv), &e)
        .max(model.g_dist(&model.compose(&ginv, g1), &e))
        .max(model.b_dist(&model.act(&ginv, &model.act(g1, b)), b));
    AxiomResiduals { action_law, associativity, identity, inverse }
}

/// The affine coadjoint action model: `g . xi = coadjoint(g, xi) - chi(g)` on
/// the dual, with tangent pushforward
/// `act_push(h, eta, w, xi) = coadjoint(h, xi - ad_star(w, eta) - flat(w))`.
pub struct AffineModel {
    pub lambda: TwoCocycle,
    pub chi: GroupCocycle,
}

impl AffineModel {
    pub fn new(lambda: TwoCocycle, chi: GroupCocycle) -> AffineModel {
        assert!(
            std::ptr::eq(lambda.instance(), chi.instance()),
            "cocycle instances disagree"
        );
        AffineModel { lambda, chi }
    }
}

impl ActionModel for AffineModel {
    type G = GroupPoint;
    type B = Covector;
    type TG = AlgebraElement;
    type TB = Covector;

    fn act(&self, g: &GroupPoint, b: &Covector) -> Covector {
        self.chi.affine_action(g, b)
    }

    fn compose(&self, g: &GroupPoint, h: &GroupPoint) -> GroupPoint {
        g.mul(h)
    }

    fn identity_g(&self) -> GroupPoint {
        self.lambda.instance().identity()
    }

    fn inverse_g(&self, g: &GroupPoint) -> GroupPoint {
        g.inverse()
    }

    fn act_push(&self, h: &GroupPoint, b: &Covector, w: &AlgebraElement, xi: &Covector) -> Covector {
        h.coadjoint(&xi.sub(&w.ad_star(b)).sub(&self.lambda.flat(w)))
    }

    fn ad_inv(&self, h: &GroupPoint, v: &AlgebraElement) -> AlgebraElement {
        h.inverse().adjoint(v)
    }

    fn tg_add(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        a.add(b)
    }

    fn g_dist(&self, a: &GroupPoint, b: &GroupPoint) -> f64 {
        (a.matrix() - b.matrix()).norm()
    }

    fn b_dist(&self, a: &Covector, b: &Covector) -> f64 {
        a.sub(b).norm()
    }
}

/// A point of a flat space where tangents can be added to points, enabling
/// finite-difference exterior calculus with constant-direction extensions.
pub trait FlatPoint: Clone {
    type Tangent: Clone;
    fn offset(&self, dir: &Self::Tangent, amount: f64) -> Self;
}

impl FlatPoint for Covector {
    type Tangent = Covector;
    fn offset(&self, dir: &Covector, amount: f64) -> Covector {
        self.add(&dir.scale(amount))
    }
}

/// A differential form on a flat space, evaluated pointwise on tangent tuples.
pub struct FlatForm<'a, P: FlatPoint> {
    degree: usize,
    eval: Box<dyn Fn(&P, &[&P::Tangent]) -> f64 + 'a>,
}

impl<'a, P: FlatPoint> FlatForm<'a, P> {
    pub fn new(degree: usize, eval: impl Fn(&P, &[&P::Tangent]) -> f64 + 'a) -> Self {
        FlatForm { degree, eval: Box::new(eval) }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, p: &P, args: &[&P::Tangent]) -> f64 {
        assert_eq!(args.len(), self.degree, "form arity mismatch");
        (self.eval)(p, args)
    }

    /// Finite-difference exterior derivative with constant-direction tangent
    /// extensions: on a flat space these commute, so no bracket terms appear.
    pub fn d(&'a self, h: f64) -> FlatForm<'a, P> {
        let q = self.degree;
        FlatForm::new(q + 1, move |p: &P, args: &[&P::Tangent]| {
            let mut total = 0.0;
            for i in 0..=q {
                let rest: Vec<&P::Tangent> =
                    args.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, t)| *t).collect();
                let plus = (self.eval)(&p.offset(args[i], h), &rest);
                let minus = (self.eval)(&p.offset(args[i], -h), &rest);
                let deriv = (plus - minus) / (2.0 * h);
                total += if i % 2 == 0 { deriv } else { -deriv };
            }
            total
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{instance, GroupKind};
    use crate::poisson::{integrate_cocycle, TwoCocycle};
    use crate::sample::{rand_algebra, rand_covector, rand_group, rng_for};

    fn su2_model(rng: &mut crate::sample::TrialRng) -> AffineModel {
        let su2 = instance(GroupKind::Su2);
        let lambda = TwoCocycle::exact(su2, &rand_covector(su2, rng));
        let chi = integrate_cocycle(&lambda).unwrap();
        AffineModel::new(lambda, chi)
    }

    fn abelian_model() -> AffineModel {
        let ab = instance(GroupKind::Abelian2);
        let lambda = TwoCocycle::area(ab);
        let chi = integrate_cocycle(&lambda).unwrap();
        AffineModel::new(lambda, chi)
    }

    #[test]
    fn affine_model_satisfies_groupoid_axioms() {
        let mut rng = rng_for(11, 91, 0);
        let models = [su2_model(&mut rng), abelian_model()];
        for model in &models {
            let inst = model.lambda.instance();
            for _ in 0..10 {
                let (g1, g2, g3) = (
                    rand_group(inst, &mut rng),
                    rand_group(inst, &mut rng),
                    rand_group(inst, &mut rng),
                );
                let b = rand_covector(inst, &mut rng);
                let r = axiom_residuals(model, &g1, &g2, &g3, &b);
                assert!(r.max() < 1e-12, "{} axiom residual {:.3e}", inst.name(), r.max());
            }
        }
    }

    #[test]
    fn act_push_matches_finite_differences() {
        let mut rng = rng_for(12, 91, 1);
        let fd = 1e-5;
        let models = [su2_model(&mut rng), abelian_model()];
        for model in &models {
            let inst = model.lambda.instance();
            for _ in 0..10 {
                let h = rand_group(inst, &mut rng);
                let b = rand_covector(inst, &mut rng);
                let w = rand_algebra(inst, &mut rng);
                let xi = rand_covector(inst, &mut rng);
                let plus = model.act(&h.mul(&inst.exp(&w.scale(fd))), &b.add(&xi.scale(fd)));
                let minus = model.act(&h.mul(&inst.exp(&w.scale(-fd))), &b.add(&xi.scale(-fd)));
                let fd_push = plus.sub(&minus).scale(1.0 / (2.0 * fd));
                let err = fd_push.sub(&model.act_push(&h, &b, &w, &xi)).norm();
                assert!(err < 1e-7, "{} act_push FD residual {:.3e}", inst.name(), err);
            }
        }
    }

    #[test]
    fn simplicial_differential_squares_to_zero_on_point_functions() {
        let mut rng = rng_for(13, 91, 2);
        let model = su2_model(&mut rng);
        let inst = model.lambda.instance();
        // A nonlinear base function.
        let f = |b: &Covector| (b.coeffs[0] * b.coeffs[1]).sin() + b.coeffs[2].powi(3);
        for _ in 0..10 {
            let pair = Pair::<AffineModel> {
                g: rand_group(inst, &mut rng),
                h: rand_group(inst, &mut rng),
                b: rand_covector(inst, &mut rng),
            };
            let pf = |g: &GroupPoint, b: &Covector| partial_base0(&model, &f, g, b);
            let dd = partial2_0(&model, &pf, &pair);
            assert!(dd.abs() < 1e-12, "partial^2 on 0-forms = {:.3e}", dd);
        }
    }

    #[test]
    fn simplicial_differential_squares_to_zero_on_one_forms() {
        let mut rng = rng_for(14, 91, 3);
        let model = su2_model(&mut rng);
        let inst = model.lambda.instance();
        // A base 1-form with nonconstant coefficients.
        let alpha = |b: &Covector, t: &Covector| {
            (1.0 + b.coeffs[0].cos()) * t.coeffs[1] + b.coeffs[2] * t.coeffs[0]
        };
        for _ in 0..10 {
            let pair = Pair::<AffineModel> {
                g: rand_group(inst, &mut rng),
                h: rand_group(inst, &mut rng),
                b: rand_covector(inst, &mut rng),
            };
            let t = PairTangent::<AffineModel> {
                v: rand_algebra(inst, &mut rng),
                w: rand_algebra(inst, &mut rng),
                xi: rand_covector(inst, &mut rng),
            };
            let pa = |g: &GroupPoint, b: &Covector, v: &AlgebraElement, xi: &Covector| {
                partial_base1(&model, &alpha, g, b, v, xi)
            };
            let dd = partial2_1(&model, &pa, &pair, &t);
            assert!(dd.abs() < 1e-12, "partial^2 on 1-forms = {:.3e}", dd);
        }
    }

    #[test]
    fn flat_exterior_derivative_is_nilpotent_to_truncation_order() {
        let mut rng = rng_for(15, 91, 4);
        let inst = instance(GroupKind::Su2);
        let alpha = FlatForm::new(1, |p: &Covector, ts: &[&Covector]| {
            (p.coeffs[0] * p.coeffs[2]).sin() * ts[0].coeffs[1] + p.coeffs[1].powi(2) * ts[0].coeffs[0]
        });
        let h = 1e-4;
        let da = alpha.d(h);
        let dda = da.d(h);
        for _ in 0..5 {
            let p = rand_covector(inst, &mut rng);
            let t1 = rand_covector(inst, &mut rng);
            let t2 = rand_covector(inst, &mut rng);
            let t3 = rand_covector(inst, &mut rng);
            let v = dda.eval(&p, &[&t1, &t2, &t3]);
            assert!(v.abs() < 1e-5, "d(d alpha) residual {:.3e}", v.abs());
        }
    }

    #[test]
    fn flat_exterior_derivative_matches_analytic_gradient() {
        let mut rng = rng_for(16, 91, 5);
        let inst = instance(GroupKind::Su2);
        // f(p) = sin(p0) p1: df = cos(p0) p1 dp0 + sin(p0) dp1.
        let f = FlatForm::new(0, |p: &Covector, _: &[&Covector]| p.coeffs[0].sin() * p.coeffs[1]);
        let df = f.d(1e-5);
        for _ in 0..5 {
            let p = rand_covector(inst, &mut rng);
            let t = rand_covector(inst, &mut rng);
            let expect = p.coeffs[0].cos() * p.coeffs[1] * t.coeffs[0] + p.coeffs[0].sin() * t.coeffs[1];
            let err = (df.eval(&p, &[&t]) - expect).abs();
            assert!(err < 1e-9, "gradient residual {:.3e}", err);
        }
    }
}
