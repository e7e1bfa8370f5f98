//! Affine Poisson structures on the dual of a Lie algebra.
//!
//! The data is a Lie-algebra 2-cocycle `lambda` and, when one exists, an
//! integrating group 1-cocycle `chi`. Conventions:
//!
//! * the affine bracket of linear functions is
//!   `{l_v1, l_v2}(xi) = <xi, [v1, v2]> + lambda(v1, v2)`, with constants
//!   central, so its Jacobi defect is the cyclic sum
//!   `lambda([v1, v2], v3) + lambda([v2, v3], v1) + lambda([v3, v1], v2)`;
//! * `flat` is the map `<flat(u), w> = lambda(u, w)`;
//! * `chi` obeys the left cocycle law `chi(g h) = coadjoint(g, chi(h)) + chi(g)`
//!   and differentiates to `flat` at the identity;
//! * the affine action is `g . xi = coadjoint(g, xi) - chi(g)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, Covector, GroupKind, GroupPoint, LieInstance};

/// An antisymmetric 2-cocycle on the algebra, stored as the matrix
/// `l[(i, j)] = lambda(e_i, e_j)`.
#[derive(Clone, Debug)]
pub struct TwoCocycle {
    inst: &'static LieInstance,
    l: DMatrix<f64>,
}

impl TwoCocycle {
    /// Validating constructor: panics unless `l` is antisymmetric and satisfies
    /// the cocycle identity to rounding accuracy.
    pub fn new(inst: &'static LieInstance, l: DMatrix<f64>) -> TwoCocycle {
        let c = TwoCocycle::new_unchecked(inst, l);
        let anti = c.antisymmetry_residual();
        assert!(anti < 1e-12, "2-cocycle matrix is not antisymmetric (residual {anti:.3e})");
        let coc = c.cocycle_residual();
        assert!(coc < 1e-12, "cocycle identity fails (residual {coc:.3e})");
        c
    }

    /// Unvalidated constructor, for negative controls that deliberately break
    /// the cocycle conditions.
    pub fn new_unchecked(inst: &'static LieInstance, l: DMatrix<f64>) -> TwoCocycle {
        assert_eq!(l.nrows(), inst.dim());
        assert_eq!(l.ncols(), inst.dim());
        TwoCocycle { inst, l }
    }

    pub fn zero(inst: &'static LieInstance) -> TwoCocycle {
        TwoCocycle { inst, l: DMatrix::zeros(inst.dim(), inst.dim()) }
    }

    /// The area cocycle on the translation plane: `lambda(e_1, e_2) = 1`.
    pub fn area(inst: &'static LieInstance) -> TwoCocycle {
        assert_eq!(inst.kind(), GroupKind::Abelian2, "area cocycle lives on the translation plane");
        let mut l = DMatrix::zeros(2, 2);
        l[(0, 1)] = 1.0;
        l[(1, 0)] = -1.0;
        TwoCocycle::new(inst, l)
    }

    /// The exact cocycle `lambda(u, v) = <xi0, [u, v]>`.
    pub fn exact(inst: &'static LieInstance, xi0: &Covector) -> TwoCocycle {
        let d = inst.dim();
        let mut l = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                l[(i, j)] = xi0.pair(&inst.basis_element(i).bracket(&inst.basis_element(j)));
            }
        }
        TwoCocycle::new(inst, l)
    }

    pub fn instance(&self) -> &'static LieInstance {
        self.inst
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn is_zero(&self) -> bool {
        self.l.norm() == 0.0
    }

    pub fn eval(&self, u: &AlgebraElement, v: &AlgebraElement) -> f64 {
        u.coeffs.dot(&(&self.l * &v.coeffs))
    }

    /// `flat(u)` with `<flat(u), w> = lambda(u, w)`.
    pub fn flat(&self, u: &AlgebraElement) -> Covector {
        // Coefficients solve G x = L^T u (the built-in Grams are symmetric);
        // sharp already solves against the Gram, so reuse it.
        let rhs: DVector<f64> = self.l.transpose() * &u.coeffs;
        let coeffs = self.inst.sharp(&self.inst.covector(rhs)).coeffs;
        self.inst.covector(coeffs)
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        (&self.l + self.l.transpose()).norm()
    }

    /// Max defect of `lambda(e_i, [e_j, e_k]) + cyclic = 0` over basis triples.
    pub fn cocycle_residual(&self) -> f64 {
        let d = self.inst.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (ei, ej, ek) = (
                        self.inst.basis_element(i),
                        self.inst.basis_element(j),
                        self.inst.basis_element(k),
                    );
                    let s = self.eval(&ei, &ej.bracket(&ek))
                        + self.eval(&ej, &ek.bracket(&ei))
                        + self.eval(&ek, &ei.bracket(&ej));
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }
}

/// How an integrating group cocycle is realized.
#[derive(Clone, Debug)]
enum ChiKind {
    /// Identically zero (integrates the zero cocycle).
    Zero,
    /// On the translation plane: `chi(g) = flat(log g)`, single-valued because
    /// the group is the plane itself.
    Linear(TwoCocycle),
    /// Coboundary: `chi(g) = xi0 - coadjoint(g, xi0)`.
    Coboundary(Covector),
}

/// A group 1-cocycle `chi: G -> g*` for the left coadjoint action.
#[derive(Clone, Debug)]
pub struct GroupCocycle {
    inst: &'static LieInstance,
    kind: ChiKind,
}

impl GroupCocycle {
    pub fn zero(inst: &'static LieInstance) -> GroupCocycle {
        GroupCocycle { inst, kind: ChiKind::Zero }
    }

    /// The coboundary cocycle `chi(g) = xi0 - coadjoint(g, xi0)`.
    pub fn coboundary(xi0: &Covector) -> GroupCocycle {
        GroupCocycle { inst: xi0.instance(), kind: ChiKind::Coboundary(xi0.clone()) }
    }

    pub fn instance(&self) -> &'static LieInstance {
        self.inst
    }

    pub fn eval(&self, g: &GroupPoint) -> Covector {
        assert!(std::ptr::eq(g.instance(), self.inst), "instance mismatch");
        match &self.kind {
            ChiKind::Zero => self.inst.zero_covector(),
            ChiKind::Linear(lambda) => {
                let m = g.matrix();
                let log = self.inst.alg_from(&[m[(0, 2)].re, m[(1, 2)].re]);
                lambda.flat(&log)
            }
            ChiKind::Coboundary(xi0) => xi0.sub(&g.coadjoint(xi0)),
        }
    }

    /// The affine action `g . xi = coadjoint(g, xi) - chi(g)`.
    pub fn affine_action(&self, g: &GroupPoint, xi: &Covector) -> Covector {
        g.coadjoint(xi).sub(&self.eval(g))
    }

    /// Defect of the cocycle law `chi(g h) = coadjoint(g, chi(h)) + chi(g)`.
    pub fn cocycle_law_residual(&self, g: &GroupPoint, h: &GroupPoint) -> f64 {
        let lhs = self.eval(&g.mul(h));
        let rhs = g.coadjoint(&self.eval(h)).add(&self.eval(g));
        lhs.sub(&rhs).norm()
    }
}

/// Integrate a 2-cocycle to a built-in group cocycle, or explain why none of
/// the built-in families applies.
pub fn integrate_cocycle(lambda: &TwoCocycle) -> Result<GroupCocycle> {
    let inst = lambda.instance();
    if lambda.is_zero() {
        return Ok(GroupCocycle::zero(inst));
    }
    match inst.kind() {
        GroupKind::Su2 | GroupKind::So3 => {
            // Solve lambda(e_i, e_j) = <xi0, [e_i, e_j]> for xi0: every cocycle
            // on these algebras is exact, so the residual is rounding-level.
            let d = inst.dim();
            let pairs: Vec<(usize, usize)> =
                (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect();
            let mut a = DMatrix::zeros(pairs.len(), d);
            let mut b = DVector::zeros(pairs.len());
            // Row equation for the unknown m = G xi0: sum_k m_k [e_i, e_j]_k = lambda_ij.
            for (row, &(i, j)) in pairs.iter().enumerate() {
                let br = inst.basis_element(i).bracket(&inst.basis_element(j));
                for k in 0..d {
                    a[(row, k)] = br.coeffs[k];
                }
                b[row] = lambda.matrix()[(i, j)];
            }
            let svd = a.clone().svd(true, true);
            let m = svd
                .solve(&b, 1e-13)
                .map_err(|e| Error::UnsupportedCocycle { instance: inst.name(), obstruction: e.to_string() })?;
            let res = (&a * &m - &b).norm();
            if res > 1e-10 {
                return Err(Error::UnsupportedCocycle {
                    instance: inst.name(),
                    obstruction: format!("2-cocycle is not exact (projection residual {res:.3e})"),
                });
            }
            // m = G xi0, so xi0 = G^-1 m.
            let xi0 = inst.covector(inst.sharp(&inst.covector(m)).coeffs);
            Ok(GroupCocycle::coboundary(&xi0))
        }
        GroupKind::Torus2 => Err(Error::UnsupportedCocycle {
            instance: inst.name(),
            obstruction: "every continuous cocycle on a compact torus is zero, so a nonzero \
                          2-cocycle does not integrate"
                .to_string(),
        }),
        GroupKind::Abelian2 => Ok(GroupCocycle { inst, kind: ChiKind::Linear(lambda.clone()) }),
        GroupKind::Heisenberg3 => Err(Error::UnsupportedCocycle {
            instance: inst.name(),
            obstruction: "the instance pairing is not Ad-invariant; no built-in integrating \
                          family is provided"
                .to_string(),
        }),
    }
}

/// The affine Poisson bracket of two linear functions, evaluated at `xi`:
/// `{l_v1, l_v2}(xi) = <xi, [v1, v2]> + lambda(v1, v2)`.
pub fn affine_bracket(lambda: &TwoCocycle, v1: &AlgebraElement, v2: &AlgebraElement, xi: &Covector) -> f64 {
    xi.pair(&v1.bracket(v2)) + lambda.eval(v1, v2)
}

/// Jacobi defect of the affine bracket on linear functions, evaluated honestly
/// through nested brackets: `{{l_1, l_2}, l_3} + cyclic` at `xi`. The nested
/// bracket of an affine function drops its constant part, so this equals the
/// cyclic cocycle sum, and vanishes exactly when `lambda` is a cocycle.
pub fn jacobi_defect(
    lambda: &TwoCocycle,
    v1: &AlgebraElement,
    v2: &AlgebraElement,
    v3: &AlgebraElement,
    xi: &Covector,
) -> f64 {
    let term = |a: &AlgebraElement, b: &AlgebraElement, c: &AlgebraElement| -> f64 {
        // {l_a, l_b} = l_[a,b] + lambda(a,b); bracketing with l_c keeps only the
        // linear part: {{l_a, l_b}, l_c}(xi) = <xi, [[a,b],c]> + lambda([a,b], c).
        affine_bracket(lambda, &a.bracket(b), c, xi)
    };
    term(v1, v2, v3) + term(v2, v3, v1) + term(v3, v1, v2)
}

/// Residual of the compatibility between `chi` and `lambda` at a group point:
/// `<chi(h), [v1, v2]> - lambda(v1, v2) + lambda(Ad_{h^-1} v1, Ad_{h^-1} v2)`.
pub fn integrability_residual(
    lambda: &TwoCocycle,
    chi: &GroupCocycle,
    h: &GroupPoint,
    v1: &AlgebraElement,
    v2: &AlgebraElement,
) -> f64 {
    let hinv = h.inverse();
    chi.eval(h).pair(&v1.bracket(v2)) - lambda.eval(v1, v2)
        + lambda.eval(&hinv.adjoint(v1), &hinv.adjoint(v2))
}

/// Residual of `d/dt chi(exp(t e_i))|_0 = flat(e_i)` by central differences.
pub fn van_est_residual(lambda: &TwoCocycle, chi: &GroupCocycle, t: f64) -> f64 {
    let inst = lambda.instance();
    let mut worst: f64 = 0.0;
    for i in 0..inst.dim() {
        let e = inst.basis_element(i);
        let plus = chi.eval(&inst.exp(&e.scale(t)));
        let minus = chi.eval(&inst.exp(&e.scale(-t)));
        let fd = plus.sub(&minus).scale(1.0 / (2.0 * t));
        worst = worst.max(fd.sub(&lambda.flat(&e)).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::instance;
    use crate::sample::{rand_algebra, rand_covector, rand_group, rng_for};

    #[test]
    fn area_and_exact_cocycles_validate() {
        let ab = instance(GroupKind::Abelian2);
        let area = TwoCocycle::area(ab);
        assert!(area.antisymmetry_residual() == 0.0);
        assert!(area.cocycle_residual() < 1e-15);

        let mut rng = rng_for(1, 90, 0);
        for kind in [GroupKind::Su2, GroupKind::So3] {
            let inst = instance(kind);
            let xi0 = rand_covector(inst, &mut rng);
            let lam = TwoCocycle::exact(inst, &xi0);
            assert!(lam.cocycle_residual() < 1e-13, "{} cocycle residual", inst.name());
            assert!(lam.antisymmetry_residual() < 1e-13);
        }
    }

    #[test]
    fn flat_is_dual_to_eval() {
        let mut rng = rng_for(2, 90, 1);
        let inst = instance(GroupKind::Su2);
        let lam = TwoCocycle::exact(inst, &rand_covector(inst, &mut rng));
        for _ in 0..10 {
            let u = rand_algebra(inst, &mut rng);
            let w = rand_algebra(inst, &mut rng);
            let err = (lam.flat(&u).pair(&w) - lam.eval(&u, &w)).abs();
            assert!(err < 1e-13, "flat duality residual {:.3e}", err);
        }
    }

    #[test]
    fn jacobi_defect_vanishes_for_cocycles() {
        let mut rng = rng_for(3, 90, 2);
        let su2 = instance(GroupKind::Su2);
        let lam = TwoCocycle::exact(su2, &rand_covector(su2, &mut rng));
        for _ in 0..20 {
            let (a, b, c) = (
                rand_algebra(su2, &mut rng),
                rand_algebra(su2, &mut rng),
                rand_algebra(su2, &mut rng),
            );
            let xi = rand_covector(su2, &mut rng);
            let d = jacobi_defect(&lam, &a, &b, &c, &xi).abs();
            assert!(d < 1e-12, "Jacobi defect {:.3e}", d);
        }
    }

    #[test]
    fn broken_cocycle_has_visible_jacobi_defect() {
        // Bumping a diagonal entry breaks antisymmetry and leaves a defect of
        // exactly 0.1 on the basis triple through the bracket [e_2, e_3] = e_1.
        let su2 = instance(GroupKind::Su2);
        let mut l = DMatrix::zeros(3, 3);
        l[(0, 0)] = 0.1;
        let bad = TwoCocycle::new_unchecked(su2, l);
        let xi = su2.zero_covector();
        let d = jacobi_defect(
            &bad,
            &su2.basis_element(0),
            &su2.basis_element(1),
            &su2.basis_element(2),
            &xi,
        );
        assert!((d - 0.1).abs() < 1e-15, "expected defect 0.1, got {d:.6e}");
        assert!(bad.antisymmetry_residual() > 0.1);
    }

    #[test]
    fn integrated_cocycles_satisfy_the_cocycle_law() {
        let mut rng = rng_for(4, 90, 3);
        for kind in [GroupKind::Su2, GroupKind::So3, GroupKind::Abelian2] {
            let inst = instance(kind);
            let lam = match kind {
                GroupKind::Abelian2 => TwoCocycle::area(inst),
                _ => TwoCocycle::exact(inst, &rand_covector(inst, &mut rng)),
            };
            let chi = integrate_cocycle(&lam).unwrap();
            for _ in 0..10 {
                let g = rand_group(inst, &mut rng);
                let h = rand_group(inst, &mut rng);
                let r = chi.cocycle_law_residual(&g, &h);
                assert!(r < 1e-12, "{} cocycle-law residual {:.3e}", inst.name(), r);
            }
        }
        // Zero cocycles integrate to zero on every instance.
        for kind in GroupKind::ALL {
            let inst = instance(kind);
            let chi = integrate_cocycle(&TwoCocycle::zero(inst)).unwrap();
            let g = rand_group(inst, &mut rng);
            assert!(chi.eval(&g).norm() == 0.0);
        }
    }

    #[test]
    fn van_est_derivative_recovers_flat() {
        let mut rng = rng_for(5, 90, 4);
        for kind in [GroupKind::Su2, GroupKind::So3, GroupKind::Abelian2] {
            let inst = instance(kind);
            let lam = match kind {
                GroupKind::Abelian2 => TwoCocycle::area(inst),
                _ => TwoCocycle::exact(inst, &rand_covector(inst, &mut rng)),
            };
            let chi = integrate_cocycle(&lam).unwrap();
            let r = van_est_residual(&lam, &chi, 1e-5);
            assert!(r < 1e-8, "{} Van Est residual {:.3e}", inst.name(), r);
        }
    }

    #[test]
    fn affine_action_is_a_left_action() {
        let mut rng = rng_for(6, 90, 5);
        for kind in [GroupKind::Su2, GroupKind::So3, GroupKind::Abelian2] {
            let inst = instance(kind);
            let lam = match kind {
                GroupKind::Abelian2 => TwoCocycle::area(inst),
                _ => TwoCocycle::exact(inst, &rand_covector(inst, &mut rng)),
            };
            let chi = integrate_cocycle(&lam).unwrap();
            for _ in 0..10 {
                let g = rand_group(inst, &mut rng);
                let h = rand_group(inst, &mut rng);
                let xi = rand_covector(inst, &mut rng);
                let nested = chi.affine_action(&g, &chi.affine_action(&h, &xi));
                let joint = chi.affine_action(&g.mul(&h), &xi);
                let r = nested.sub(&joint).norm();
                assert!(r < 1e-12, "{} affine action residual {:.3e}", inst.name(), r);
            }
        }
    }

    #[test]
    fn integrability_residual_vanishes() {
        let mut rng = rng_for(7, 90, 6);
        for kind in [GroupKind::Su2, GroupKind::So3, GroupKind::Abelian2] {
            let inst = instance(kind);
            let lam = match kind {
                GroupKind::Abelian2 => TwoCocycle::area(inst),
                _ => TwoCocycle::exact(inst, &rand_covector(inst, &mut rng)),
            };
            let chi = integrate_cocycle(&lam).unwrap();
            for _ in 0..10 {
                let h = rand_group(inst, &mut rng);
                let v1 = rand_algebra(inst, &mut rng);
                let v2 = rand_algebra(inst, &mut rng);
                let r = integrability_residual(&lam, &chi, &h, &v1, &v2).abs();
                assert!(r < 1e-12, "{} integrability residual {:.3e}", inst.name(), r);
            }
        }
    }

    #[test]
    fn unsupported_instances_are_rejected_with_reasons() {
        let torus = instance(GroupKind::Torus2);
        let mut l = DMatrix::zeros(2, 2);
        l[(0, 1)] = 1.0;
        l[(1, 0)] = -1.0;
        let lam = TwoCocycle::new(torus, l);
        assert!(matches!(
            integrate_cocycle(&lam),
            Err(Error::UnsupportedCocycle { instance: "torus2", .. })
        ));

        let heis = instance(GroupKind::Heisenberg3);
        let mut l = DMatrix::zeros(3, 3);
        l[(0, 1)] = 1.0;
        l[(1, 0)] = -1.0;
        let lam = TwoCocycle::new(heis, l);
        assert!(matches!(
            integrate_cocycle(&lam),
            Err(Error::UnsupportedCocycle { instance: "heisenberg3", .. })
        ));
    }

    #[test]
    fn su2_integration_recovers_the_generating_point() {
        let mut rng = rng_for(8, 90, 7);
        let su2 = instance(GroupKind::Su2);
        let xi0 = rand_covector(su2, &mut rng);
        let lam = TwoCocycle::exact(su2, &xi0);
        let chi = integrate_cocycle(&lam).unwrap();
        for _ in 0..10 {
            let g = rand_group(su2, &mut rng);
            let expect = xi0.sub(&g.coadjoint(&xi0));
            let r = chi.eval(&g).sub(&expect).norm();
            assert!(r < 1e-12, "coboundary recovery residual {:.3e}", r);
        }
    }
}
