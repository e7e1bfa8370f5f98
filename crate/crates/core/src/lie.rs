//! Matrix-group backend: five fixed instances with bracket, exponential,
//! adjoint/coadjoint actions, and an invariant (or flagged non-invariant) pairing.
//!
//! Conventions used throughout the crate:
//!
//! * algebra elements are real coefficient vectors against a fixed matrix basis
//!   `e_1..e_d`; the pairing Gram matrix in that basis is computed from the
//!   defining trace formula of each instance (orthonormal for all built-ins);
//! * `Ad_g x = g x g^-1`, and the coadjoint action on covectors is
//!   `<coadjoint(g, xi), v> = <xi, Ad_{g^-1} v>`, a left action;
//! * `<ad_star(v, xi), w> = <xi, [v, w]>`, so the linearization of
//!   `t -> coadjoint(exp(t v), xi)` at `t = 0` is `-ad_star(v, .)`;
//! * the Cartan 3-form evaluator is `cartan3(t1, t2, t3) = (t1, [t2, t3]) / 2`.

use std::sync::OnceLock;

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::consts::tol;
use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

#[inline]
fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The five built-in group instances.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum GroupKind {
    Su2 = 0,
    So3 = 1,
    Torus2 = 2,
    Abelian2 = 3,
    Heisenberg3 = 4,
}

impl GroupKind {
    pub const ALL: [GroupKind; 5] = [
        GroupKind::Su2,
        GroupKind::So3,
        GroupKind::Torus2,
        GroupKind::Abelian2,
        GroupKind::Heisenberg3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Su2 => "su2",
            GroupKind::So3 => "so3",
            GroupKind::Torus2 => "torus2",
            GroupKind::Abelian2 => "abelian2",
            GroupKind::Heisenberg3 => "heisenberg3",
        }
    }

    pub fn parse(s: &str) -> Option<GroupKind> {
        GroupKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// True when the group is compact (so the exponential of the whole algebra
    /// stays bounded and the pairing is definite and Ad-invariant).
    pub fn is_compact(self) -> bool {
        matches!(self, GroupKind::Su2 | GroupKind::So3 | GroupKind::Torus2)
    }
}

/// Immutable per-instance data: basis, pairing Gram, structure constants, and
/// the factorizations needed to re-express matrices in the basis.
pub struct LieInstance {
    kind: GroupKind,
    dim: usize,
    mat_dim: usize,
    basis: Vec<CMat>,
    /// Gram matrix of the instance pairing in the basis (identity for built-ins,
    /// but kept general so every pairing computation goes through it).
    gram: DMatrix<f64>,
    gram_lu: LU<f64, Dyn, Dyn>,
    /// Gram matrix of the real Frobenius inner product on the basis, used to
    /// project arbitrary matrices back onto the span.
    frob_lu: LU<f64, Dyn, Dyn>,
    /// `structure[k][(i, j)]` is the `e_k` coefficient of `[e_i, e_j]`.
    structure: Vec<DMatrix<f64>>,
    ad_invariant_pairing: bool,
}

fn basis_for(kind: GroupKind) -> (usize, Vec<CMat>) {
    match kind {
        GroupKind::Su2 => {
            // e_i = -(i/2) sigma_i against the Pauli matrices.
            let e1 = CMat::from_row_slice(
                2,
                2,
                &[c64(0.0, 0.0), c64(0.0, -0.5), c64(0.0, -0.5), c64(0.0, 0.0)],
            );
            let e2 = CMat::from_row_slice(
                2,
                2,
                &[c64(0.0, 0.0), c64(-0.5, 0.0), c64(0.5, 0.0), c64(0.0, 0.0)],
            );
            let e3 = CMat::from_row_slice(
                2,
                2,
                &[c64(0.0, -0.5), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.5)],
            );
            (2, vec![e1, e2, e3])
        }
        GroupKind::So3 => {
            // (L_i)_{jk} = -epsilon_{ijk}: the standard rotation generators.
            let mut l = vec![CMat::zeros(3, 3), CMat::zeros(3, 3), CMat::zeros(3, 3)];
            let eps = |i: usize, j: usize, k: usize| -> f64 {
                match (i, j, k) {
                    (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                    (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                    _ => 0.0,
                }
            };
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        l[i][(j, k)] = c64(-eps(i, j, k), 0.0);
                    }
                }
            }
            (3, l)
        }
        GroupKind::Torus2 => {
            let mut f1 = CMat::zeros(2, 2);
            f1[(0, 0)] = c64(0.0, 1.0);
            let mut f2 = CMat::zeros(2, 2);
            f2[(1, 1)] = c64(0.0, 1.0);
            (2, vec![f1, f2])
        }
        GroupKind::Abelian2 => {
            let mut t1 = CMat::zeros(3, 3);
            t1[(0, 2)] = c64(1.0, 0.0);
            let mut t2 = CMat::zeros(3, 3);
            t2[(1, 2)] = c64(1.0, 0.0);
            (3, vec![t1, t2])
        }
        GroupKind::Heisenberg3 => {
            let mut x = CMat::zeros(3, 3);
            x[(0, 1)] = c64(1.0, 0.0);
            let mut y = CMat::zeros(3, 3);
            y[(1, 2)] = c64(1.0, 0.0);
            let mut z = CMat::zeros(3, 3);
            z[(0, 2)] = c64(1.0, 0.0);
            (3, vec![x, y, z])
        }
    }
}

/// The defining pairing of each instance, evaluated directly on matrices.
/// This is the oracle form; [`LieInstance::pair`] goes through the Gram matrix.
pub fn pair_from_matrices(kind: GroupKind, x: &CMat, y: &CMat) -> f64 {
    match kind {
        GroupKind::Su2 => -2.0 * (x * y).trace().re,
        GroupKind::So3 => -0.5 * (x * y).trace().re,
        GroupKind::Torus2 => -(x * y).trace().re,
        GroupKind::Abelian2 | GroupKind::Heisenberg3 => (x.adjoint() * y).trace().re,
    }
}

impl std::fmt::Debug for LieInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LieInstance").field("kind", &self.kind).finish()
    }
}

impl LieInstance {
    fn build(kind: GroupKind) -> LieInstance {
        let (mat_dim, basis) = basis_for(kind);
        let dim = basis.len();

        let mut frob = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                frob[(i, j)] = (basis[i].adjoint() * &basis[j]).trace().re;
            }
        }
        let frob_lu = frob.clone().lu();

        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                gram[(i, j)] = pair_from_matrices(kind, &basis[i], &basis[j]);
            }
        }
        let gram_lu = gram.clone().lu();

        // Structure constants from matrix commutators of basis pairs.
        let mut structure = vec![DMatrix::zeros(dim, dim); dim];
        for i in 0..dim {
            for j in 0..dim {
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let mut rhs = DVector::zeros(dim);
                for k in 0..dim {
                    rhs[k] = (basis[k].adjoint() * &comm).trace().re;
                }
                let coeffs = frob_lu.solve(&rhs).expect("basis Frobenius Gram is invertible");
                for k in 0..dim {
                    structure[k][(i, j)] = coeffs[k];
                }
            }
        }

        LieInstance {
            kind,
            dim,
            mat_dim,
            basis,
            gram,
            gram_lu,
            frob_lu,
            structure,
            ad_invariant_pairing: kind != GroupKind::Heisenberg3,
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Algebra dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Side length of the defining matrix representation.
    pub fn mat_dim(&self) -> usize {
        self.mat_dim
    }

    pub fn basis_matrix(&self, i: usize) -> &CMat {
        &self.basis[i]
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// False exactly when the instance pairing fails `(Ad_g x, Ad_g y) = (x, y)`.
    pub fn has_invariant_pairing(&self) -> bool {
        self.ad_invariant_pairing
    }

    pub fn alg(&'static self, coeffs: DVector<f64>) -> AlgebraElement {
        assert_eq!(coeffs.len(), self.dim, "coefficient length mismatch");
        AlgebraElement { inst: self, coeffs }
    }

    pub fn alg_from(&'static self, coeffs: &[f64]) -> AlgebraElement {
        self.alg(DVector::from_row_slice(coeffs))
    }

    pub fn basis_element(&'static self, i: usize) -> AlgebraElement {
        let mut c = DVector::zeros(self.dim);
        c[i] = 1.0;
        self.alg(c)
    }

    pub fn zero_alg(&'static self) -> AlgebraElement {
        self.alg(DVector::zeros(self.dim))
    }

    pub fn covector(&'static self, coeffs: DVector<f64>) -> Covector {
        assert_eq!(coeffs.len(), self.dim, "coefficient length mismatch");
        Covector { inst: self, coeffs }
    }

    pub fn covector_from(&'static self, coeffs: &[f64]) -> Covector {
        self.covector(DVector::from_row_slice(coeffs))
    }

    pub fn zero_covector(&'static self) -> Covector {
        self.covector(DVector::zeros(self.dim))
    }

    pub fn identity(&'static self) -> GroupPoint {
        GroupPoint {
            inst: self,
            m: CMat::identity(self.mat_dim, self.mat_dim),
        }
    }

    /// Group exponential: scaling-and-squaring followed by projection back onto
    /// the group constraints.
    pub fn exp(&'static self, v: &AlgebraElement) -> GroupPoint {
        assert!(std::ptr::eq(v.inst, self), "instance mismatch");
        let (m, _corr) = project_to_group(self.kind, &expm(&v.to_matrix()));
        GroupPoint { inst: self, m }
    }

    /// Coefficients of `m` against the basis, together with the Frobenius
    /// residual of the reprojection.
    pub fn in_basis(&self, m: &CMat) -> (DVector<f64>, f64) {
        let mut rhs = DVector::zeros(self.dim);
        for k in 0..self.dim {
            rhs[k] = (self.basis[k].adjoint() * m).trace().re;
        }
        let coeffs = self.frob_lu.solve(&rhs).expect("basis Frobenius Gram is invertible");
        let mut recon = CMat::zeros(self.mat_dim, self.mat_dim);
        for k in 0..self.dim {
            recon += self.basis[k].map(|z| z * coeffs[k]);
        }
        let residual = (m - recon).norm();
        (coeffs, residual)
    }

    /// Like [`Self::in_basis`] but failing when the residual shows the matrix is
    /// not actually in the algebra span.
    pub fn in_basis_checked(&'static self, m: &CMat) -> Result<AlgebraElement> {
        let (coeffs, residual) = self.in_basis(m);
        if residual > tol::ALGEBRA_SPAN {
            return Err(Error::NotInAlgebra {
                instance: self.name(),
                residual,
            });
        }
        Ok(AlgebraElement { inst: self, coeffs })
    }

    /// Pairing of two algebra elements through the Gram matrix.
    pub fn pair(&self, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
        assert!(std::ptr::eq(x.inst, y.inst), "instance mismatch");
        x.coeffs.dot(&(&self.gram * &y.coeffs))
    }

    /// Matrix of `ad_v = [v, .]` in the basis.
    pub fn ad_matrix(&self, v: &AlgebraElement) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for k in 0..self.dim {
            for j in 0..self.dim {
                let mut s = 0.0;
                for i in 0..self.dim {
                    s += v.coeffs[i] * self.structure[k][(i, j)];
                }
                a[(k, j)] = s;
            }
        }
        a
    }

    /// Bracket on raw coefficient vectors, for hot loops over sampled data.
    pub fn bracket_coeffs(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for k in 0..self.dim {
            c[k] = x.dot(&(&self.structure[k] * y));
        }
        c
    }

    /// Raise a covector through the Gram matrix: the unique `v` with
    /// `xi(.) = (v, .)`.
    pub fn sharp(&'static self, xi: &Covector) -> AlgebraElement {
        let coeffs = self.gram_lu.solve(&xi.coeffs).expect("pairing Gram is invertible");
        self.alg(coeffs)
    }

    /// Lower an algebra element to the covector `(v, .)`.
    pub fn flat(&'static self, v: &AlgebraElement) -> Covector {
        self.covector(self.gram.transpose() * &v.coeffs)
    }
}

/// The global instance table.
pub fn instance(kind: GroupKind) -> &'static LieInstance {
    static CELL: OnceLock<Vec<LieInstance>> = OnceLock::new();
    let table = CELL.get_or_init(|| GroupKind::ALL.iter().map(|&k| LieInstance::build(k)).collect());
    &table[kind as usize]
}

/// An algebra element as real coefficients against the instance basis.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    pub(crate) inst: &'static LieInstance,
    pub coeffs: DVector<f64>,
}

impl AlgebraElement {
    pub fn instance(&self) -> &'static LieInstance {
        self.inst
    }

    pub fn to_matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.inst.mat_dim, self.inst.mat_dim);
        for k in 0..self.inst.dim {
            m += self.inst.basis[k].map(|z| z * self.coeffs[k]);
        }
        m
    }

    pub fn bracket(&self, other: &AlgebraElement) -> AlgebraElement {
        assert!(std::ptr::eq(self.inst, other.inst), "instance mismatch");
        let d = self.inst.dim;
        let mut c = DVector::zeros(d);
        for k in 0..d {
            c[k] = self.coeffs.dot(&(&self.inst.structure[k] * &other.coeffs));
        }
        AlgebraElement { inst: self.inst, coeffs: c }
    }

    pub fn pair(&self, other: &AlgebraElement) -> f64 {
        self.inst.pair(self, other)
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        assert!(std::ptr::eq(self.inst, other.inst), "instance mismatch");
        AlgebraElement { inst: self.inst, coeffs: &self.coeffs + &other.coeffs }
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        assert!(std::ptr::eq(self.inst, other.inst), "instance mismatch");
        AlgebraElement { inst: self.inst, coeffs: &self.coeffs - &other.coeffs }
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        AlgebraElement { inst: self.inst, coeffs: &self.coeffs * s }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// `ad_star(v, xi)` with `<ad_star(v, xi), w> = <xi, [v, w]>`.
    pub fn ad_star(&self, xi: &Covector) -> Covector {
        assert!(std::ptr::eq(self.inst, xi.inst), "instance mismatch");
        let ad = self.inst.ad_matrix(self);
        // <res, w> = res^T G w must equal xi^T G (ad w) for all w.
        let rhs = ad.transpose() * (&self.inst.gram * &xi.coeffs);
        let coeffs = self
            .inst
            .gram_lu
            .solve(&rhs)
            .expect("pairing Gram is invertible");
        Covector { inst: self.inst, coeffs }
    }
}

/// A covector (element of the dual) as real coefficients; the pairing against
/// algebra elements goes through the instance Gram matrix.
#[derive(Clone, Debug)]
pub struct Covector {
    pub(crate) inst: &'static LieInstance,
    pub coeffs: DVector<f64>,
}

impl Covector {
    pub fn instance(&self) -> &'static LieInstance {
        self.inst
    }

    /// `<xi, v>`.
    pub fn pair(&self, v: &AlgebraElement) -> f64 {
        assert!(std::ptr::eq(self.inst, v.inst), "instance mismatch");
        self.coeffs.dot(&(&self.inst.gram * &v.coeffs))
    }

    pub fn add(&self, other: &Covector) -> Covector {
        assert!(std::ptr::eq(self.inst, other.inst), "instance mismatch");
        Covector { inst: self.inst, coeffs: &self.coeffs + &other.coeffs }
    }

    pub fn sub(&self, other: &Covector) -> Covector {
        assert!(std::ptr::eq(self.inst, other.inst), "instance mismatch");
        Covector { inst: self.inst, coeffs: &self.coeffs - &other.coeffs }
    }

    pub fn scale(&self, s: f64) -> Covector {
        Covector { inst: self.inst, coeffs: &self.coeffs * s }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

/// A group element as its defining matrix, tagged with its instance.
#[derive(Clone, Debug)]
pub struct GroupPoint {
    pub(crate) inst: &'static LieInstance,
    pub(crate) m: CMat,
}

impl GroupPoint {
    pub fn instance(&self) -> &'static LieInstance {
        self.inst
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    /// Construct from a raw matrix, verifying group membership.
    pub fn from_matrix(inst: &'static LieInstance, m: CMat) -> Result<GroupPoint> {
        let residual = membership_residual(inst.kind, &m);
        if residual > 1e-9 {
            return Err(Error::NotInAlgebra { instance: inst.name(), residual });
        }
        Ok(GroupPoint { inst, m })
    }

    pub fn mul(&self, other: &GroupPoint) -> GroupPoint {
        assert!(std::ptr::eq(self.inst, other.inst), "instance mismatch");
        GroupPoint { inst: self.inst, m: &self.m * &other.m }
    }

    /// Closed-form inverse per instance (conjugate transpose for the unitary
    /// families, entry bookkeeping for the unipotent ones).
    pub fn inverse(&self) -> GroupPoint {
        let m = match self.inst.kind {
            GroupKind::Su2 | GroupKind::Torus2 | GroupKind::So3 => self.m.adjoint(),
            GroupKind::Abelian2 => {
                let mut inv = self.m.clone();
                inv[(0, 2)] = -self.m[(0, 2)];
                inv[(1, 2)] = -self.m[(1, 2)];
                inv
            }
            GroupKind::Heisenberg3 => {
                let a = self.m[(0, 1)];
                let b = self.m[(1, 2)];
                let c = self.m[(0, 2)];
                let mut inv = CMat::identity(3, 3);
                inv[(0, 1)] = -a;
                inv[(1, 2)] = -b;
                inv[(0, 2)] = a * b - c;
                inv
            }
        };
        GroupPoint { inst: self.inst, m }
    }

    /// `Ad_g v = g v g^-1`, re-expressed in the basis.
    pub fn adjoint(&self, v: &AlgebraElement) -> AlgebraElement {
        assert!(std::ptr::eq(self.inst, v.inst), "instance mismatch");
        let conj = &self.m * v.to_matrix() * self.inverse().m;
        let (coeffs, _res) = self.inst.in_basis(&conj);
        AlgebraElement { inst: self.inst, coeffs }
    }

    /// Matrix of `Ad_g` in the basis.
    pub fn adjoint_matrix(&self) -> DMatrix<f64> {
        let d = self.inst.dim;
        let ginv = self.inverse();
        let mut a = DMatrix::zeros(d, d);
        for j in 0..d {
            let conj = &self.m * &self.inst.basis[j] * &ginv.m;
            let (coeffs, _res) = self.inst.in_basis(&conj);
            for k in 0..d {
                a[(k, j)] = coeffs[k];
            }
        }
        a
    }

    /// `coadjoint(g, xi)` with `<coadjoint(g, xi), v> = <xi, Ad_{g^-1} v>`:
    /// the left coadjoint action `Ad*_{g^-1} xi`.
    pub fn coadjoint(&self, xi: &Covector) -> Covector {
        assert!(std::ptr::eq(self.inst, xi.inst), "instance mismatch");
        let ad_inv = self.inverse().adjoint_matrix();
        let rhs = ad_inv.transpose() * (&self.inst.gram * &xi.coeffs);
        let coeffs = self
            .inst
            .gram_lu
            .solve(&rhs)
            .expect("pairing Gram is invertible");
        Covector { inst: self.inst, coeffs }
    }

    /// Left Maurer-Cartan form: `g^-1 dg` re-expressed in the basis.
    pub fn maurer_cartan_left(&self, dg: &CMat) -> Result<AlgebraElement> {
        self.inst.in_basis_checked(&(self.inverse().m * dg))
    }

    /// Right Maurer-Cartan form: `dg g^-1` re-expressed in the basis.
    pub fn maurer_cartan_right(&self, dg: &CMat) -> Result<AlgebraElement> {
        self.inst.in_basis_checked(&(dg * self.inverse().m))
    }

    pub fn membership_residual(&self) -> f64 {
        membership_residual(self.inst.kind, &self.m)
    }
}

/// The Cartan 3-form evaluator `(t1, [t2, t3]) / 2` on algebra elements.
pub fn cartan3(t1: &AlgebraElement, t2: &AlgebraElement, t3: &AlgebraElement) -> f64 {
    0.5 * t1.pair(&t2.bracket(t3))
}

/// Dense matrix exponential by scaling-and-squaring with a Taylor core.
pub fn expm(m: &CMat) -> CMat {
    let n = m.nrows();
    let norm = m.norm();
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let b = m.map(|z| z / 2f64.powi(s as i32));
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..=40 {
        term = (&term * &b).map(|z| z / k as f64);
        sum += &term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Project a near-group matrix back onto the group constraints, returning the
/// projected matrix and the Frobenius norm of the correction.
///
/// Unitary and orthogonal instances use the Newton polar iteration
/// `X <- (X + (X^H)^-1) / 2`; torus and unipotent instances renormalize the
/// sparsity pattern directly.
pub fn project_to_group(kind: GroupKind, m: &CMat) -> (CMat, f64) {
    let projected = match kind {
        GroupKind::Su2 | GroupKind::So3 => {
            let n = m.nrows();
            let mut x = m.clone();
            for _ in 0..8 {
                let defect = (x.adjoint() * &x - CMat::identity(n, n)).norm();
                if defect < 1e-15 {
                    break;
                }
                let inv_adj = x
                    .adjoint()
                    .try_inverse()
                    .expect("near-unitary matrix is invertible");
                x = (&x + inv_adj).map(|z| z * 0.5);
            }
            if kind == GroupKind::So3 {
                // Orthogonal matrices are real; discard rounding-level imaginary parts.
                x = x.map(|z| c64(z.re, 0.0));
            } else {
                // The polar factor is unitary but its determinant can carry a
                // perturbation-level phase; rotate it back to det = 1.
                let phase = x.determinant().arg();
                let fix = Complex64::from_polar(1.0, -phase / n as f64);
                x = x.map(|z| z * fix);
            }
            x
        }
        GroupKind::Torus2 => {
            let mut x = CMat::zeros(2, 2);
            for i in 0..2 {
                let z = m[(i, i)];
                let r = z.norm();
                x[(i, i)] = if r > 0.0 { z / r } else { c64(1.0, 0.0) };
            }
            x
        }
        GroupKind::Abelian2 => {
            let mut x = CMat::identity(3, 3);
            x[(0, 2)] = c64(m[(0, 2)].re, 0.0);
            x[(1, 2)] = c64(m[(1, 2)].re, 0.0);
            x
        }
        GroupKind::Heisenberg3 => {
            let mut x = CMat::identity(3, 3);
            x[(0, 1)] = c64(m[(0, 1)].re, 0.0);
            x[(1, 2)] = c64(m[(1, 2)].re, 0.0);
            x[(0, 2)] = c64(m[(0, 2)].re, 0.0);
            x
        }
    };
    let correction = (&projected - m).norm();
    (projected, correction)
}

/// How far `m` is from satisfying the group constraints of `kind`.
pub fn membership_residual(kind: GroupKind, m: &CMat) -> f64 {
    let n = m.nrows();
    let imag_norm: f64 = m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    match kind {
        GroupKind::Su2 => {
            let unitary = (m.adjoint() * m - CMat::identity(n, n)).norm();
            let det = m.determinant();
            unitary + (det - c64(1.0, 0.0)).norm()
        }
        GroupKind::So3 => {
            let orth = (m.adjoint() * m - CMat::identity(n, n)).norm();
            let det = m.determinant();
            orth + (det - c64(1.0, 0.0)).norm() + imag_norm
        }
        GroupKind::Torus2 => {
            let off = m[(0, 1)].norm() + m[(1, 0)].norm();
            off + (m[(0, 0)].norm() - 1.0).abs() + (m[(1, 1)].norm() - 1.0).abs()
        }
        GroupKind::Abelian2 | GroupKind::Heisenberg3 => {
            let mut r = imag_norm;
            for i in 0..3 {
                r += (m[(i, i)] - c64(1.0, 0.0)).norm();
            }
            r += m[(1, 0)].norm() + m[(2, 0)].norm() + m[(2, 1)].norm();
            if kind == GroupKind::Abelian2 {
                r += m[(0, 1)].norm();
            }
            r
        }
    }
}

/// The right-trivialized differential factor of the exponential:
/// `d/dt exp(v(t)) = exp(v) . dexp_neg_factor(v) (v'(t))` where the factor is
/// the basis matrix of `sum_{k>=0} (-ad_v)^k / (k+1)!`.
pub fn dexp_neg_factor(v: &AlgebraElement) -> DMatrix<f64> {
    let d = v.inst.dim;
    let a = -v.inst.ad_matrix(v);
    let mut term = DMatrix::<f64>::identity(d, d);
    let mut sum = DMatrix::<f64>::identity(d, d);
    for k in 1..60 {
        term = (&term * &a) / (k + 1) as f64;
        sum += &term;
        if term.norm() < 1e-17 {
            break;
        }
    }
    sum
}
