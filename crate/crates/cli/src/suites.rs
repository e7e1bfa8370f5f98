//! The named verification suites and their residual records.
//!
//! Each suite produces one or more records; a record is a seeded ensemble of
//! residual checks for one identity family, summarized by max/mean/relative
//! statistics and compared against one tolerance. Records are keyed by a
//! slash-qualified label (`varpi/d-varpi`) so that every reported number
//! answers to a single error regime, and tolerance overrides can target
//! either a whole suite or one record.
//!
//! Trials run in parallel; each trial draws from its own counter-derived
//! ChaCha substream and results merge in trial order, so reports are
//! byte-stable regardless of worker count.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use symgrpd_core::amm::{
    d_varpi_residual, f_morphism_sample, lg2_action_sample, moment_sample, omega_loop,
    qham_axiom1_residual, qham_axiom2_residual, qham_axiom3, ArrowLab, DPoint, GaugeModel,
    LoopPoint, LoopTangent,
};
use symgrpd_core::consts::{defaults, tol, SCALE_FLOOR};
use symgrpd_core::groupoid::{axiom_residuals, partial2_2, AffineModel, Pair, PairTangent};
use symgrpd_core::lie::{cartan3, instance, GroupKind};
use symgrpd_core::loops::{
    holonomy, holonomy_tangent, loop_cocycle, varpi, AlgebraLoop, DiscreteConnection,
    DiscreteLoop, Grid,
};
use symgrpd_core::poisson::{
    integrability_residual, integrate_cocycle, jacobi_defect, GroupCocycle, TwoCocycle,
};
use symgrpd_core::sample::{
    rand_algebra, rand_coeffs, rand_covector, rand_group, rng_for, TrialRng,
};
use symgrpd_core::stats::ResidualStats;
use symgrpd_core::symplectic::{CentralExtension, GammaGroupoid, GammaPoint, GammaTangent};
use symgrpd_core::Error as CoreError;

use crate::config::RunConfig;
use crate::report::{ConvOrder, Record};
use crate::sampling::{
    bracket_loop, cocycle_family, constant_connection, draw_arrow, rand_algebra_loop,
    rand_connection, rand_dpoint, rand_dtangent, rand_loop, rand_loop_point, rand_loop_tangent,
};

/// Residuals below this level carry no resolvable order information.
pub const SATURATION_FLOOR: f64 = 1e-12;

/// FD steps used to fit the d-varpi record's convergence order: both sit in
/// the window where the quadratic stencil term dominates the fixed
/// discretization floor of the two routes.
const FD_ORDER_STEPS: (f64, f64) = (2e-2, 1e-2);

/// Trials entering a convergence fit (dominated by re-running the drivers).
const ORDER_TRIALS: u64 = 10;

/// Band of the ensembles whose residuals ride on the order-4 quadrature of
/// the transported integrals: at the default grid, band-5 data puts that
/// floor above the relative budget, so these records draw smoother loops
/// (the generator contract is band-limited data with band at most 5).
const SMOOTH_BAND: usize = 2;

/// Deliberately degenerate points appended to the qham/axiom3 ensemble.
const DEGENERATE_TRIALS: u64 = 10;
/// Substream offset separating the degenerate batch from generic trials.
const DEGENERATE_BASE: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SuiteKind {
    FiniteBasics,
    AffinePoisson,
    GammaGroupoid,
    Reduction,
    GerbeCurvature,
    LoopBasics,
    HolonomyLemmas,
    Varpi,
    AmmEquivalence,
    DeltaCocycle,
    Qham,
    Moment,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 12] = [
        SuiteKind::FiniteBasics,
        SuiteKind::AffinePoisson,
        SuiteKind::GammaGroupoid,
        SuiteKind::Reduction,
        SuiteKind::GerbeCurvature,
        SuiteKind::LoopBasics,
        SuiteKind::HolonomyLemmas,
        SuiteKind::Varpi,
        SuiteKind::AmmEquivalence,
        SuiteKind::DeltaCocycle,
        SuiteKind::Qham,
        SuiteKind::Moment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::FiniteBasics => "finite-basics",
            SuiteKind::AffinePoisson => "affine-poisson",
            SuiteKind::GammaGroupoid => "gamma-groupoid",
            SuiteKind::Reduction => "reduction",
            SuiteKind::GerbeCurvature => "gerbe-curvature",
            SuiteKind::LoopBasics => "loop-basics",
            SuiteKind::HolonomyLemmas => "holonomy-lemmas",
            SuiteKind::Varpi => "varpi",
            SuiteKind::AmmEquivalence => "amm-equivalence",
            SuiteKind::DeltaCocycle => "delta-cocycle",
            SuiteKind::Qham => "qham",
            SuiteKind::Moment => "moment",
        }
    }

    pub fn parse(s: &str) -> Option<SuiteKind> {
        SuiteKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// The instance a suite is tied to regardless of the requested group.
    pub fn pinned_group(self) -> Option<GroupKind> {
        match self {
            SuiteKind::Reduction | SuiteKind::GerbeCurvature => Some(GroupKind::Heisenberg3),
            _ => None,
        }
    }

    /// Why `(self, group)` is not runnable, if it is not.
    pub fn unsupported(self, group: GroupKind) -> Option<String> {
        match self {
            SuiteKind::FiniteBasics => None,
            SuiteKind::Reduction | SuiteKind::GerbeCurvature => {
                (group != GroupKind::Heisenberg3).then(|| {
                    format!(
                        "suite {} runs on the fixed heisenberg3 central extension; \
                         pass --group heisenberg3 (under --suite all it is pinned there)",
                        self.name()
                    )
                })
            }
            _ => (group == GroupKind::Heisenberg3).then(|| {
                format!(
                    "suite {} needs an Ad-invariant pairing (su2, so3, torus2, abelian2); \
                     heisenberg3 is covered by the reduction and gerbe-curvature suites",
                    self.name()
                )
            }),
        }
    }

    pub fn record_labels(self) -> &'static [&'static str] {
        match self {
            SuiteKind::FiniteBasics => &["finite-basics"],
            SuiteKind::AffinePoisson => &["affine-poisson"],
            SuiteKind::GammaGroupoid => &["gamma-groupoid"],
            SuiteKind::Reduction => &["reduction"],
            SuiteKind::GerbeCurvature => &["gerbe-curvature"],
            SuiteKind::LoopBasics => {
                &["loop-basics/cocycle", "loop-basics/holonomy", "loop-basics/gauge-groupoid"]
            }
            SuiteKind::HolonomyLemmas => &["holonomy-lemmas"],
            SuiteKind::Varpi => &["varpi/inv-minus", "varpi/tangent-oracle", "varpi/d-varpi"],
            SuiteKind::AmmEquivalence => {
                &["amm-equivalence/identity", "amm-equivalence/morphism"]
            }
            SuiteKind::DeltaCocycle => &["delta-cocycle/arrow", "delta-cocycle/base"],
            SuiteKind::Qham => &["qham/axiom1", "qham/axiom2", "qham/axiom3"],
            SuiteKind::Moment => &["moment/condition", "moment/action"],
        }
    }
}

/// A numerical failure inside a suite, with the substream that replays it.
#[derive(Debug)]
pub struct Failure {
    pub record: &'static str,
    pub stream: u32,
    pub trial: u64,
    pub seed: u64,
    pub error: CoreError,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "numerical failure in {}: {} (replay: seed {}, stream {}, trial {})",
            self.record, self.error, self.seed, self.stream, self.trial
        )
    }
}

/// Static description of one record: label, anchor, RNG stream, and the
/// tolerance regime it answers to.
pub(crate) struct RecordSpec {
    pub(crate) label: &'static str,
    pub(crate) anchor: &'static str,
    pub(crate) stream: u32,
    /// Pass on `relative_max` instead of `max_residual`.
    pub(crate) relative: bool,
    pub(crate) tol: f64,
}

const R_FINITE: RecordSpec = RecordSpec {
    label: "finite-basics",
    anchor: "sec2: Lie kernels (exp, Ad, pairing); sec4.1: Cartan 3-form",
    stream: 16,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_AFFINE: RecordSpec = RecordSpec {
    label: "affine-poisson",
    anchor: "sec3.1: Eqt:affine-lie-algebra, Eqt:chi, Eqt:affine-action, Lemma integrate-lemma",
    stream: 32,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_GAMMA: RecordSpec = RecordSpec {
    label: "gamma-groupoid",
    anchor: "sec3.1: eq:O_g-def, Prop multiplicative, Prop symp_realization, \
             Theorem symplectic_groupoid; sec2: Eqt:derham2",
    stream: 48,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_REDUCTION: RecordSpec = RecordSpec {
    label: "reduction",
    anchor: "sec3.2: Prop Ham_space1, Prop rel_OG&OC",
    stream: 64,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_GERBE: RecordSpec = RecordSpec {
    label: "gerbe-curvature",
    anchor: "sec5: Behrend-Xu theorem, cor: DD-class-omega",
    stream: 80,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_LB_COCYCLE: RecordSpec = RecordSpec {
    label: "loop-basics/cocycle",
    anchor: "sec4.1: eq:loopcocycle, eq: LH_on_(Lh)*",
    stream: 96,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_LB_HOLONOMY: RecordSpec = RecordSpec {
    label: "loop-basics/holonomy",
    anchor: "sec4.2: eq:ODE_Hol",
    stream: 97,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_LB_GAUGE: RecordSpec = RecordSpec {
    label: "loop-basics/gauge-groupoid",
    anchor: "sec4.1: Theorem LGxLg-symgrpd, eq: LH_on_(Lh)*",
    stream: 98,
    relative: true,
    tol: tol::DISCRETIZED_REL,
};
const R_HOL_LEMMAS: RecordSpec = RecordSpec {
    label: "holonomy-lemmas",
    anchor: "sec4.2: Lemma invA, Lemma inversion-action, LG-equivariance of Hol",
    stream: 112,
    relative: true,
    tol: tol::DISCRETIZED_REL,
};
const R_VARPI_INV: RecordSpec = RecordSpec {
    label: "varpi/inv-minus",
    anchor: "sec4.2: Eqt:varpi, Lemma inv_minus",
    stream: 128,
    relative: true,
    tol: tol::DISCRETIZED_REL,
};
const R_VARPI_TAN: RecordSpec = RecordSpec {
    label: "varpi/tangent-oracle",
    anchor: "sec4.2: Eqt:varpi, eq:ODE_Hol",
    stream: 129,
    relative: true,
    tol: tol::DISCRETIZED_REL,
};
const R_VARPI_D: RecordSpec = RecordSpec {
    label: "varpi/d-varpi",
    anchor: "sec4.2: Lemma AMM",
    stream: 130,
    relative: true,
    tol: tol::FD,
};
const R_AMM_ID: RecordSpec = RecordSpec {
    label: "amm-equivalence/identity",
    anchor: "sec4.2: Theorem for-equiv(2); sec4.1: eq:O_D-def",
    stream: 144,
    relative: true,
    tol: tol::DISCRETIZED_REL,
};
const R_AMM_MORPH: RecordSpec = RecordSpec {
    label: "amm-equivalence/morphism",
    anchor: "sec4.2: Theorem for-equiv(1), Prop Morita-grpd",
    stream: 145,
    relative: false,
    tol: tol::MORPHISM,
};
const R_DELTA_ARROW: RecordSpec = RecordSpec {
    label: "delta-cocycle/arrow",
    anchor: "sec4.2: Prop formula-Xu, eq:formula-Xu",
    stream: 160,
    relative: true,
    tol: tol::DISCRETIZED_REL,
};
const R_DELTA_BASE: RecordSpec = RecordSpec {
    label: "delta-cocycle/base",
    anchor: "sec4.2: Prop formula-Xu, Lemma AMM",
    stream: 161,
    relative: true,
    tol: tol::FD,
};
const R_QHAM_1: RecordSpec = RecordSpec {
    label: "qham/axiom1",
    anchor: "sec4.1: Def. q-Hamiltonian(1), Prop AMM-space",
    stream: 176,
    relative: true,
    tol: tol::FD,
};
const R_QHAM_2: RecordSpec = RecordSpec {
    label: "qham/axiom2",
    anchor: "sec4.1: Def. q-Hamiltonian(2), Prop AMM-space",
    stream: 177,
    relative: false,
    tol: tol::ALGEBRAIC,
};
const R_QHAM_3: RecordSpec = RecordSpec {
    label: "qham/axiom3",
    anchor: "sec4.1: Def. q-Hamiltonian(3), Prop AMM-space",
    stream: 178,
    relative: false,
    tol: tol::KERNEL_ANGLE,
};
const R_MOMENT_COND: RecordSpec = RecordSpec {
    label: "moment/condition",
    anchor: "sec4.2: eq:moment-cond, Eqt:Psi-momentmap",
    stream: 192,
    relative: true,
    tol: tol::DISCRETIZED_REL,
};
const R_MOMENT_ACT: RecordSpec = RecordSpec {
    label: "moment/action",
    anchor: "sec4.2: eq:LHH_act_on_grpd, Eqt:Psi-momentmap",
    stream: 193,
    relative: false,
    tol: tol::MORPHISM,
};

const ALL_SPECS: [&RecordSpec; 21] = [
    &R_FINITE,
    &R_AFFINE,
    &R_GAMMA,
    &R_REDUCTION,
    &R_GERBE,
    &R_LB_COCYCLE,
    &R_LB_HOLONOMY,
    &R_LB_GAUGE,
    &R_HOL_LEMMAS,
    &R_VARPI_INV,
    &R_VARPI_TAN,
    &R_VARPI_D,
    &R_AMM_ID,
    &R_AMM_MORPH,
    &R_DELTA_ARROW,
    &R_DELTA_BASE,
    &R_QHAM_1,
    &R_QHAM_2,
    &R_QHAM_3,
    &R_MOMENT_COND,
    &R_MOMENT_ACT,
];

pub(crate) fn spec_of(label: &str) -> &'static RecordSpec {
    ALL_SPECS
        .into_iter()
        .find(|s| s.label == label)
        .unwrap_or_else(|| panic!("unknown record label {label:?}"))
}

/// Names a tolerance override may target: suite names and record labels.
pub fn known_tol_targets() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = SuiteKind::ALL.iter().map(|k| k.name()).collect();
    names.extend(ALL_SPECS.iter().map(|s| s.label));
    names
}

fn resolve_tol(spec: &RecordSpec, cfg: &RunConfig) -> f64 {
    if let Some(t) = cfg.tol_overrides.get(spec.label) {
        return *t;
    }
    let suite = spec.label.split('/').next().unwrap_or(spec.label);
    cfg.tol_overrides.get(suite).copied().unwrap_or(spec.tol)
}

fn timer(cfg: &RunConfig) -> Option<Instant> {
    cfg.timing.then(Instant::now)
}

fn finish(
    spec: &RecordSpec,
    cfg: &RunConfig,
    group: GroupKind,
    stats: &ResidualStats,
    order: Option<ConvOrder>,
    started: Option<Instant>,
) -> Record {
    let tolerance = resolve_tol(spec, cfg);
    let pass = if spec.relative { stats.max_rel <= tolerance } else { stats.max_abs <= tolerance };
    Record {
        suite: spec.label,
        paper_anchor: spec.anchor,
        group,
        grid_n: cfg.grid_n,
        trials: cfg.trials,
        max_residual: stats.max_abs,
        mean_residual: stats.mean_abs(),
        relative_max: stats.max_rel,
        convergence_order: order,
        tolerance,
        pass,
        runtime_ms: started.map(|s| s.elapsed().as_millis()).unwrap_or(0),
    }
}

type TrialRows = Result<Vec<(f64, f64)>, CoreError>;

/// Run `cfg.trials` independent trials of `body` on substreams of
/// `spec.stream`, merging `(residual, scale)` rows in trial order.
fn run_trials<F>(spec: &RecordSpec, cfg: &RunConfig, body: F) -> Result<ResidualStats, Failure>
where
    F: Fn(&mut TrialRng, u64) -> TrialRows + Sync,
{
    let results: Vec<TrialRows> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, spec.stream, t);
            body(&mut rng, t)
        })
        .collect();
    let mut stats = ResidualStats::new();
    for (t, rows) in results.into_iter().enumerate() {
        match rows {
            Ok(rows) => {
                for (r, s) in rows {
                    stats.record(r, s);
                }
            }
            Err(error) => {
                return Err(Failure {
                    record: spec.label,
                    stream: spec.stream,
                    trial: t as u64,
                    seed: cfg.seed,
                    error,
                })
            }
        }
    }
    Ok(stats)
}

fn finite_basics(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let started = timer(cfg);
    let stats = run_trials(&R_FINITE, cfg, |rng, _| {
        let x = rand_algebra(inst, rng);
        let y = rand_algebra(inst, rng);
        let z = rand_algebra(inst, rng);
        let g = rand_group(inst, rng);
        let h = rand_group(inst, rng);
        let xi = rand_covector(inst, rng);
        let mut out = Vec::with_capacity(14);

        // Bracket closure in the basis, and agreement with the structure
        // constants.
        let xm = x.to_matrix();
        let ym = y.to_matrix();
        let comm = &xm * &ym - &ym * &xm;
        let (coeffs, span_res) = inst.in_basis(&comm);
        out.push((span_res, 1.0));
        out.push(((&x.bracket(&y).coeffs - &coeffs).norm(), 1.0));

        // Antisymmetry and the Jacobi identity.
        out.push((x.bracket(&y).add(&y.bracket(&x)).norm(), 1.0));
        let jac = x
            .bracket(&y.bracket(&z))
            .add(&y.bracket(&z.bracket(&x)))
            .add(&z.bracket(&x.bracket(&y)));
        out.push((jac.norm(), 1.0));

        // exp lands on the group; Ad is a homomorphism matching conjugation.
        out.push((inst.exp(&x).membership_residual(), 1.0));
        out.push((g.mul(&h).adjoint(&x).sub(&g.adjoint(&h.adjoint(&x))).norm(), 1.0));
        let conj = g.matrix() * &xm * g.inverse().matrix();
        out.push(((g.adjoint(&x).to_matrix() - &conj).norm(), 1.0));

        // Coadjoint and ad-star duality against the pairing.
        out.push(((g.coadjoint(&xi).pair(&x) - xi.pair(&g.inverse().adjoint(&x))).abs(), 1.0));
        out.push(((y.ad_star(&xi).pair(&x) - xi.pair(&y.bracket(&x))).abs(), 1.0));

        // Maurer-Cartan forms against their defining translates.
        let lm = g.maurer_cartan_left(&(g.matrix() * &xm))?;
        out.push((lm.sub(&x).norm(), 1.0));
        let rm = g.maurer_cartan_right(&(&xm * g.matrix()))?;
        out.push((rm.sub(&x).norm(), 1.0));

        // Cartan 3-form: antisymmetric in the bracket slots always; fully
        // cyclic, with an Ad-invariant pairing, only where the pairing is
        // invariant.
        out.push(((cartan3(&x, &y, &z) + cartan3(&x, &z, &y)).abs(), 1.0));
        if inst.has_invariant_pairing() {
            out.push(((g.adjoint(&x).pair(&g.adjoint(&y)) - x.pair(&y)).abs(), 1.0));
            out.push(((cartan3(&x, &y, &z) - cartan3(&y, &z, &x)).abs(), 1.0));
        }
        Ok(out)
    })?;
    Ok(vec![finish(&R_FINITE, cfg, group, &stats, None, started)])
}

fn affine_poisson(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let started = timer(cfg);
    let stats = run_trials(&R_AFFINE, cfg, |rng, _| {
        let (lambda, chi) = cocycle_family(inst, rng)?;
        let v1 = rand_algebra(inst, rng);
        let v2 = rand_algebra(inst, rng);
        let v3 = rand_algebra(inst, rng);
        let xi = rand_covector(inst, rng);
        let g = rand_group(inst, rng);
        let h = rand_group(inst, rng);
        let k = rand_group(inst, rng);
        let mut out = Vec::with_capacity(7);
        out.push((lambda.antisymmetry_residual(), 1.0));
        out.push((lambda.cocycle_residual(), 1.0));
        out.push((jacobi_defect(&lambda, &v1, &v2, &v3, &xi).abs(), 1.0));
        out.push((chi.cocycle_law_residual(&g, &h), 1.0));
        out.push((integrability_residual(&lambda, &chi, &h, &v1, &v2).abs(), 1.0));
        let model = AffineModel::new(lambda, chi);
        out.push((axiom_residuals(&model, &g, &h, &k, &xi).max(), 1.0));
        Ok(out)
    })?;
    Ok(vec![finish(&R_AFFINE, cfg, group, &stats, None, started)])
}

fn gamma_groupoid(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let started = timer(cfg);
    let stats = run_trials(&R_GAMMA, cfg, |rng, _| {
        let (lambda, chi) = cocycle_family(inst, rng)?;
        let gg = GammaGroupoid::new(lambda, chi);
        let p = GammaPoint { g: rand_group(inst, rng), eta: rand_covector(inst, rng) };
        let t1 = GammaTangent { v: rand_algebra(inst, rng), zeta: rand_covector(inst, rng) };
        let t2 = GammaTangent { v: rand_algebra(inst, rng), zeta: rand_covector(inst, rng) };
        let mut out = Vec::with_capacity(6);

        // Antisymmetry of the groupoid form.
        let o12 = gg.omega(&p, &t1, &t2);
        out.push(((o12 + gg.omega(&p, &t2, &t1)).abs(), o12.abs().max(1.0)));

        // Symplectic realization: dense solve against the closed form, plus
        // the defining contraction.
        let v = rand_algebra(inst, rng);
        let sol = gg.realize(&p, &v)?;
        let cf = gg.realize_closed_form(&p, &v);
        out.push((sol.v.sub(&cf.v).norm().max(sol.zeta.sub(&cf.zeta).norm()), 1.0));
        out.push(((gg.omega(&p, &sol, &t1) - t1.zeta.pair(&v)).abs(), 1.0));

        // Multiplicativity over a composable pair.
        let gp = rand_group(inst, rng);
        let hp = rand_group(inst, rng);
        let eta = rand_covector(inst, rng);
        let mt1 = (rand_algebra(inst, rng), rand_algebra(inst, rng), rand_covector(inst, rng));
        let mt2 = (rand_algebra(inst, rng), rand_algebra(inst, rng), rand_covector(inst, rng));
        out.push((gg.multiplicativity_defect(&gp, &hp, &eta, &mt1, &mt2).abs(), 1.0));

        // The Hamiltonian-space specialization at lambda = 0: contraction of
        // the fundamental field equals the moment differential.
        let flat = GammaGroupoid::new(TwoCocycle::zero(inst), GroupCocycle::zero(inst));
        let u = rand_algebra(inst, rng);
        let rho = flat.rho(&p, &u);
        out.push(((flat.omega(&p, &rho, &t1) - flat.moment_differential(&p, &u, &t1)).abs(), 1.0));
        Ok(out)
    })?;
    Ok(vec![finish(&R_GAMMA, cfg, group, &stats, None, started)])
}

fn reduction(cfg: &RunConfig) -> Result<Vec<Record>, Failure> {
    let ext = CentralExtension::heisenberg_over_plane();
    let started = timer(cfg);
    let stats = run_trials(&R_REDUCTION, cfg, |rng, _| {
        let vt1 = rand_algebra(ext.ext(), rng);
        let vt2 = rand_algebra(ext.ext(), rng);
        let h = rand_group(ext.ext(), rng);
        let xi = rand_covector(ext.base(), rng);
        let t_level = rand_coeffs(1, rng)[0];
        let mut out = Vec::with_capacity(9);

        // Bracket through the extension against the cocycle route, and the
        // integrated cocycle against the extension's group cocycle.
        out.push((ext.bracket_route_residual(&vt1, &vt2), 1.0));
        let chi = integrate_cocycle(ext.lambda())?;
        out.push((ext.chi_from_extension(&h).sub(&chi.eval(&ext.project_group(&h))).norm(), 1.0));

        // Coadjoint level sets at the unit level and at a random level.
        for t in [1.0, t_level] {
            let (t_slot, center_inv, quotient) = ext.coadjoint_level_residuals(&h, &xi, t);
            out.push((t_slot, 1.0));
            out.push((center_inv, 1.0));
            out.push((quotient, 1.0));
        }

        // Split/join round trip on the algebra.
        let (v, r) = ext.split_alg(&vt1);
        out.push((ext.join_alg(&v, r).sub(&vt1).norm(), 1.0));
        Ok(out)
    })?;
    Ok(vec![finish(&R_REDUCTION, cfg, GroupKind::Heisenberg3, &stats, None, started)])
}

fn gerbe_curvature(cfg: &RunConfig) -> Result<Vec<Record>, Failure> {
    let ext = CentralExtension::heisenberg_over_plane();
    let started = timer(cfg);
    let stats = run_trials(&R_GERBE, cfg, |rng, _| {
        let gt = rand_group(ext.ext(), rng);
        let ht = rand_group(ext.ext(), rng);
        let eta = rand_covector(ext.ext(), rng);
        let t3 = (
            rand_algebra(ext.ext(), rng),
            rand_algebra(ext.ext(), rng),
            rand_covector(ext.ext(), rng),
        );
        let mut out = Vec::with_capacity(2);
        out.push((ext.partial_theta(&gt, &ht, &eta, &t3).abs(), 1.0));

        let h = rand_group(ext.ext(), rng);
        let xi = rand_covector(ext.base(), rng);
        let t1 = (rand_algebra(ext.ext(), rng), rand_covector(ext.base(), rng));
        let t2 = (rand_algebra(ext.ext(), rng), rand_covector(ext.base(), rng));
        out.push((ext.curvature_residual(&h, &xi, &t1, &t2, cfg.fd_step), 1.0));
        Ok(out)
    })?;
    Ok(vec![finish(&R_GERBE, cfg, GroupKind::Heisenberg3, &stats, None, started)])
}

fn loop_basics(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let grid = Grid::new(cfg.grid_n);
    let band = defaults::BAND_LIMIT;
    let mut records = Vec::with_capacity(3);

    // Loop cocycle: antisymmetry and the 2-cocycle identity. Both are exact
    // under the grid quadrature for band-limited data, so the budget is
    // rounding only.
    let started = timer(cfg);
    let stats = run_trials(&R_LB_COCYCLE, cfg, |rng, _| {
        let v = rand_algebra_loop(inst, grid, band, rng);
        let w = rand_algebra_loop(inst, grid, band, rng);
        let u = rand_algebra_loop(inst, grid, band, rng);
        let mut out = Vec::with_capacity(2);
        let c = loop_cocycle(&v, &w);
        out.push(((c + loop_cocycle(&w, &v)).abs(), c.abs().max(1.0)));
        let cyc = loop_cocycle(&bracket_loop(&v, &w), &u)
            + loop_cocycle(&bracket_loop(&w, &u), &v)
            + loop_cocycle(&bracket_loop(&u, &v), &w);
        out.push((cyc.abs(), 1.0));
        Ok(out)
    })?;
    records.push(finish(&R_LB_COCYCLE, cfg, group, &stats, None, started));

    // Holonomy ODE: constant-coefficient closed form, membership drift, and
    // projection corrections.
    let started = timer(cfg);
    let stats = run_trials(&R_LB_HOLONOMY, cfg, |rng, _| {
        let v = rand_algebra(inst, rng);
        let a = constant_connection(inst, grid, &v);
        let path = holonomy(&a, cfg.substeps)?;
        let expect = inst.exp(&v);
        Ok(vec![
            ((path.endpoint().matrix() - expect.matrix()).norm(), expect.matrix().norm()),
            (path.max_membership, 1.0),
            (path.max_correction, 1.0),
        ])
    })?;
    records.push(finish(&R_LB_HOLONOMY, cfg, group, &stats, None, started));

    // Gauge action groupoid: axioms, antisymmetry of the arrow form, and its
    // multiplicativity through the simplicial differential.
    let started = timer(cfg);
    let model = GaugeModel { inst, grid };
    let stats = run_trials(&R_LB_GAUGE, cfg, |rng, _| {
        let g1 = rand_loop(inst, grid, band, rng);
        let g2 = rand_loop(inst, grid, band, rng);
        let g3 = rand_loop(inst, grid, band, rng);
        let a = rand_connection(inst, grid, band, rng);
        let mut out = Vec::with_capacity(3);
        out.push((axiom_residuals(&model, &g1, &g2, &g3, &a).max(), 1.0));

        let p = LoopPoint::new(g1.clone(), a.clone());
        let t1 = rand_loop_tangent(inst, grid, band, rng);
        let t2 = rand_loop_tangent(inst, grid, band, rng);
        let o12 = omega_loop(&p, &t1, &t2);
        out.push(((o12 + omega_loop(&p, &t2, &t1)).abs(), o12.abs().max(1.0)));

        let pair = Pair::<GaugeModel> { g: g1, h: g2, b: a };
        let pt1 = PairTangent::<GaugeModel> {
            v: t1.v.clone(),
            w: rand_algebra_loop(inst, grid, band, rng),
            xi: t1.b.clone(),
        };
        let pt2 = PairTangent::<GaugeModel> {
            v: t2.v.clone(),
            w: rand_algebra_loop(inst, grid, band, rng),
            xi: t2.b.clone(),
        };
        let form = |g: &DiscreteLoop,
                    b: &DiscreteConnection,
                    s: &(AlgebraLoop, DiscreteConnection),
                    t: &(AlgebraLoop, DiscreteConnection)| {
            omega_loop(
                &LoopPoint::new(g.clone(), b.clone()),
                &LoopTangent::new(s.0.clone(), s.1.clone()),
                &LoopTangent::new(t.0.clone(), t.1.clone()),
            )
        };
        let defect = partial2_2(&model, &form, &pair, &pt1, &pt2);
        let pts = pair.face_points(&model);
        let fa = pair.face_tangents(&model, &pt1);
        let fb = pair.face_tangents(&model, &pt2);
        let scale = (0..3)
            .map(|i| form(&pts[i].0, &pts[i].1, &fa[i], &fb[i]).abs())
            .fold(1.0f64, f64::max);
        out.push((defect.abs(), scale));
        Ok(out)
    })?;
    records.push(finish(&R_LB_GAUGE, cfg, group, &stats, None, started));
    Ok(records)
}

fn holonomy_lemmas(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let grid = Grid::new(cfg.grid_n);
    let band = defaults::BAND_LIMIT;
    let started = timer(cfg);
    let stats = run_trials(&R_HOL_LEMMAS, cfg, |rng, _| {
        let a = rand_connection(inst, grid, band, rng);
        let gamma = rand_loop(inst, grid, band, rng);
        let path = holonomy(&a, cfg.substeps)?;
        let mut out = Vec::with_capacity(5);

        // Equivariance of the endpoint under the gauge action.
        let moved = holonomy(&gamma.gauge_action(&a)?, cfg.substeps)?;
        let g0 = gamma.at0();
        let conj = g0.matrix() * path.endpoint().matrix() * g0.inverse().matrix();
        out.push(((moved.endpoint().matrix() - &conj).norm(), conj.norm()));

        // The inversion lemma at every node, and its endpoint case.
        let ipath = holonomy(&a.inversion(), cfg.substeps)?;
        let hn_inv = path.endpoint().inverse();
        let mut node_res = 0.0f64;
        for k in 0..=grid.n() {
            let pred = path.points[grid.n() - k].matrix() * hn_inv.matrix();
            node_res = node_res.max((ipath.points[k].matrix() - pred).norm());
        }
        out.push((node_res, 1.0));
        out.push(((ipath.endpoint().matrix() - hn_inv.matrix()).norm(), 1.0));

        // Inversion-action compatibility and the gauge inverse law, both
        // exact bookkeeping on the stored derivatives.
        let sc = a.max_norm().max(1.0);
        let lhs = gamma.gauge_action(&a.inversion())?;
        let rhs = gamma.reverse().gauge_action(&a)?.inversion();
        out.push((lhs.sub(&rhs).max_norm(), sc));
        let back = gamma.inverse().gauge_action(&gamma.gauge_action(&a)?)?;
        out.push((back.sub(&a).max_norm(), sc));
        Ok(out)
    })?;
    Ok(vec![finish(&R_HOL_LEMMAS, cfg, group, &stats, None, started)])
}

fn varpi_suite(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let grid = Grid::new(cfg.grid_n);
    let band = defaults::BAND_LIMIT;
    let mut records = Vec::with_capacity(3);

    // Antisymmetry and the inversion pullback.
    let started = timer(cfg);
    let stats = run_trials(&R_VARPI_INV, cfg, |rng, _| {
        let a = rand_connection(inst, grid, band, rng);
        let b1 = rand_connection(inst, grid, band, rng);
        let b2 = rand_connection(inst, grid, band, rng);
        let path = holonomy(&a, cfg.substeps)?;
        let v12 = varpi(&path, &b1, &b2);
        let ipath = holonomy(&a.inversion(), cfg.substeps)?;
        let iv = varpi(&ipath, &b1.inversion(), &b2.inversion());
        Ok(vec![
            ((varpi(&path, &b2, &b1) + v12).abs(), v12.abs()),
            ((iv + v12).abs(), v12.abs()),
        ])
    })?;
    records.push(finish(&R_VARPI_INV, cfg, group, &stats, None, started));

    // First variation of holonomy against a central-difference oracle at
    // four nodes along the path.
    let started = timer(cfg);
    let stats = run_trials(&R_VARPI_TAN, cfg, |rng, _| {
        let a = rand_connection(inst, grid, band, rng);
        let b = rand_connection(inst, grid, band, rng);
        let path = holonomy(&a, cfg.substeps)?;
        let v = holonomy_tangent(&path, &b);
        let h = cfg.fd_step;
        let plus = holonomy(&a.add(&b.scale(h)), cfg.substeps)?;
        let minus = holonomy(&a.sub(&b.scale(h)), cfg.substeps)?;
        let n = grid.n();
        let mut out = Vec::with_capacity(4);
        for k in [n / 4, n / 2, 3 * n / 4, n] {
            let fd = (plus.points[k].matrix() - minus.points[k].matrix())
                .map(|z| z / Complex64::from(2.0 * h));
            let lifted = path.points[k].inverse().matrix() * fd;
            let expect = inst.alg(v[k].clone()).to_matrix();
            out.push(((lifted - &expect).norm(), expect.norm().max(1.0)));
        }
        Ok(out)
    })?;
    records.push(finish(&R_VARPI_TAN, cfg, group, &stats, None, started));

    // FD exterior derivative of varpi against the pulled-back Cartan 3-form,
    // with the stencil order fitted on a step pair clear of the
    // discretization floor.
    let started = timer(cfg);
    let draw = |rng: &mut TrialRng| {
        (
            rand_connection(inst, grid, band, rng),
            rand_connection(inst, grid, band, rng),
            rand_connection(inst, grid, band, rng),
            rand_connection(inst, grid, band, rng),
        )
    };
    let stats = run_trials(&R_VARPI_D, cfg, |rng, _| {
        let (a, b1, b2, b3) = draw(rng);
        let (r, s) = d_varpi_residual(&a, &b1, &b2, &b3, cfg.substeps, cfg.fd_step)?;
        Ok(vec![(r, s)])
    })?;
    let order = fd_order(cfg, &R_VARPI_D, &draw)?;
    records.push(finish(&R_VARPI_D, cfg, group, &stats, Some(order), started));
    Ok(records)
}

fn fd_order<F>(cfg: &RunConfig, spec: &RecordSpec, draw: &F) -> Result<ConvOrder, Failure>
where
    F: Fn(&mut TrialRng) -> (DiscreteConnection, DiscreteConnection, DiscreteConnection, DiscreteConnection)
        + Sync,
{
    let (coarse, fine) = FD_ORDER_STEPS;
    let trials = cfg.trials.min(ORDER_TRIALS);
    let rows: Vec<Result<(f64, f64), CoreError>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, spec.stream, t);
            let (a, b1, b2, b3) = draw(&mut rng);
            let rel = |h: f64| -> Result<f64, CoreError> {
                let (r, s) = d_varpi_residual(&a, &b1, &b2, &b3, cfg.substeps, h)?;
                Ok(r / s.max(SCALE_FLOOR))
            };
            Ok((rel(coarse)?, rel(fine)?))
        })
        .collect();
    let mut mc = 0.0;
    let mut mf = 0.0;
    for (t, row) in rows.into_iter().enumerate() {
        match row {
            Ok((c, f)) => {
                mc += c / trials as f64;
                mf += f / trials as f64;
            }
            Err(error) => {
                return Err(Failure {
                    record: spec.label,
                    stream: spec.stream,
                    trial: t as u64,
                    seed: cfg.seed,
                    error,
                })
            }
        }
    }
    if mf < SATURATION_FLOOR {
        return Ok(ConvOrder::Saturated);
    }
    Ok(ConvOrder::Value((mc / mf).ln() / (coarse / fine).ln()))
}

/// Magnitude of a loop tangent. The chain scalars are bilinear in the two
/// tangents, so their defects are compared against the larger of the route
/// magnitude and the product of tangent magnitudes; the route terms alone
/// can cancel to near zero on honest draws, which would turn a quadrature
/// floor into a spurious relative spike.
fn tangent_mag(t: &LoopTangent) -> f64 {
    t.v.max_norm().max(t.b.max_norm())
}

fn amm_equivalence(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let grid = Grid::new(cfg.grid_n);
    let band = defaults::BAND_LIMIT;
    let mut records = Vec::with_capacity(2);

    // The equivalence identity and its two rewritings, reported as the worst
    // of the three pairwise route gaps, with the grid-refinement order fitted
    // on the same draws at the two coarser resolutions.
    let started = timer(cfg);
    let stats = run_trials(&R_AMM_ID, cfg, |rng, _| {
        let (p, t1, t2) = draw_arrow(inst, SMOOTH_BAND, rng).build(grid);
        let lab = ArrowLab::new(p, cfg.substeps)?;
        let c = lab.chain_sample(&t1, &t2);
        let worst = c
            .equivalence_defect()
            .abs()
            .max(c.coboundary_defect().abs())
            .max(c.inversion_defect().abs());
        Ok(vec![(worst, c.scale().max(tangent_mag(&t1) * tangent_mag(&t2)))])
    })?;
    let order = grid_order(cfg, &R_AMM_ID, |rng, g, substeps| {
        let (p, t1, t2) = draw_arrow(inst, SMOOTH_BAND, rng).build(g);
        let lab = ArrowLab::new(p, substeps)?;
        let c = lab.chain_sample(&t1, &t2);
        let worst = c
            .equivalence_defect()
            .abs()
            .max(c.coboundary_defect().abs())
            .max(c.inversion_defect().abs());
        let scale = c.scale().max(tangent_mag(&t1) * tangent_mag(&t2));
        Ok(worst / scale.max(SCALE_FLOOR))
    })?;
    records.push(finish(&R_AMM_ID, cfg, group, &stats, order, started));

    // Morphism compatibilities of the holonomy map into the double.
    let started = timer(cfg);
    let stats = run_trials(&R_AMM_MORPH, cfg, |rng, _| {
        let g1 = rand_loop(inst, grid, band, rng);
        let g2 = rand_loop(inst, grid, band, rng);
        let a = rand_connection(inst, grid, band, rng);
        let s = f_morphism_sample(&g1, &g2, &a, cfg.substeps)?;
        Ok(vec![(s.target_compat, 1.0), (s.mult_exact, 1.0), (s.moment_square, 1.0)])
    })?;
    records.push(finish(&R_AMM_MORPH, cfg, group, &stats, None, started));
    Ok(records)
}

/// Fit a grid-refinement order by re-running `rel_at` on the same substream
/// draws at two coarser resolutions (half and quarter grid when available).
fn grid_order<F>(
    cfg: &RunConfig,
    spec: &RecordSpec,
    rel_at: F,
) -> Result<Option<ConvOrder>, Failure>
where
    F: Fn(&mut TrialRng, Grid, usize) -> Result<f64, CoreError> + Sync,
{
    let (coarse_n, fine_n) = if cfg.grid_n / 4 >= 32 {
        (cfg.grid_n / 4, cfg.grid_n / 2)
    } else if cfg.grid_n / 2 >= 32 {
        (cfg.grid_n / 2, cfg.grid_n)
    } else {
        return Ok(None);
    };
    let trials = cfg.trials.min(ORDER_TRIALS);
    let rows: Vec<Result<(f64, f64), CoreError>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, spec.stream, t);
            let rc = rel_at(&mut rng, Grid::new(coarse_n), cfg.substeps)?;
            let mut rng = rng_for(cfg.seed, spec.stream, t);
            let rf = rel_at(&mut rng, Grid::new(fine_n), cfg.substeps)?;
            Ok((rc, rf))
        })
        .collect();
    let mut mc = 0.0;
    let mut mf = 0.0;
    for (t, row) in rows.into_iter().enumerate() {
        match row {
            Ok((c, f)) => {
                mc += c / trials as f64;
                mf += f / trials as f64;
            }
            Err(error) => {
                return Err(Failure {
                    record: spec.label,
                    stream: spec.stream,
                    trial: t as u64,
                    seed: cfg.seed,
                    error,
                })
            }
        }
    }
    if mf < SATURATION_FLOOR {
        return Ok(Some(ConvOrder::Saturated));
    }
    let ratio = fine_n as f64 / coarse_n as f64;
    Ok(Some(ConvOrder::Value((mc / mf).ln() / ratio.ln())))
}

fn delta_cocycle(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let grid = Grid::new(cfg.grid_n);
    let band = defaults::BAND_LIMIT;
    let mut records = Vec::with_capacity(2);

    // Arrow component: the coboundary rewriting alone.
    let started = timer(cfg);
    let stats = run_trials(&R_DELTA_ARROW, cfg, |rng, _| {
        let (p, t1, t2) = draw_arrow(inst, SMOOTH_BAND, rng).build(grid);
        let lab = ArrowLab::new(p, cfg.substeps)?;
        let c = lab.chain_sample(&t1, &t2);
        let scale = c.scale().max(tangent_mag(&t1) * tangent_mag(&t2));
        Ok(vec![(c.coboundary_defect().abs(), scale)])
    })?;
    records.push(finish(&R_DELTA_ARROW, cfg, group, &stats, None, started));

    // Base component: the FD exterior-derivative identity on connections.
    let started = timer(cfg);
    let stats = run_trials(&R_DELTA_BASE, cfg, |rng, _| {
        let a = rand_connection(inst, grid, band, rng);
        let b1 = rand_connection(inst, grid, band, rng);
        let b2 = rand_connection(inst, grid, band, rng);
        let b3 = rand_connection(inst, grid, band, rng);
        let (r, s) = d_varpi_residual(&a, &b1, &b2, &b3, cfg.substeps, cfg.fd_step)?;
        Ok(vec![(r, s)])
    })?;
    records.push(finish(&R_DELTA_BASE, cfg, group, &stats, None, started));
    Ok(records)
}

fn qham(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let mut records = Vec::with_capacity(3);

    let started = timer(cfg);
    let stats = run_trials(&R_QHAM_1, cfg, |rng, _| {
        let at = rand_dpoint(inst, rng);
        let t1 = rand_dtangent(inst, rng);
        let t2 = rand_dtangent(inst, rng);
        let t3 = rand_dtangent(inst, rng);
        let (r, s) = qham_axiom1_residual(&at, &t1, &t2, &t3, cfg.fd_step);
        Ok(vec![(r, s)])
    })?;
    records.push(finish(&R_QHAM_1, cfg, group, &stats, None, started));

    let started = timer(cfg);
    let stats = run_trials(&R_QHAM_2, cfg, |rng, _| {
        let at = rand_dpoint(inst, rng);
        let v1 = rand_algebra(inst, rng);
        let v2 = rand_algebra(inst, rng);
        let t = rand_dtangent(inst, rng);
        let (r, s) = qham_axiom2_residual(&at, &v1, &v2, &t);
        Ok(vec![(r, s)])
    })?;
    records.push(finish(&R_QHAM_2, cfg, group, &stats, None, started));

    // Kernel agreement: the residual is the largest principal angle between
    // ker(omega) and the predicted span (pi/2 when dimensions disagree).
    let started = timer(cfg);
    let mut stats = run_trials(&R_QHAM_3, cfg, |rng, _| {
        let at = rand_dpoint(inst, rng);
        Ok(vec![(qham_axiom3(&at).max_angle, 1.0)])
    })?;
    // A deliberately degenerate batch on the instances where Ad reaches the
    // -1 eigenvalue: the second slot sits at a half-turn, dropping the rank
    // of Ad_mu + 1.
    if matches!(group, GroupKind::Su2 | GroupKind::So3) {
        let degenerate: Vec<f64> = (0..DEGENERATE_TRIALS)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(cfg.seed, R_QHAM_3.stream, DEGENERATE_BASE + i);
                let x = rand_group(inst, &mut rng);
                let y = inst.exp(&inst.basis_element(2).scale(std::f64::consts::PI));
                qham_axiom3(&DPoint::new(x, y)).max_angle
            })
            .collect();
        for r in degenerate {
            stats.record_abs(r);
        }
    }
    records.push(finish(&R_QHAM_3, cfg, group, &stats, None, started));
    Ok(records)
}

fn moment(cfg: &RunConfig, group: GroupKind) -> Result<Vec<Record>, Failure> {
    let inst = instance(group);
    let grid = Grid::new(cfg.grid_n);
    let band = defaults::BAND_LIMIT;
    let mut records = Vec::with_capacity(2);

    // The moment condition for each generator family alone and combined,
    // plus the route agreement of the contraction.
    let started = timer(cfg);
    let stats = run_trials(&R_MOMENT_COND, cfg, |rng, _| {
        let p = rand_loop_point(inst, grid, SMOOTH_BAND, rng);
        let lab = ArrowLab::new(p, cfg.substeps)?;
        let u = rand_algebra_loop(inst, grid, SMOOTH_BAND, rng);
        let w = rand_algebra_loop(inst, grid, SMOOTH_BAND, rng);
        let t = rand_loop_tangent(inst, grid, SMOOTH_BAND, rng);
        let zero = AlgebraLoop::zero(inst, grid);
        let mut out = Vec::with_capacity(6);
        for (uu, ww) in [(&u, &zero), (&zero, &w), (&u, &w)] {
            let s = moment_sample(&lab, uu, ww, &t)?;
            // The condition is bilinear in (generator pair, test tangent);
            // guard the denominator the same way as the chain records.
            let gen_mag = uu.max_norm().max(ww.max_norm());
            let scale = s.scale.max(gen_mag * tangent_mag(&t));
            out.push((s.condition, scale));
            out.push((s.route, scale));
        }
        Ok(out)
    })?;
    records.push(finish(&R_MOMENT_COND, cfg, group, &stats, None, started));

    // The two-sided action: composition law and equivariance of the moment.
    let started = timer(cfg);
    let stats = run_trials(&R_MOMENT_ACT, cfg, |rng, _| {
        let g1 = rand_loop(inst, grid, band, rng);
        let g2 = rand_loop(inst, grid, band, rng);
        let h1 = rand_loop(inst, grid, band, rng);
        let h2 = rand_loop(inst, grid, band, rng);
        let p = rand_loop_point(inst, grid, band, rng);
        let s = lg2_action_sample((&g1, &g2), (&h1, &h2), &p)?;
        Ok(vec![(s.action_law, 1.0), (s.equivariance, 1.0)])
    })?;
    records.push(finish(&R_MOMENT_ACT, cfg, group, &stats, None, started));
    Ok(records)
}

/// Run one suite, producing its records in label order. The pinned suites
/// ignore the requested group and run on their own instance.
pub fn run_suite(kind: SuiteKind, cfg: &RunConfig) -> Result<Vec<Record>, Failure> {
    let group = kind.pinned_group().unwrap_or(cfg.group);
    match kind {
        SuiteKind::FiniteBasics => finite_basics(cfg, group),
        SuiteKind::AffinePoisson => affine_poisson(cfg, group),
        SuiteKind::GammaGroupoid => gamma_groupoid(cfg, group),
        SuiteKind::Reduction => reduction(cfg),
        SuiteKind::GerbeCurvature => gerbe_curvature(cfg),
        SuiteKind::LoopBasics => loop_basics(cfg, group),
        SuiteKind::HolonomyLemmas => holonomy_lemmas(cfg, group),
        SuiteKind::Varpi => varpi_suite(cfg, group),
        SuiteKind::AmmEquivalence => amm_equivalence(cfg, group),
        SuiteKind::DeltaCocycle => delta_cocycle(cfg, group),
        SuiteKind::Qham => qham(cfg, group),
        SuiteKind::Moment => moment(cfg, group),
    }
}

/// Everything a run produced: records in suite order, plus the suites `all`
/// skipped on this group (with the reason).
pub struct Outcome {
    pub records: Vec<Record>,
    pub skipped: Vec<(SuiteKind, String)>,
}

pub enum RunError {
    /// The explicitly requested (suite, group) pair is not runnable.
    Unsupported(SuiteKind, String),
    /// A trial hit a numerical gate (step size, conditioning, membership).
    Numerical(Failure),
}

/// Execute the configured selection. Under `all`, pinned suites run on their
/// own instance and unsupported pairs are skipped with a notice; an explicit
/// unsupported pair is an error.
pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut kinds = Vec::new();
    let mut skipped = Vec::new();
    match cfg.suite {
        crate::config::SuiteSel::One(k) => {
            if let Some(msg) = k.unsupported(cfg.group) {
                return Err(RunError::Unsupported(k, msg));
            }
            kinds.push(k);
        }
        crate::config::SuiteSel::All => {
            for k in SuiteKind::ALL {
                if k.pinned_group().is_some() {
                    kinds.push(k);
                } else if let Some(msg) = k.unsupported(cfg.group) {
                    skipped.push((k, msg));
                } else {
                    kinds.push(k);
                }
            }
        }
    }
    let mut records = Vec::new();
    for kind in kinds {
        records.extend(run_suite(kind, cfg).map_err(RunError::Numerical)?);
    }
    Ok(Outcome { records, skipped })
}
