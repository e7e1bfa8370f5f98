//! Convergence studies: rerun a suite's drivers across grid resolutions or
//! finite-difference steps and fit the log-log slope of each record's
//! residual against the axis.
//!
//! Grid slopes come out negative (residual decays as the grid refines); FD
//! slopes come out positive (the stencil error shrinks with the step, so
//! residual vs step has the stencil's order as its slope). Rows whose
//! residuals sit below the saturation floor at every point report
//! `saturated` instead of a slope fitted to rounding noise.

use rayon::prelude::*;

use symgrpd_core::lie::instance;
use symgrpd_core::loops::{holonomy, DiscreteConnection, Grid};
use symgrpd_core::sample::{connection_amp, rand_trig_poly, rng_for};

use crate::config::RunConfig;
use crate::report::{ConvOrder, StudyPoint, StudyRow};
use crate::suites::{run_suite, spec_of, Failure, SuiteKind, SATURATION_FLOOR};

/// Trials per study point; studies fit means, so a small ensemble suffices.
const STUDY_TRIALS: u64 = 10;

/// Substream for the holonomy refinement driver (the record's own stream
/// feeds its constant-coefficient ensemble, which saturates).
const HOLONOMY_STUDY_STREAM: u32 = 99;

/// Band of the refinement driver's connections: low enough that the RK4
/// signal stays clear of rounding across the study range.
const HOLONOMY_STUDY_BAND: usize = 3;

/// Least-squares slope of `ln r` against `ln x`.
pub fn fit_order(xs: &[f64], rs: &[f64]) -> ConvOrder {
    assert!(xs.len() == rs.len() && xs.len() >= 2, "a slope fit needs at least two points");
    if rs.iter().all(|&r| r < SATURATION_FLOOR) {
        return ConvOrder::Saturated;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = rs.iter().map(|r| r.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    ConvOrder::Value(num / den)
}

/// Records of `kind` whose residual is driven by the FD step.
pub fn fd_labels(kind: SuiteKind) -> &'static [&'static str] {
    match kind {
        SuiteKind::GerbeCurvature => &["gerbe-curvature"],
        SuiteKind::Varpi => &["varpi/tangent-oracle", "varpi/d-varpi"],
        SuiteKind::DeltaCocycle => &["delta-cocycle/base"],
        SuiteKind::Qham => &["qham/axiom1"],
        _ => &[],
    }
}

fn new_row(label: &str, group: symgrpd_core::lie::GroupKind, axis: &'static str) -> StudyRow {
    let spec = spec_of(label);
    StudyRow {
        suite: spec.label,
        paper_anchor: spec.anchor,
        group,
        axis,
        points: Vec::new(),
        slope: ConvOrder::Value(0.0),
    }
}

fn record_residual(records: &[crate::report::Record], label: &str) -> f64 {
    let rec = records
        .iter()
        .find(|r| r.suite == label)
        .unwrap_or_else(|| panic!("suite run did not produce record {label:?}"));
    if spec_of(label).relative {
        rec.relative_max
    } else {
        rec.max_residual
    }
}

/// Rerun `kind` at each resolution and fit each record's slope. The
/// holonomy record swaps in a refinement driver: its own ensemble is the
/// constant-coefficient closed form, which saturates at every resolution, so
/// the study instead measures endpoint error of time-varying connections
/// against a fine-grid reference.
pub fn grid_study(
    kind: SuiteKind,
    cfg: &RunConfig,
    resolutions: &[usize],
) -> Result<Vec<StudyRow>, Failure> {
    let group = kind.pinned_group().unwrap_or(cfg.group);
    let mut rows: Vec<StudyRow> =
        kind.record_labels().iter().map(|l| new_row(l, group, "grid_n")).collect();
    let holonomy_res = (kind == SuiteKind::LoopBasics)
        .then(|| holonomy_grid_residuals(cfg, resolutions))
        .transpose()?;
    for (i, &n) in resolutions.iter().enumerate() {
        let mut at_n = cfg.clone();
        at_n.grid_n = n;
        let records = run_suite(kind, &at_n)?;
        for row in rows.iter_mut() {
            let residual = match (&holonomy_res, row.suite) {
                (Some(res), "loop-basics/holonomy") => res[i],
                _ => record_residual(&records, row.suite),
            };
            row.points.push(StudyPoint { axis_value: n.to_string(), residual });
        }
    }
    let xs: Vec<f64> = resolutions.iter().map(|&n| n as f64).collect();
    for row in rows.iter_mut() {
        let rs: Vec<f64> = row.points.iter().map(|p| p.residual).collect();
        row.slope = fit_order(&xs, &rs);
    }
    Ok(rows)
}

/// Rerun the FD-sensitive records of `kind` at each step and fit slopes.
pub fn fd_study(
    kind: SuiteKind,
    cfg: &RunConfig,
    steps: &[f64],
) -> Result<Vec<StudyRow>, Failure> {
    let group = kind.pinned_group().unwrap_or(cfg.group);
    let mut rows: Vec<StudyRow> =
        fd_labels(kind).iter().map(|l| new_row(l, group, "fd_step")).collect();
    for &h in steps {
        let mut at_h = cfg.clone();
        at_h.fd_step = h;
        let records = run_suite(kind, &at_h)?;
        for row in rows.iter_mut() {
            let residual = record_residual(&records, row.suite);
            row.points.push(StudyPoint { axis_value: format!("{h:e}"), residual });
        }
    }
    for row in rows.iter_mut() {
        let rs: Vec<f64> = row.points.iter().map(|p| p.residual).collect();
        row.slope = fit_order(steps, &rs);
    }
    Ok(rows)
}

/// Mean relative endpoint error at each resolution against a reference
/// computed on a grid at least four times finer, with extra substeps so the
/// reference's own error is negligible at the fine end of the study.
fn holonomy_grid_residuals(cfg: &RunConfig, resolutions: &[usize]) -> Result<Vec<f64>, Failure> {
    let inst = instance(cfg.group);
    let max_n = resolutions.iter().copied().max().expect("at least one resolution");
    let ref_grid = Grid::new((4 * max_n).max(1024));
    let ref_substeps = cfg.substeps.max(8);
    let trials = cfg.trials.min(STUDY_TRIALS);
    let rows: Vec<Result<Vec<f64>, symgrpd_core::Error>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, HOLONOMY_STUDY_STREAM, t);
            let poly = rand_trig_poly(inst.dim(), HOLONOMY_STUDY_BAND, &mut rng, connection_amp);
            let reference = holonomy(
                &DiscreteConnection::from_trig(inst, ref_grid, &poly),
                ref_substeps,
            )?;
            let target = reference.endpoint().matrix().clone();
            let scale = target.norm();
            let mut per_res = Vec::with_capacity(resolutions.len());
            for &n in resolutions {
                let path = holonomy(
                    &DiscreteConnection::from_trig(inst, Grid::new(n), &poly),
                    cfg.substeps,
                )?;
                per_res.push((path.endpoint().matrix() - &target).norm() / scale);
            }
            Ok(per_res)
        })
        .collect();
    let mut means = vec![0.0f64; resolutions.len()];
    for (t, row) in rows.into_iter().enumerate() {
        match row {
            Ok(per_res) => {
                for (m, r) in means.iter_mut().zip(per_res) {
                    *m += r / trials as f64;
                }
            }
            Err(error) => {
                return Err(Failure {
                    record: "loop-basics/holonomy",
                    stream: HOLONOMY_STUDY_STREAM,
                    trial: t as u64,
                    seed: cfg.seed,
                    error,
                })
            }
        }
    }
    Ok(means)
}
