//! Report records and their byte-stable rendering.
//!
//! A run emits one record per residual family, in a fixed order with a fixed
//! field layout, so that identical configurations produce byte-identical
//! documents. Floating-point fields print with `{:.17e}`, which round-trips
//! `f64` exactly and is platform-independent.

use std::fmt::Write as _;

use symgrpd_core::lie::GroupKind;

/// Fitted convergence behavior attached to a record or study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvOrder {
    Value(f64),
    /// Residuals sit at rounding level on every resolution, so no order is
    /// observable. Reported as `saturated`; not a failure.
    Saturated,
}

impl ConvOrder {
    pub fn render(self) -> String {
        match self {
            ConvOrder::Value(v) => format!("{v:.17e}"),
            ConvOrder::Saturated => "saturated".to_string(),
        }
    }
}

/// One verification record: the residual summary of a single check family.
#[derive(Clone, Debug)]
pub struct Record {
    pub suite: &'static str,
    pub paper_anchor: &'static str,
    pub group: GroupKind,
    pub grid_n: usize,
    pub trials: u64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub relative_max: f64,
    pub convergence_order: Option<ConvOrder>,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: u128,
}

impl Record {
    /// One-line summary for terminal output.
    pub fn summary_line(&self) -> String {
        format!(
            "{} {:<28} max {:.3e}  rel {:.3e}  tol {:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.max_residual,
            self.relative_max,
            self.tolerance,
        )
    }
}

fn render_record(out: &mut String, r: &Record) {
    writeln!(out, "suite = {}", r.suite).unwrap();
    writeln!(out, "paper_anchor = {}", r.paper_anchor).unwrap();
    writeln!(out, "group = {}", r.group.name()).unwrap();
    writeln!(out, "grid_n = {}", r.grid_n).unwrap();
    writeln!(out, "trials = {}", r.trials).unwrap();
    writeln!(out, "max_residual = {:.17e}", r.max_residual).unwrap();
    writeln!(out, "mean_residual = {:.17e}", r.mean_residual).unwrap();
    writeln!(out, "relative_max = {:.17e}", r.relative_max).unwrap();
    if let Some(order) = r.convergence_order {
        writeln!(out, "convergence_order = {}", order.render()).unwrap();
    }
    writeln!(out, "tolerance = {:.17e}", r.tolerance).unwrap();
    writeln!(out, "pass = {}", r.pass).unwrap();
    writeln!(out, "runtime_ms = {}", r.runtime_ms).unwrap();
}

/// The full run report: a two-line header, then one block per record.
pub fn render_report(config_echo: &str, records: &[Record]) -> String {
    let mut out = String::new();
    out.push_str("# symgrpd verification report\n");
    writeln!(out, "# config: {config_echo}").unwrap();
    for r in records {
        out.push('\n');
        render_record(&mut out, r);
    }
    out
}

/// One sampled point of a convergence study: a pre-rendered axis value and
/// the residual measured there.
#[derive(Clone, Debug)]
pub struct StudyPoint {
    pub axis_value: String,
    pub residual: f64,
}

/// A convergence study row for one record label.
#[derive(Clone, Debug)]
pub struct StudyRow {
    pub suite: &'static str,
    pub paper_anchor: &'static str,
    pub group: GroupKind,
    /// `grid_n` or `fd_step`.
    pub axis: &'static str,
    pub points: Vec<StudyPoint>,
    /// Least-squares slope of `ln(residual)` against `ln(axis)`: negative for
    /// grid refinement, near the stencil order for finite-difference steps.
    pub slope: ConvOrder,
}

/// The convergence-study report.
pub fn render_study(config_echo: &str, rows: &[StudyRow]) -> String {
    let mut out = String::new();
    out.push_str("# symgrpd convergence study\n");
    writeln!(out, "# config: {config_echo}").unwrap();
    for row in rows {
        out.push('\n');
        writeln!(out, "suite = {}", row.suite).unwrap();
        writeln!(out, "paper_anchor = {}", row.paper_anchor).unwrap();
        writeln!(out, "group = {}", row.group.name()).unwrap();
        writeln!(out, "axis = {}", row.axis).unwrap();
        for p in &row.points {
            writeln!(out, "point = {} residual = {:.17e}", p.axis_value, p.residual).unwrap();
        }
        writeln!(out, "slope = {}", row.slope.render()).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> Record {
        Record {
            suite: "qham/axiom2",
            paper_anchor: "sec4.1: Def. q-Hamiltonian(2)",
            group: GroupKind::Su2,
            grid_n: 256,
            trials: 100,
            max_residual: 3.25e-13,
            mean_residual: 1.0e-13,
            relative_max: 2.0e-13,
            convergence_order: None,
            tolerance: 1e-10,
            pass: true,
            runtime_ms: 0,
        }
    }

    #[test]
    fn field_order_is_fixed_and_optional_order_is_omitted() {
        let doc = render_report("suite=qham group=su2", &[sample_record()]);
        let keys: Vec<&str> = doc
            .lines()
            .skip(3)
            .map(|l| l.split(" = ").next().unwrap())
            .collect();
        assert_eq!(
            keys,
            [
                "suite",
                "paper_anchor",
                "group",
                "grid_n",
                "trials",
                "max_residual",
                "mean_residual",
                "relative_max",
                "tolerance",
                "pass",
                "runtime_ms"
            ]
        );

        let mut with_order = sample_record();
        with_order.convergence_order = Some(ConvOrder::Value(3.9));
        let doc = render_report("c", &[with_order]);
        assert!(doc.contains(&format!("convergence_order = {:.17e}", 3.9)));
        let mut saturated = sample_record();
        saturated.convergence_order = Some(ConvOrder::Saturated);
        let doc = render_report("c", &[saturated]);
        assert!(doc.contains("convergence_order = saturated"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let records = [sample_record(), sample_record()];
        assert_eq!(render_report("x", &records), render_report("x", &records));
    }
}
