//! Command-line entry point: parse flags, resolve the configuration, run the
//! requested suites or studies, and map outcomes to exit codes.
//!
//! Exit codes: 0 when every record passes (or a study completes), 1 when a
//! record misses its tolerance, 2 when the requested suite/group pair is not
//! runnable, 3 when a numerical gate trips (a replay path goes to stderr),
//! and 64 for usage or configuration errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use symgrpd_cli::config::{ConfigError, RunConfig, SuiteSel};
use symgrpd_cli::convergence::{fd_labels, fd_study, grid_study};
use symgrpd_cli::report::{render_report, render_study, Record, StudyRow};
use symgrpd_cli::suites::{run, RunError};

const EXIT_TOLERANCE: u8 = 1;
const EXIT_UNSUPPORTED: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "symgrpd",
    version,
    about = "Seeded numerical verification of the symplectic groupoid and loop-group identity suites"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one suite (or all of them) and emit the verification report.
    Run(RunArgs),
    /// Measure residual decay across grid resolutions or FD steps.
    Convergence(ConvArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Suite name, or `all`.
    #[arg(long, value_name = "NAME")]
    suite: Option<String>,

    /// Group instance: su2, so3, torus2, abelian2, heisenberg3.
    #[arg(long, value_name = "NAME")]
    group: Option<String>,

    /// Loop grid size: a power of two, at least 32.
    #[arg(long = "grid-n", value_name = "N")]
    grid_n: Option<usize>,

    /// RK4 substeps per grid interval.
    #[arg(long, value_name = "K")]
    substeps: Option<usize>,

    /// Seeded trials per record.
    #[arg(long, value_name = "T")]
    trials: Option<u64>,

    /// Base seed for the per-record substreams.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Tolerance override `name=value`, repeatable; a record label
    /// (`varpi/d-varpi`) wins over its suite name (`varpi`).
    #[arg(long = "tol", value_name = "NAME=TOL")]
    tol: Vec<String>,

    /// Step for the finite-difference records.
    #[arg(long = "fd-step", value_name = "H")]
    fd_step: Option<f64>,

    /// Write the full document here; stdout then carries one summary line
    /// per record.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,

    /// Measure wall time per record (timed reports are not byte-stable).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ConvArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated grid resolutions, e.g. 64,128,256.
    #[arg(long, value_name = "N,N,...")]
    resolutions: Option<String>,

    /// Comma-separated FD steps, e.g. 1e-3,1e-4.
    #[arg(long = "fd-steps", value_name = "H,H,...")]
    fd_steps: Option<String>,
}

fn build_config(common: &CommonArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    if let Some(s) = &common.suite {
        cfg.set("suite", s)?;
    }
    if let Some(g) = &common.group {
        cfg.set("group", g)?;
    }
    if let Some(n) = common.grid_n {
        cfg.grid_n = n;
    }
    if let Some(k) = common.substeps {
        cfg.substeps = k;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    for item in &common.tol {
        cfg.add_tol(item)?;
    }
    if let Some(h) = common.fd_step {
        cfg.fd_step = h;
    }
    cfg.timing = common.timing;
    cfg.validate()?;
    Ok(cfg)
}

/// Honor `VERIFY_THREADS`: unset, empty, or 0 leaves the worker pool at its
/// automatic size. Results are merged in trial order either way, so the
/// setting affects wall time only.
fn init_threads() -> Result<(), ConfigError> {
    match std::env::var("VERIFY_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let raw = raw.trim().to_string();
            if raw.is_empty() {
                return Ok(());
            }
            let n: usize = raw
                .parse()
                .map_err(|_| ConfigError(format!("VERIFY_THREADS must be an integer, got {raw:?}")))?;
            if n == 0 {
                return Ok(());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| ConfigError(format!("cannot size the worker pool: {e}")))
        }
    }
}

fn usage(err: &ConfigError) -> u8 {
    eprintln!("error: {err}");
    EXIT_USAGE
}

fn write_or_print(target: &Option<PathBuf>, doc: &str, summaries: &[String]) -> Result<(), u8> {
    match target {
        Some(path) => {
            if let Err(e) = fs::write(path, doc) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return Err(EXIT_USAGE);
            }
            for line in summaries {
                println!("{line}");
            }
        }
        None => print!("{doc}"),
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> u8 {
    let cfg = match build_config(&args.common) {
        Ok(cfg) => cfg,
        Err(e) => return usage(&e),
    };
    let outcome = match run(&cfg) {
        Ok(outcome) => outcome,
        Err(RunError::Unsupported(_, msg)) => {
            eprintln!("error: {msg}");
            return EXIT_UNSUPPORTED;
        }
        Err(RunError::Numerical(f)) => {
            eprintln!("error: {f}");
            return EXIT_NUMERICAL;
        }
    };
    for (_, msg) in &outcome.skipped {
        eprintln!("note: skipped: {msg}");
    }
    let doc = render_report(&cfg.echo(), &outcome.records);
    let summaries: Vec<String> = outcome.records.iter().map(Record::summary_line).collect();
    if let Err(code) = write_or_print(&args.common.report, &doc, &summaries) {
        return code;
    }
    if outcome.records.iter().all(|r| r.pass) {
        0
    } else {
        EXIT_TOLERANCE
    }
}

fn parse_resolutions(raw: &str) -> Result<Vec<usize>, ConfigError> {
    let values: Vec<usize> = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| ConfigError(format!("invalid resolution {:?}", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    for &n in &values {
        if n < 32 || !n.is_power_of_two() {
            return Err(ConfigError(format!(
                "resolutions must be powers of two >= 32, got {n}"
            )));
        }
    }
    check_axis(values.len(), values.windows(2).all(|w| w[0] == w[1]))?;
    Ok(values)
}

fn parse_steps(raw: &str) -> Result<Vec<f64>, ConfigError> {
    let values: Vec<f64> = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("invalid FD step {:?}", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    for &h in &values {
        if !(h.is_finite() && h > 0.0) {
            return Err(ConfigError(format!("FD steps must be positive, got {h}")));
        }
    }
    check_axis(values.len(), values.windows(2).all(|w| w[0] == w[1]))?;
    Ok(values)
}

fn check_axis(len: usize, all_equal: bool) -> Result<(), ConfigError> {
    if len < 2 || all_equal {
        return Err(ConfigError("a study needs at least two distinct axis values".into()));
    }
    Ok(())
}

fn cmd_convergence(args: &ConvArgs) -> u8 {
    let cfg = match build_config(&args.common) {
        Ok(cfg) => cfg,
        Err(e) => return usage(&e),
    };
    let kind = match cfg.suite {
        SuiteSel::One(k) => k,
        SuiteSel::All => {
            return usage(&ConfigError("convergence studies need a single --suite".into()))
        }
    };
    if let Some(msg) = kind.unsupported(cfg.group) {
        eprintln!("error: {msg}");
        return EXIT_UNSUPPORTED;
    }
    let study = match (&args.resolutions, &args.fd_steps) {
        (Some(_), Some(_)) | (None, None) => {
            return usage(&ConfigError(
                "pass exactly one of --resolutions or --fd-steps".into(),
            ))
        }
        (Some(raw), None) => parse_resolutions(raw).map(|ns| grid_study(kind, &cfg, &ns)),
        (None, Some(raw)) => {
            if fd_labels(kind).is_empty() {
                return usage(&ConfigError(format!(
                    "suite {} has no finite-difference records",
                    kind.name()
                )));
            }
            parse_steps(raw).map(|hs| fd_study(kind, &cfg, &hs))
        }
    };
    let rows = match study {
        Err(e) => return usage(&e),
        Ok(Err(failure)) => {
            eprintln!("error: {failure}");
            return EXIT_NUMERICAL;
        }
        Ok(Ok(rows)) => rows,
    };
    let doc = render_study(&cfg.echo(), &rows);
    let summaries: Vec<String> = rows
        .iter()
        .map(|row: &StudyRow| format!("{:<28} slope {}", row.suite, row.slope.render()))
        .collect();
    if let Err(code) = write_or_print(&args.common.report, &doc, &summaries) {
        return code;
    }
    0
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        return ExitCode::from(usage(&e));
    }
    let code = match &cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Convergence(args) => cmd_convergence(args),
    };
    ExitCode::from(code)
}
