//! Run configuration: defaults, flat `key = value` files, flag overrides.
//!
//! Precedence is defaults, then the config file, then command-line flags, in
//! that order. Every accepted key is validated before any suite runs so that
//! bad input fails fast with a usage error instead of a half-written report.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use symgrpd_core::consts::defaults;
use symgrpd_core::lie::GroupKind;

use crate::suites::{known_tol_targets, SuiteKind};

/// Which suites a run executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteSel {
    All,
    One(SuiteKind),
}

impl SuiteSel {
    pub fn parse(s: &str) -> Option<SuiteSel> {
        if s == "all" {
            return Some(SuiteSel::All);
        }
        SuiteKind::parse(s).map(SuiteSel::One)
    }

    pub fn name(self) -> &'static str {
        match self {
            SuiteSel::All => "all",
            SuiteSel::One(k) => k.name(),
        }
    }
}

/// A configuration problem in a file or flag. Always a usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// A fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub suite: SuiteSel,
    pub group: GroupKind,
    pub grid_n: usize,
    pub substeps: usize,
    pub trials: u64,
    pub seed: u64,
    /// Per-suite or per-record tolerance overrides, keyed by suite name or
    /// record label. A record label wins over its suite name.
    pub tol_overrides: BTreeMap<String, f64>,
    pub fd_step: f64,
    /// Measure wall time per record. Off by default so reports are
    /// byte-stable across runs.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: SuiteSel::All,
            group: GroupKind::Su2,
            grid_n: defaults::GRID_N,
            substeps: defaults::SUBSTEPS,
            trials: defaults::TRIALS as u64,
            seed: defaults::SEED,
            tol_overrides: BTreeMap::new(),
            fd_step: defaults::FD_STEP,
            timing: false,
        }
    }
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Overlay `key = value` lines from a config file. `#` starts a comment,
    /// blank lines are skipped, later lines win, unknown keys are rejected.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("{origin}:{}: expected key = value", idx + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| ConfigError(format!("{origin}:{}: {}", idx + 1, e.0)))?;
        }
        Ok(())
    }

    /// Apply one key. Shared by the file parser and the flag layer.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "suite" => {
                self.suite = SuiteSel::parse(value)
                    .ok_or_else(|| ConfigError(format!("unknown suite {value:?}")))?;
            }
            "group" => {
                self.group = GroupKind::parse(value)
                    .ok_or_else(|| ConfigError(format!("unknown group {value:?}")))?;
            }
            "grid_n" => self.grid_n = parse_as(key, value)?,
            "substeps" => self.substeps = parse_as(key, value)?,
            "trials" => self.trials = parse_as(key, value)?,
            "seed" => self.seed = parse_as(key, value)?,
            "fd_step" => self.fd_step = parse_as(key, value)?,
            "tol_overrides" => {
                for item in value.split(',') {
                    self.add_tol(item.trim())?;
                }
            }
            other => return Err(ConfigError(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// One `name=value` tolerance override (the `--tol` flag, or one comma
    /// item of the `tol_overrides` file key).
    pub fn add_tol(&mut self, item: &str) -> Result<(), ConfigError> {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("tolerance override {item:?} is not name=value")))?;
        let tol: f64 = parse_as("tolerance override", value.trim())?;
        self.tol_overrides.insert(name.trim().to_string(), tol);
        Ok(())
    }

    /// Reject invariant violations before any suite runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_n < 32 || !self.grid_n.is_power_of_two() {
            return Err(ConfigError(format!(
                "grid_n must be a power of two >= 32, got {}",
                self.grid_n
            )));
        }
        if self.trials < 1 {
            return Err(ConfigError("trials must be at least 1".into()));
        }
        if self.substeps < 1 {
            return Err(ConfigError("substeps must be at least 1".into()));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(ConfigError(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        let known = known_tol_targets();
        for (name, tol) in &self.tol_overrides {
            if !known.contains(&name.as_str()) {
                return Err(ConfigError(format!(
                    "tolerance override targets unknown suite or record {name:?}"
                )));
            }
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(ConfigError(format!("tolerance for {name} must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    /// One-line echo of the effective configuration for the report header.
    pub fn echo(&self) -> String {
        let mut s = format!(
            "suite={} group={} grid_n={} substeps={} trials={} seed={} fd_step={:e}",
            self.suite.name(),
            self.group.name(),
            self.grid_n,
            self.substeps,
            self.trials,
            self.seed,
            self.fd_step,
        );
        if !self.tol_overrides.is_empty() {
            let items: Vec<String> =
                self.tol_overrides.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
            s.push_str(&format!(" tol_overrides={}", items.join(",")));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_text_overlays_in_order_and_reports_bad_lines() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# full run\nsuite = qham\ngroup = abelian2\ngrid_n = 64\ntrials = 7\n\
             seed = 9\nfd_step = 1e-3\ntol_overrides = qham/axiom1=2e-4, moment=1e-5\n",
            "inline",
        )
        .unwrap();
        assert_eq!(cfg.suite.name(), "qham");
        assert_eq!(cfg.group, GroupKind::Abelian2);
        assert_eq!(cfg.grid_n, 64);
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.fd_step, 1e-3);
        assert_eq!(cfg.tol_overrides["qham/axiom1"], 2e-4);
        assert_eq!(cfg.tol_overrides["moment"], 1e-5);
        cfg.validate().unwrap();

        let err = cfg.apply_text("grid_n: 64\n", "inline").unwrap_err();
        assert!(err.0.contains("inline:1"), "origin and line missing: {}", err.0);
        let err = cfg.apply_text("bandwidth = 3\n", "inline").unwrap_err();
        assert!(err.0.contains("unknown key"), "wrong message: {}", err.0);
    }

    #[test]
    fn validate_rejects_bad_grid_trials_and_tol_targets() {
        let mut cfg = RunConfig::default();
        cfg.grid_n = 48;
        assert!(cfg.validate().is_err());
        cfg.grid_n = 16;
        assert!(cfg.validate().is_err());
        cfg.grid_n = 256;
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.validate().unwrap();

        cfg.add_tol("no-such-suite=1e-5").unwrap();
        assert!(cfg.validate().is_err());
        cfg.tol_overrides.clear();
        cfg.add_tol("varpi/d-varpi=0").unwrap();
        assert!(cfg.validate().is_err());
    }
}
