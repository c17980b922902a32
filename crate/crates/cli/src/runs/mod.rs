//! The simulation runs behind each subcommand.

pub mod convergence;
pub mod doubleslit;
pub mod spread;
pub mod sweep;
pub mod trajectories;

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::report::KeyValues;

/// One pass/fail verdict of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }

    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::new(
            name,
            value <= limit,
            format!("{:.6e} <= {:.6e}", value, limit),
        )
    }
}

/// Checks and scalar metrics produced by a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutcome {
    pub checks: Vec<Check>,
    /// `(name, value)` in a fixed order per run kind.
    pub metrics: Vec<(String, f64)>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub(crate) fn metric_push(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    pub fn summary(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.text("status", if self.passed() { "pass" } else { "fail" });
        for c in &self.checks {
            kv.text(
                &format!("check.{}", c.name),
                &format!("{} ({})", if c.passed { "pass" } else { "fail" }, c.detail),
            );
        }
        for (name, value) in &self.metrics {
            kv.number(&format!("metric.{}", name), *value);
        }
        kv
    }

    pub fn write_summary(&self, dir: &Path) -> Result<()> {
        self.summary().write(&dir.join("summary.txt"))
    }
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}

pub fn indexed_name(stem: &str, index: usize) -> String {
    format!("{}_{:04}.csv", stem, index)
}
