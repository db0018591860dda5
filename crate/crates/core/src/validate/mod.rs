//! Independent re-audit of a finished batch.
//!
//! Works from files only: the capture directory and the emitted results.
//! Capture files are re-read as plain JSON here, not through the ingestion
//! module, and composites are recomputed from the numbers written in the
//! reports.

mod checks;
mod load;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::OutputLayout;

pub use checks::spearman;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("missing outputs: {0}")]
    MissingOutputs(String),
}

/// Validator limits. Defaults follow the published checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidatorConfig {
    /// Check 1: allowed request-count deviation.
    pub request_tolerance: f64,
    /// Check 3: allowed composite deviation in points.
    pub score_tolerance: f64,
    /// Check 6: batches smaller than this only warn.
    pub min_sites_for_correlation: usize,
    /// Check 7: capture files expected per site.
    pub expected_captures: usize,
    /// Check 8: max/min request ratio across a page's runs before warning.
    pub run_ratio_warn: f64,
}

impl Default for ValidatorConfig {
    fn default() -> Self {
        Self {
            request_tolerance: 0.5,
            score_tolerance: 0.2,
            min_sites_for_correlation: 5,
            expected_captures: 6,
            run_ratio_warn: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Warn => "WARN",
            CheckStatus::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check_id: u8,
    pub name: &'static str,
    pub status: CheckStatus,
    /// Reasons for a warn or fail.
    pub details: Vec<String>,
    /// Informational remarks that do not change the status.
    pub notes: Vec<String>,
}

impl CheckResult {
    fn new(check_id: u8, name: &'static str) -> Self {
        Self {
            check_id,
            name,
            status: CheckStatus::Pass,
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, detail: impl Into<String>) {
        self.status = CheckStatus::Fail;
        self.details.push(detail.into());
    }

    fn warn(&mut self, detail: impl Into<String>) {
        if self.status == CheckStatus::Pass {
            self.status = CheckStatus::Warn;
        }
        self.details.push(detail.into());
    }

    fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }

    /// One console line.
    pub fn summary_line(&self) -> String {
        let mut line = format!("[{}] check {} {}", self.status, self.check_id, self.name);
        if let Some(first) = self.details.first() {
            line.push_str(": ");
            line.push_str(first);
            if self.details.len() > 1 {
                line.push_str(&format!(" (+{} more)", self.details.len() - 1));
            }
        }
        line
    }
}

/// Runs checks 1-8 in order. `manifest` overrides the site manifest found
/// next to the results.
pub fn run_validation(
    har_dir: &Path,
    results: &Path,
    manifest: Option<&Path>,
    config: &ValidatorConfig,
) -> Result<Vec<CheckResult>, ValidationError> {
    let layout = OutputLayout::locate(results);
    let batch = load::Batch::load(har_dir, &layout, manifest)?;
    Ok(vec![
        checks::request_counts(&batch, config),
        checks::invalid_sites(&batch),
        checks::scoring_formula(&batch, config),
        checks::domain_extraction(&batch),
        checks::csv_report_consistency(&batch),
        checks::score_sanity(&batch, config),
        checks::har_completeness(&batch, config),
        checks::run_consistency(&batch, config),
    ])
}

/// Writes `validation_report.json` under the results directory.
pub fn write_validation_report(
    results: &Path,
    checks: &[CheckResult],
) -> Result<std::path::PathBuf, ValidationError> {
    let layout = OutputLayout::locate(results);
    let path = layout.validation_json();
    let mut text = serde_json::to_string_pretty(checks).expect("check results serialize");
    text.push('\n');
    std::fs::write(&path, text)
        .map_err(|e| ValidationError::MissingOutputs(format!("{}: {e}", path.display())))?;
    Ok(path)
}
