//! Published outputs: site-score tables, summary statistics, per-site
//! report documents, the site manifest, and anonymization.
//!
//! Layout under an output root:
//!
//! ```text
//! results/quality_scores.csv
//! results/antipattern_summary.csv
//! results/summary_stats.csv
//! results/analysis_config.json
//! results/sites/<site>.json
//! data/sites_anonymized.json   (data/sites.json when not anonymized)
//! ```
//!
//! Tables carry one decimal. Report documents carry the same rounded
//! numbers plus a `precise` block with full precision.

mod anonymize;
mod site;
mod stats;
mod tables;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use anonymize::{anonymize, pseudonym_prefix, PseudonymMap, Redactor};
pub use site::{
    build_site_report, write_site_report, AnalysisConfigDoc, ManifestRecord, SiteReportFile,
    EVIDENCE_LIMIT,
};
pub use stats::{summary_stats, summary_table, Stats, SummaryRow};
pub use tables::{
    antipattern_csv, site_csv, summary_csv, write_site_csv, ANTIPATTERN_HEADER, SITE_CSV_HEADER,
    SUMMARY_HEADER,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no sites to report")]
    Empty,
    #[error("site {0:?} has no category for a pseudonym")]
    CategoryMissing(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> ReportError {
    ReportError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Rounds half away from zero to one decimal; never yields `-0.0`.
pub fn one_decimal(x: f64) -> f64 {
    (x * 10.0).round() / 10.0 + 0.0
}

/// Table-cell rendering shared by every writer and by the validator.
pub fn fmt1(x: f64) -> String {
    format!("{:.1}", one_decimal(x))
}

/// Stable opaque key for a raw site id, used to tie capture files to
/// (possibly pseudonymous) report entries.
pub fn site_key(raw_site_id: &str) -> String {
    Sha256::digest(raw_site_id.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Well-known paths under an output root.
#[derive(Debug, Clone)]
pub struct OutputLayout {
    pub root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn results_dir(&self) -> PathBuf {
        self.root.join("results")
    }

    pub fn quality_csv(&self) -> PathBuf {
        self.results_dir().join("quality_scores.csv")
    }

    pub fn antipattern_csv(&self) -> PathBuf {
        self.results_dir().join("antipattern_summary.csv")
    }

    pub fn summary_csv(&self) -> PathBuf {
        self.results_dir().join("summary_stats.csv")
    }

    pub fn config_json(&self) -> PathBuf {
        self.results_dir().join("analysis_config.json")
    }

    pub fn validation_json(&self) -> PathBuf {
        self.results_dir().join("validation_report.json")
    }

    pub fn sites_dir(&self) -> PathBuf {
        self.results_dir().join("sites")
    }

    pub fn site_report(&self, site: &str) -> PathBuf {
        self.sites_dir().join(format!("{site}.json"))
    }

    pub fn manifest(&self, anonymized: bool) -> PathBuf {
        let name = if anonymized {
            "sites_anonymized.json"
        } else {
            "sites.json"
        };
        self.root.join("data").join(name)
    }

    /// Accepts either the output root or its `results/` directory.
    pub fn locate(dir: &Path) -> Self {
        if dir.join("quality_scores.csv").is_file() && !dir.join("results").is_dir() {
            Self::new(dir.parent().map(Path::to_path_buf).unwrap_or_default())
        } else {
            Self::new(dir)
        }
    }
}

/// Writes `contents` creating parent directories.
pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}
