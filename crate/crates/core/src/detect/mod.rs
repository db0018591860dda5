//! The eight anti-pattern detectors.
//!
//! Each detector maps a capture (its API calls, or for third-party overhead
//! all of its entries) to a raw severity metric and a 0-100 score where 100
//! means no instances were found.

mod cache;
mod errors;
mod n_plus_one;
mod payload;
mod redundant;
mod third_party;
mod waterfall;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::classify::ApiCallView;
use crate::domain::CategoryDictionary;
use crate::har::HarEntry;

pub use cache::detect_missing_cache;
pub use errors::detect_errors;
pub use n_plus_one::{detect_n_plus_one, normalize_path};
pub use payload::{detect_missing_compression, detect_oversized};
pub use redundant::detect_redundant;
pub use third_party::detect_third_party;
pub use waterfall::detect_waterfalls;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
    D8,
}

impl Dimension {
    pub const ALL: [Dimension; 8] = [
        Dimension::D1,
        Dimension::D2,
        Dimension::D3,
        Dimension::D4,
        Dimension::D5,
        Dimension::D6,
        Dimension::D7,
        Dimension::D8,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn id(self) -> &'static str {
        ["D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8"][self.index()]
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::D1 => "redundant_calls",
            Dimension::D2 => "n_plus_one",
            Dimension::D3 => "sequential_waterfalls",
            Dimension::D4 => "missing_cache_headers",
            Dimension::D5 => "oversized_payloads",
            Dimension::D6 => "missing_compression",
            Dimension::D7 => "third_party_overhead",
            Dimension::D8 => "error_rate",
        }
    }

    /// Unit of the raw metric.
    pub fn unit(self) -> &'static str {
        match self {
            Dimension::D1 => "excess calls",
            Dimension::D2 => "patterns",
            Dimension::D3 => "ms",
            Dimension::D4 | Dimension::D7 | Dimension::D8 => "%",
            Dimension::D5 => "responses",
            Dimension::D6 => "KB",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown dimension {s:?}"))
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

/// Detector tuning. Defaults are the published thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// D1 points lost per excess call.
    pub redundant_penalty: f64,
    /// D2 minimum distinct URLs for a pattern.
    pub n_plus_one_min_urls: usize,
    /// D2 points lost per pattern.
    pub n_plus_one_penalty: f64,
    /// D3 wasted milliseconds per point lost.
    pub waterfall_ms_per_point: f64,
    /// D5 body size a response must exceed.
    pub oversized_bytes: i64,
    /// D5 points lost per oversized response.
    pub oversized_penalty: f64,
    /// D6 body size a response must exceed.
    pub compression_min_bytes: i64,
    /// D6 assumed fraction of bytes saved by compression.
    pub compression_ratio: f64,
    /// D6 bytes per KB.
    pub bytes_per_kb: f64,
    /// D6 KB saved per point lost.
    pub compression_kb_per_point: f64,
    /// D8 points lost per error percentage point.
    pub error_penalty: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            redundant_penalty: 10.0,
            n_plus_one_min_urls: 3,
            n_plus_one_penalty: 20.0,
            waterfall_ms_per_point: 50.0,
            oversized_bytes: 100_000,
            oversized_penalty: 15.0,
            compression_min_bytes: 1_000,
            compression_ratio: 0.7,
            bytes_per_kb: 1_000.0,
            compression_kb_per_point: 5.0,
            error_penalty: 5.0,
        }
    }
}

impl Thresholds {
    /// Score formula for `dimension`, clamped to [0, 100].
    pub fn score(&self, dimension: Dimension, raw: f64) -> f64 {
        let penalty = match dimension {
            Dimension::D1 => raw * self.redundant_penalty,
            Dimension::D2 => raw * self.n_plus_one_penalty,
            Dimension::D3 => raw / self.waterfall_ms_per_point,
            Dimension::D4 | Dimension::D7 => raw,
            Dimension::D5 => raw * self.oversized_penalty,
            Dimension::D6 => raw / self.compression_kb_per_point,
            Dimension::D8 => raw * self.error_penalty,
        };
        clamp_score(100.0 - penalty)
    }
}

/// Clamps to [0, 100]; NaN maps to 0.
pub fn clamp_score(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 100.0)
    }
}

/// One piece of evidence behind a score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub description: String,
    pub urls: Vec<String>,
    pub value: f64,
}

impl Evidence {
    pub fn new(description: impl Into<String>, urls: Vec<String>, value: f64) -> Self {
        Self {
            description: description.into(),
            urls,
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionResult {
    pub dimension: Dimension,
    pub raw_metric: f64,
    pub score: f64,
    pub evidence: Vec<Evidence>,
}

impl DimensionResult {
    pub fn new(
        dimension: Dimension,
        raw_metric: f64,
        thresholds: &Thresholds,
        evidence: Vec<Evidence>,
    ) -> Self {
        Self {
            dimension,
            raw_metric,
            score: thresholds.score(dimension, raw_metric),
            evidence,
        }
    }
}

/// Percentage with a zero denominator treated as no evidence.
pub(crate) fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Runs D1..D8 in order.
pub fn run_all(
    calls: &[ApiCallView<'_>],
    entries: &[HarEntry],
    site_domain: &str,
    dict: &CategoryDictionary,
    thresholds: &Thresholds,
) -> [DimensionResult; 8] {
    [
        detect_redundant(calls, thresholds),
        detect_n_plus_one(calls, thresholds),
        detect_waterfalls(calls, thresholds),
        detect_missing_cache(calls, thresholds),
        detect_oversized(calls, thresholds),
        detect_missing_compression(calls, thresholds),
        detect_third_party(entries, site_domain, dict, thresholds),
        detect_errors(calls, thresholds),
    ]
}
