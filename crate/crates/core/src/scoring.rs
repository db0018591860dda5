//! Composite quality score per capture and per-site aggregation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ApiClassifier;
use crate::detect::{run_all, Dimension, DimensionResult, Thresholds};
use crate::domain::CategoryDictionary;
use crate::har::{HarCapture, Provenance};

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("missing result for dimension {0}")]
    MissingDimension(Dimension),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("captures from more than one site: {0} and {1}")]
    MixedSites(String, String),
    #[error("no captures to aggregate")]
    NoCaptures,
}

const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Per-dimension weights, non-negative and summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector([f64; 8]);

impl Default for WeightVector {
    fn default() -> Self {
        Self([0.15, 0.10, 0.10, 0.15, 0.15, 0.10, 0.15, 0.10])
    }
}

impl WeightVector {
    pub fn new(weights: [f64; 8]) -> Result<Self, ScoringError> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(ScoringError::InvalidWeights(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(ScoringError::InvalidWeights(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    /// Divides by the sum, so any positive scaling gives the same vector.
    pub fn normalized(raw: [f64; 8]) -> Result<Self, ScoringError> {
        let sum: f64 = raw.iter().sum();
        if sum.is_nan() || sum <= 0.0 {
            return Err(ScoringError::InvalidWeights(format!(
                "weights sum to {sum}"
            )));
        }
        Self::new(raw.map(|w| w / sum))
    }

    pub fn get(&self, d: Dimension) -> f64 {
        self.0[d.index()]
    }

    pub fn as_array(&self) -> [f64; 8] {
        self.0
    }

    /// Map keyed by dimension id (`"D1"`..`"D8"`).
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        Dimension::ALL
            .iter()
            .map(|d| (d.id().to_string(), self.get(*d)))
            .collect()
    }

    /// Every dimension must be present; the sum must be 1.
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, ScoringError> {
        let mut weights = [f64::NAN; 8];
        for (key, value) in map {
            let d: Dimension = key.parse().map_err(ScoringError::InvalidWeights)?;
            weights[d.index()] = *value;
        }
        if let Some(d) = Dimension::ALL.iter().find(|d| weights[d.index()].is_nan()) {
            return Err(ScoringError::InvalidWeights(format!("no weight for {d}")));
        }
        Self::new(weights)
    }

    /// JSON object keyed by dimension id.
    pub fn from_json(text: &str) -> Result<Self, ScoringError> {
        let map: BTreeMap<String, f64> =
            serde_json::from_str(text).map_err(|e| ScoringError::InvalidWeights(e.to_string()))?;
        Self::from_map(&map)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScoringError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScoringError::InvalidWeights(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Σ wᵢ · clamp(Sᵢ, 0, 100) over exactly one result per dimension.
pub fn composite_score(
    dimensions: &[DimensionResult],
    weights: &WeightVector,
) -> Result<f64, ScoringError> {
    let mut scores = [None; 8];
    for r in dimensions {
        scores[r.dimension.index()] = Some(r.score);
    }
    let mut q = 0.0;
    for d in Dimension::ALL {
        let s = scores[d.index()].ok_or(ScoringError::MissingDimension(d))?;
        q += weights.get(d) * s.clamp(0.0, 100.0);
    }
    Ok(q.clamp(0.0, 100.0))
}

/// Same as [`composite_score`] over bare scores in D1..D8 order.
pub fn composite_of(scores: &[f64; 8], weights: &WeightVector) -> f64 {
    Dimension::ALL
        .iter()
        .map(|d| weights.get(*d) * scores[d.index()].clamp(0.0, 100.0))
        .sum::<f64>()
        .clamp(0.0, 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CaptureTotals {
    pub request_count: usize,
    pub api_call_count: usize,
    /// Σ max(body_size, 0) / 1000.
    pub page_size_kb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureScore {
    pub provenance: Provenance,
    pub dimensions: [DimensionResult; 8],
    pub composite: f64,
    pub totals: CaptureTotals,
    pub warnings: Vec<String>,
}

impl CaptureScore {
    pub fn dimension(&self, d: Dimension) -> &DimensionResult {
        &self.dimensions[d.index()]
    }

    pub fn scores(&self) -> [f64; 8] {
        Dimension::ALL.map(|d| self.dimension(d).score)
    }
}

/// Everything needed to score a capture.
#[derive(Debug, Clone, Default)]
pub struct Auditor {
    pub classifier: ApiClassifier,
    pub dictionary: CategoryDictionary,
    pub thresholds: Thresholds,
    pub weights: WeightVector,
}

impl Auditor {
    /// Classifies, runs D1..D8 and combines them.
    pub fn score_capture(&self, capture: &HarCapture, site_domain: &str) -> CaptureScore {
        let calls = self.classifier.api_calls(capture);
        let dimensions = run_all(
            &calls,
            &capture.entries,
            site_domain,
            &self.dictionary,
            &self.thresholds,
        );
        let composite =
            composite_score(&dimensions, &self.weights).expect("run_all covers every dimension");
        let totals = CaptureTotals {
            request_count: capture.entries.len(),
            api_call_count: calls.len(),
            page_size_kb: capture
                .entries
                .iter()
                .map(|e| e.body_size.max(0) as f64)
                .sum::<f64>()
                / 1000.0,
        };
        CaptureScore {
            provenance: capture.provenance.clone(),
            dimensions,
            composite,
            totals,
            warnings: capture.warnings.clone(),
        }
    }
}

pub fn score_capture(
    capture: &HarCapture,
    site_domain: &str,
    weights: &WeightVector,
) -> CaptureScore {
    let auditor = Auditor {
        weights: *weights,
        ..Auditor::default()
    };
    auditor.score_capture(capture, site_domain)
}

/// Descriptive data carried alongside a site's scores.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteMeta {
    pub site_id: String,
    pub category: String,
    pub architecture_note: String,
}

pub const EXPECTED_CAPTURES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SiteScore {
    pub meta: SiteMeta,
    pub capture_scores: Vec<CaptureScore>,
    pub mean_composite: f64,
    pub mean_scores: [f64; 8],
    pub mean_raw: [f64; 8],
    pub mean_requests: f64,
    pub mean_api_calls: f64,
    pub mean_size_kb: f64,
    pub warnings: Vec<String>,
}

impl SiteScore {
    pub fn site_id(&self) -> &str {
        &self.meta.site_id
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Flat arithmetic means over the site's captures. The site score is the
/// mean of per-capture composites, never a composite of mean metrics.
pub fn aggregate_site(
    captures: Vec<CaptureScore>,
    meta: SiteMeta,
) -> Result<SiteScore, ScoringError> {
    let first = captures.first().ok_or(ScoringError::NoCaptures)?;
    if let Some(other) = captures
        .iter()
        .find(|c| c.provenance.site_id != first.provenance.site_id)
    {
        return Err(ScoringError::MixedSites(
            first.provenance.site_id.clone(),
            other.provenance.site_id.clone(),
        ));
    }
    let mut warnings = Vec::new();
    if captures.len() != EXPECTED_CAPTURES {
        warnings.push(format!(
            "{} captures, expected {EXPECTED_CAPTURES}",
            captures.len()
        ));
    }
    let mean_scores = Dimension::ALL.map(|d| mean(captures.iter().map(|c| c.dimension(d).score)));
    let mean_raw = Dimension::ALL.map(|d| mean(captures.iter().map(|c| c.dimension(d).raw_metric)));
    Ok(SiteScore {
        mean_composite: mean(captures.iter().map(|c| c.composite)),
        mean_requests: mean(captures.iter().map(|c| c.totals.request_count as f64)),
        mean_api_calls: mean(captures.iter().map(|c| c.totals.api_call_count as f64)),
        mean_size_kb: mean(captures.iter().map(|c| c.totals.page_size_kb)),
        mean_scores,
        mean_raw,
        capture_scores: captures,
        meta,
        warnings,
    })
}
