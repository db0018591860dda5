//! Per-site report documents and the site manifest written next to them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{one_decimal, write_file, ReportError};
use crate::detect::{Dimension, Evidence, Thresholds};
use crate::scoring::{CaptureScore, SiteScore};

pub const SCHEMA_VERSION: u32 = 1;

/// Evidence items kept per dimension per capture; the full count is
/// always reported.
pub const EVIDENCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionBlock {
    pub id: String,
    pub name: String,
    pub raw_metric: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub description: String,
    pub urls: Vec<String>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureDimension {
    pub id: String,
    pub name: String,
    pub raw_metric: f64,
    pub score: f64,
    pub evidence_count: usize,
    pub evidence: Vec<EvidenceItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturePrecise {
    pub page_size_kb: f64,
    pub composite: f64,
    pub dimensions: Vec<DimensionBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureBlock {
    pub page: String,
    pub run: u32,
    pub request_count: usize,
    pub api_call_count: usize,
    pub page_size_kb: f64,
    pub composite: f64,
    pub dimensions: Vec<CaptureDimension>,
    pub warnings: Vec<String>,
    pub precise: CapturePrecise,
}

/// Site-level means; names match the site table columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateValues {
    pub requests: f64,
    pub api_calls: f64,
    pub size_kb: f64,
    pub quality_score: f64,
    pub redundant_excess: f64,
    pub missing_cache_pct: f64,
    pub third_party_pct: f64,
    pub dimensions: Vec<DimensionBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateBlock {
    #[serde(flatten)]
    pub rounded: AggregateValues,
    pub precise: AggregateValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteReportFile {
    pub schema_version: u32,
    pub site: String,
    pub site_key: String,
    pub category: String,
    pub architecture: String,
    pub anonymized: bool,
    pub capture_count: usize,
    pub warnings: Vec<String>,
    pub aggregate: AggregateBlock,
    pub captures: Vec<CaptureBlock>,
}

fn dimension_blocks(raw: &[f64; 8], scores: &[f64; 8], round: bool) -> Vec<DimensionBlock> {
    let r = |x: f64| if round { one_decimal(x) } else { x };
    Dimension::ALL
        .iter()
        .map(|d| DimensionBlock {
            id: d.id().into(),
            name: d.name().into(),
            raw_metric: r(raw[d.index()]),
            score: r(scores[d.index()]),
        })
        .collect()
}

fn aggregate_values(s: &SiteScore, round: bool) -> AggregateValues {
    let r = |x: f64| if round { one_decimal(x) } else { x };
    AggregateValues {
        requests: r(s.mean_requests),
        api_calls: r(s.mean_api_calls),
        size_kb: r(s.mean_size_kb),
        quality_score: r(s.mean_composite),
        redundant_excess: r(s.mean_raw[Dimension::D1.index()]),
        missing_cache_pct: r(s.mean_raw[Dimension::D4.index()]),
        third_party_pct: r(s.mean_raw[Dimension::D7.index()]),
        dimensions: dimension_blocks(&s.mean_raw, &s.mean_scores, round),
    }
}

fn evidence_item(e: &Evidence) -> EvidenceItem {
    EvidenceItem {
        description: e.description.clone(),
        urls: e.urls.clone(),
        value: e.value,
    }
}

fn capture_block(c: &CaptureScore) -> CaptureBlock {
    let raw = Dimension::ALL.map(|d| c.dimension(d).raw_metric);
    let scores = c.scores();
    CaptureBlock {
        page: c.provenance.page_id.clone(),
        run: c.provenance.run_index,
        request_count: c.totals.request_count,
        api_call_count: c.totals.api_call_count,
        page_size_kb: one_decimal(c.totals.page_size_kb),
        composite: one_decimal(c.composite),
        dimensions: c
            .dimensions
            .iter()
            .map(|r| CaptureDimension {
                id: r.dimension.id().into(),
                name: r.dimension.name().into(),
                raw_metric: one_decimal(r.raw_metric),
                score: one_decimal(r.score),
                evidence_count: r.evidence.len(),
                evidence: r
                    .evidence
                    .iter()
                    .take(EVIDENCE_LIMIT)
                    .map(evidence_item)
                    .collect(),
            })
            .collect(),
        warnings: c.warnings.clone(),
        precise: CapturePrecise {
            page_size_kb: c.totals.page_size_kb,
            composite: c.composite,
            dimensions: dimension_blocks(&raw, &scores, false),
        },
    }
}

/// Builds the report document. `site_key` ties the site back to its
/// capture files without naming it.
pub fn build_site_report(score: &SiteScore, site_key: &str, anonymized: bool) -> SiteReportFile {
    SiteReportFile {
        schema_version: SCHEMA_VERSION,
        site: score.site_id().to_string(),
        site_key: site_key.to_string(),
        category: score.meta.category.clone(),
        architecture: score.meta.architecture_note.clone(),
        anonymized,
        capture_count: score.capture_scores.len(),
        warnings: score.warnings.clone(),
        aggregate: AggregateBlock {
            rounded: aggregate_values(score, true),
            precise: aggregate_values(score, false),
        },
        captures: score.capture_scores.iter().map(capture_block).collect(),
    }
}

pub fn write_site_report(report: &SiteReportFile, path: &Path) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// One line of the site manifest written with the results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub site: String,
    pub site_key: String,
    pub category: String,
    pub architecture: String,
    pub pages: Vec<String>,
    /// Site URL, or "redacted" when anonymized.
    pub url: String,
    #[serde(default)]
    pub completeness_exempt: bool,
}

/// Parameters an analysis ran with, recorded for the validator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfigDoc {
    pub anonymized: bool,
    pub weights: BTreeMap<String, f64>,
    pub thresholds: Thresholds,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{aggregate_site, score_capture, SiteMeta, WeightVector};
    use crate::synth::{capture, EntryBuilder};

    fn site() -> SiteScore {
        let caps = (1..=6)
            .map(|run| {
                let entries = vec![
                    EntryBuilder::get("https://shop.example/")
                        .body_size(1500)
                        .build(),
                    EntryBuilder::get("https://shop.example/api/cart")
                        .json()
                        .build(),
                    EntryBuilder::get("https://shop.example/api/cart")
                        .json()
                        .build(),
                ];
                let page = if run <= 3 { "home" } else { "search" };
                score_capture(
                    &capture("shop", page, run, entries),
                    "shop.example",
                    &WeightVector::default(),
                )
            })
            .collect();
        aggregate_site(
            caps,
            SiteMeta {
                site_id: "shop".into(),
                category: "E-commerce".into(),
                architecture_note: "SSR".into(),
            },
        )
        .unwrap()
    }

    #[test]
    fn six_captures_and_one_aggregate() {
        let doc = build_site_report(&site(), "k", false);
        assert_eq!(doc.captures.len(), 6);
        assert_eq!(doc.capture_count, 6);
        assert_eq!(doc.aggregate.rounded.redundant_excess, 1.0);
        assert_eq!(doc.aggregate.rounded.quality_score, 98.5);
    }

    #[test]
    fn every_dimension_has_raw_and_score() {
        let doc = build_site_report(&site(), "k", false);
        let value = serde_json::to_value(&doc).unwrap();
        let dims = value["captures"][0]["dimensions"].as_array().unwrap();
        let numeric = dims
            .iter()
            .flat_map(|d| [&d["raw_metric"], &d["score"]])
            .filter(|v| v.is_f64())
            .count();
        assert_eq!(numeric, 16);
        let ids: Vec<_> = dims.iter().map(|d| d["id"].as_str().unwrap()).collect();
        assert_eq!(ids, ["D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8"]);
    }

    #[test]
    fn written_document_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sites/shop.json");
        let doc = build_site_report(&site(), "k", false);
        write_site_report(&doc, &path).unwrap();
        let back: SiteReportFile =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, doc);
    }
}
