//! D5 (oversized payloads) and D6 (missing compression). Both key on the
//! response body size; unknown sizes (-1) never count.

use super::{Dimension, DimensionResult, Evidence, Thresholds};
use crate::classify::ApiCallView;
use crate::har::Side;

const COMPRESSED: [&str; 3] = ["gzip", "br", "deflate"];

pub fn detect_oversized(calls: &[ApiCallView<'_>], thresholds: &Thresholds) -> DimensionResult {
    let evidence: Vec<Evidence> = calls
        .iter()
        .filter(|c| c.entry.body_size > thresholds.oversized_bytes)
        .map(|c| {
            Evidence::new(
                format!("{} byte response", c.entry.body_size),
                vec![c.entry.url.clone()],
                c.entry.body_size as f64,
            )
        })
        .collect();
    DimensionResult::new(Dimension::D5, evidence.len() as f64, thresholds, evidence)
}

fn is_compressed(encoding: Option<&str>) -> bool {
    encoding.is_some_and(|v| {
        v.split(',').any(|token| {
            COMPRESSED
                .iter()
                .any(|c| token.trim().eq_ignore_ascii_case(c))
        })
    })
}

/// Estimated savings in KB if every uncompressed response over the size
/// floor were compressed at the configured ratio.
pub fn detect_missing_compression(
    calls: &[ApiCallView<'_>],
    thresholds: &Thresholds,
) -> DimensionResult {
    let mut savings_bytes = 0.0;
    let mut evidence = Vec::new();
    for call in calls {
        let e = call.entry;
        if e.body_size > thresholds.compression_min_bytes
            && !is_compressed(e.header(Side::Response, "content-encoding"))
        {
            let saved = thresholds.compression_ratio * e.body_size as f64;
            savings_bytes += saved;
            evidence.push(Evidence::new(
                format!("{} byte response sent uncompressed", e.body_size),
                vec![e.url.clone()],
                saved / thresholds.bytes_per_kb,
            ));
        }
    }
    let savings_kb = savings_bytes / thresholds.bytes_per_kb;
    DimensionResult::new(Dimension::D6, savings_kb, thresholds, evidence)
}
