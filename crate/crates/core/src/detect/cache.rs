//! D4: successful API responses without any caching guidance.

use super::{percent, Dimension, DimensionResult, Evidence, Thresholds};
use crate::classify::ApiCallView;
use crate::har::Side;

const CACHE_HEADERS: [&str; 3] = ["cache-control", "etag", "last-modified"];

pub fn detect_missing_cache(calls: &[ApiCallView<'_>], thresholds: &Thresholds) -> DimensionResult {
    let ok: Vec<_> = calls.iter().filter(|c| c.entry.status == 200).collect();
    let missing: Vec<String> = ok
        .iter()
        .filter(|c| {
            CACHE_HEADERS
                .iter()
                .all(|h| c.entry.header(Side::Response, h).is_none())
        })
        .map(|c| c.entry.url.clone())
        .collect();

    let pct = percent(missing.len(), ok.len());
    let evidence = if missing.is_empty() {
        Vec::new()
    } else {
        vec![Evidence::new(
            format!(
                "{} of {} API 200 responses lack Cache-Control, ETag and Last-Modified",
                missing.len(),
                ok.len()
            ),
            missing,
            pct,
        )]
    };
    DimensionResult::new(Dimension::D4, pct, thresholds, evidence)
}
