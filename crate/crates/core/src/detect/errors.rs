//! D8: API calls answered with 4xx/5xx. Aborted requests (status 0) are
//! left out of both numerator and denominator.

use super::{percent, Dimension, DimensionResult, Evidence, Thresholds};
use crate::classify::ApiCallView;

pub fn detect_errors(calls: &[ApiCallView<'_>], thresholds: &Thresholds) -> DimensionResult {
    let eligible = calls.iter().filter(|c| c.entry.completed()).count();
    let evidence: Vec<Evidence> = calls
        .iter()
        .filter(|c| c.entry.status >= 400)
        .map(|c| {
            Evidence::new(
                format!("HTTP {}", c.entry.status),
                vec![c.entry.url.clone()],
                f64::from(c.entry.status),
            )
        })
        .collect();
    DimensionResult::new(
        Dimension::D8,
        percent(evidence.len(), eligible),
        thresholds,
        evidence,
    )
}
