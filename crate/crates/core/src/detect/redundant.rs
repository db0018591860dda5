//! D1: identical API calls repeated within one page load.

use std::collections::HashMap;

use super::{Dimension, DimensionResult, Evidence, Thresholds};
use crate::classify::ApiCallView;

/// Groups calls by method and full URL (query included). Each group of
/// size k contributes k - 1 excess calls.
pub fn detect_redundant(calls: &[ApiCallView<'_>], thresholds: &Thresholds) -> DimensionResult {
    let mut groups: HashMap<(&str, &str), usize> = HashMap::new();
    let mut order = Vec::new();
    for call in calls {
        let key = (call.entry.method.as_str(), call.entry.url.as_str());
        let count = groups.entry(key).or_insert(0);
        if *count == 0 {
            order.push(key);
        }
        *count += 1;
    }

    let mut excess = 0usize;
    let mut evidence = Vec::new();
    for key in order {
        let k = groups[&key];
        if k >= 2 {
            excess += k - 1;
            evidence.push(Evidence::new(
                format!("{} {} called {k} times", key.0, key.1),
                vec![key.1.to_string()],
                k as f64,
            ));
        }
    }
    DimensionResult::new(Dimension::D1, excess as f64, thresholds, evidence)
}
