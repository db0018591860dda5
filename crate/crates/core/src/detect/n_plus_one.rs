//! D2: N+1 bursts against one path template.

use std::collections::{BTreeSet, HashMap};

use super::{Dimension, DimensionResult, Evidence, Thresholds};
use crate::classify::ApiCallView;
use crate::domain::registered_domain;

/// Replaces all-digit path segments with `{id}` and drops any query.
pub fn normalize_path(url_path: &str) -> String {
    normalize_path_flagged(url_path).0
}

/// Also reports whether any segment was replaced.
pub(crate) fn normalize_path_flagged(url_path: &str) -> (String, bool) {
    let path = url_path.split(['?', '#']).next().unwrap_or("");
    let mut substituted = false;
    let normalized = path
        .split('/')
        .map(|seg| {
            if !seg.is_empty() && seg.bytes().all(|b| b.is_ascii_digit()) {
                substituted = true;
                "{id}"
            } else {
                seg
            }
        })
        .collect::<Vec<_>>()
        .join("/");
    (normalized, substituted)
}

/// Counts (method, registered domain, template) groups with at least
/// `n_plus_one_min_urls` distinct URLs and at least one `{id}` slot.
pub fn detect_n_plus_one(calls: &[ApiCallView<'_>], thresholds: &Thresholds) -> DimensionResult {
    type Key = (String, String, String);
    let mut groups: HashMap<Key, (bool, BTreeSet<&str>)> = HashMap::new();
    let mut order: Vec<Key> = Vec::new();

    for call in calls {
        let entry = call.entry;
        let domain = registered_domain(&entry.host).unwrap_or_else(|_| entry.host.clone());
        let (template, substituted) = normalize_path_flagged(entry.path());
        let key = (entry.method.clone(), domain, template);
        let group = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (false, BTreeSet::new())
        });
        group.0 |= substituted;
        group.1.insert(entry.url.as_str());
    }

    let mut evidence = Vec::new();
    for key in &order {
        let (substituted, urls) = &groups[key];
        if *substituted && urls.len() >= thresholds.n_plus_one_min_urls {
            evidence.push(Evidence::new(
                format!(
                    "{} {}{} hit with {} distinct URLs",
                    key.0,
                    key.1,
                    key.2,
                    urls.len()
                ),
                urls.iter().map(|u| u.to_string()).collect(),
                urls.len() as f64,
            ));
        }
    }
    DimensionResult::new(Dimension::D2, evidence.len() as f64, thresholds, evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ApiClassifier;
    use crate::synth::{capture, EntryBuilder};

    #[test]
    fn normalizes_numeric_segments() {
        assert_eq!(normalize_path("/api/users/42"), "/api/users/{id}");
        assert_eq!(normalize_path("/api/users/list"), "/api/users/list");
        assert_eq!(
            normalize_path("/v2/items/7/reviews/19"),
            "/v2/items/{id}/reviews/{id}"
        );
        assert_eq!(normalize_path("/api/users/42?x=1"), "/api/users/{id}");
        assert_eq!(normalize_path("/a/1b/"), "/a/1b/");
        assert_eq!(normalize_path("/"), "/");
    }

    fn run(urls: &[&str]) -> DimensionResult {
        let entries = urls
            .iter()
            .map(|u| EntryBuilder::get(u).json().build())
            .collect();
        let cap = capture("s", "p", 1, entries);
        let calls = ApiClassifier::default().api_calls(&cap);
        detect_n_plus_one(&calls, &Thresholds::default())
    }

    #[test]
    fn three_ids_make_one_pattern() {
        let r = run(&[
            "https://x.example/api/u/1",
            "https://x.example/api/u/2",
            "https://x.example/api/u/3",
        ]);
        assert_eq!(r.raw_metric, 1.0);
        assert_eq!(r.score, 80.0);
    }

    #[test]
    fn two_ids_are_below_threshold() {
        let r = run(&["https://x.example/api/u/1", "https://x.example/api/u/2"]);
        assert_eq!(r.raw_metric, 0.0);
        assert_eq!(r.score, 100.0);
    }

    #[test]
    fn repeated_identical_url_is_not_n_plus_one() {
        let r = run(&["https://x.example/api/u/1"; 5]);
        assert_eq!(r.raw_metric, 0.0);
    }

    #[test]
    fn static_path_with_varying_query_is_not_n_plus_one() {
        let r = run(&[
            "https://x.example/api/search?q=a",
            "https://x.example/api/search?q=b",
            "https://x.example/api/search?q=c",
        ]);
        assert_eq!(r.raw_metric, 0.0);
    }

    #[test]
    fn five_patterns_floor_at_zero() {
        let mut urls = Vec::new();
        for p in ["a", "b", "c", "d", "e"] {
            for i in 1..=3 {
                urls.push(format!("https://x.example/api/{p}/{i}"));
            }
        }
        let refs: Vec<&str> = urls.iter().map(String::as_str).collect();
        let r = run(&refs);
        assert_eq!(r.raw_metric, 5.0);
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn groups_split_by_registered_domain() {
        let r = run(&[
            "https://a.one.example/api/u/1",
            "https://b.one.example/api/u/2",
            "https://two.example/api/u/3",
        ]);
        assert_eq!(r.raw_metric, 0.0);
    }
}
