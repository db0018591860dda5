//! D3: same-domain calls that ran strictly one after another.
//!
//! Wasted time for an adjacent pair (A, B) in start order is A's duration
//! when both share a registered domain, hit different path templates, and B
//! started no earlier than A finished. HAR files carry no dependency edges,
//! so genuinely dependent chains are counted too.

use super::n_plus_one::normalize_path;
use super::{Dimension, DimensionResult, Evidence, Thresholds};
use crate::classify::ApiCallView;
use crate::domain::registered_domain;

pub fn detect_waterfalls(calls: &[ApiCallView<'_>], thresholds: &Thresholds) -> DimensionResult {
    let mut ordered: Vec<_> = calls
        .iter()
        .map(|c| {
            let e = c.entry;
            (e, registered_domain(&e.host).ok(), normalize_path(e.path()))
        })
        .collect();
    // Stable: equal start times keep file order.
    ordered.sort_by(|a, b| a.0.start_ms().total_cmp(&b.0.start_ms()));

    let mut wasted_ms = 0.0;
    let mut evidence = Vec::new();
    for pair in ordered.windows(2) {
        let (a, a_domain, a_path) = &pair[0];
        let (b, b_domain, b_path) = &pair[1];
        let same_domain = matches!((a_domain, b_domain), (Some(x), Some(y)) if x == y);
        if same_domain && a_path != b_path && b.start_ms() >= a.end_ms() {
            wasted_ms += a.duration_ms;
            evidence.push(Evidence::new(
                format!("{} waited on {} ({:.0} ms)", b.url, a.url, a.duration_ms),
                vec![a.url.clone(), b.url.clone()],
                a.duration_ms,
            ));
        }
    }
    DimensionResult::new(Dimension::D3, wasted_ms, thresholds, evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ApiClassifier;
    use crate::synth::{capture, EntryBuilder};

    fn run(calls: &[(&str, f64, f64)]) -> DimensionResult {
        let entries = calls
            .iter()
            .map(|(u, start, dur)| EntryBuilder::get(u).json().timing(*start, *dur).build())
            .collect();
        let cap = capture("s", "p", 1, entries);
        let calls = ApiClassifier::default().api_calls(&cap);
        detect_waterfalls(&calls, &Thresholds::default())
    }

    #[test]
    fn single_sequential_pair() {
        let r = run(&[
            ("https://x.example/api/a", 0.0, 100.0),
            ("https://x.example/api/b", 100.0, 40.0),
        ]);
        assert_eq!(r.raw_metric, 100.0);
        assert_eq!(r.score, 98.0);
    }

    #[test]
    fn parallel_calls_waste_nothing() {
        let r = run(&[
            ("https://x.example/api/a", 0.0, 100.0),
            ("https://x.example/api/b", 5.0, 100.0),
            ("https://x.example/api/c", 10.0, 100.0),
        ]);
        assert_eq!(r.raw_metric, 0.0);
        assert_eq!(r.score, 100.0);
    }

    #[test]
    fn sorting_uses_start_time_not_file_order() {
        let r = run(&[
            ("https://x.example/api/b", 300.0, 10.0),
            ("https://x.example/api/a", 0.0, 300.0),
        ]);
        assert_eq!(r.raw_metric, 300.0);
    }

    #[test]
    fn same_template_or_other_domain_is_not_a_waterfall() {
        let r = run(&[
            ("https://x.example/api/u/1", 0.0, 100.0),
            ("https://x.example/api/u/2", 200.0, 100.0),
            ("https://y.example/api/z", 400.0, 100.0),
        ]);
        assert_eq!(r.raw_metric, 0.0);
    }

    #[test]
    fn five_seconds_wasted_floors_at_zero() {
        let r = run(&[
            ("https://x.example/api/a", 0.0, 5000.0),
            ("https://x.example/api/b", 5000.0, 10.0),
        ]);
        assert_eq!(r.raw_metric, 5000.0);
        assert_eq!(r.score, 0.0);
    }
}
