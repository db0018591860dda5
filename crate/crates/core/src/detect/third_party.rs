//! D7: share of all requests (not just API calls) leaving the site's
//! registered domain.

use std::collections::{BTreeMap, BTreeSet};

use super::{percent, Dimension, DimensionResult, Evidence, Thresholds};
use crate::domain::{registered_domain, CategoryDictionary, ThirdPartyCategory};
use crate::har::HarEntry;

pub fn detect_third_party(
    entries: &[HarEntry],
    site_domain: &str,
    dict: &CategoryDictionary,
    thresholds: &Thresholds,
) -> DimensionResult {
    let mut valid = 0usize;
    let mut third = 0usize;
    let mut by_category: BTreeMap<ThirdPartyCategory, (usize, BTreeSet<&str>)> = BTreeMap::new();

    for e in entries {
        let Ok(domain) = registered_domain(&e.host) else {
            continue;
        };
        valid += 1;
        if !domain.eq_ignore_ascii_case(site_domain) {
            third += 1;
            let slot = by_category.entry(dict.categorize(&e.host)).or_default();
            slot.0 += 1;
            slot.1.insert(e.host.as_str());
        }
    }

    let evidence = by_category
        .into_iter()
        .map(|(category, (count, hosts))| {
            Evidence::new(
                format!("{count} third-party {category} requests"),
                hosts.into_iter().map(str::to_string).collect(),
                count as f64,
            )
        })
        .collect();
    DimensionResult::new(Dimension::D7, percent(third, valid), thresholds, evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::EntryBuilder;

    fn run(urls: &[&str]) -> DimensionResult {
        let entries: Vec<_> = urls.iter().map(|u| EntryBuilder::get(u).build()).collect();
        detect_third_party(
            &entries,
            "news.example",
            &CategoryDictionary::default(),
            &Thresholds::default(),
        )
    }

    #[test]
    fn all_first_party() {
        let r = run(&["https://news.example/", "https://img.news.example/a.png"]);
        assert_eq!(r.raw_metric, 0.0);
        assert_eq!(r.score, 100.0);
    }

    #[test]
    fn all_third_party() {
        let r = run(&[
            "https://www.google-analytics.com/collect",
            "https://cdn.other.example/x.js",
        ]);
        assert_eq!(r.raw_metric, 100.0);
        assert_eq!(r.score, 0.0);
        let cats: Vec<_> = r.evidence.iter().map(|e| e.description.as_str()).collect();
        assert_eq!(
            cats,
            [
                "1 third-party analytics requests",
                "1 third-party other requests"
            ]
        );
    }

    #[test]
    fn hostless_entries_are_ignored() {
        let r = run(&[
            "https://news.example/",
            "data:image/png;base64,AAAA",
            "https://ads.other.example/",
        ]);
        assert_eq!(r.raw_metric, 50.0);
    }

    #[test]
    fn category_counts_sum_to_third_party_total() {
        let r = run(&[
            "https://news.example/",
            "https://securepubads.g.doubleclick.net/x",
            "https://connect.facebook.net/sdk.js",
            "https://d1.cloudfront.net/a.js",
            "https://unknown.vendor.example/",
        ]);
        let sum: f64 = r.evidence.iter().map(|e| e.value).sum();
        assert_eq!(sum, 4.0);
        assert_eq!(r.raw_metric, 80.0);
    }
}
