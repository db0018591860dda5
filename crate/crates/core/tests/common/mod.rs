#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use har_audit::pipeline::{analyze, BatchConfig, BatchOutcome};

pub const WEIGHTS: [f64; 8] = [0.15, 0.10, 0.10, 0.15, 0.15, 0.10, 0.15, 0.10];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Score formulas as published, clamped to [0, 100].
pub fn expected_score(dim: usize, raw: f64) -> f64 {
    let s = match dim {
        0 => 100.0 - raw * 10.0,
        1 => 100.0 - raw * 20.0,
        2 => 100.0 - raw / 50.0,
        3 | 6 => 100.0 - raw,
        4 => 100.0 - raw * 15.0,
        5 => 100.0 - raw / 5.0,
        7 => 100.0 - raw * 5.0,
        _ => unreachable!(),
    };
    s.clamp(0.0, 100.0)
}

pub fn expected_composite(scores: &[f64; 8]) -> f64 {
    scores.iter().zip(WEIGHTS).map(|(s, w)| s * w).sum()
}

pub fn copy_dir(src: &Path, dst: &Path) {
    fs::create_dir_all(dst).unwrap();
    for item in fs::read_dir(src).unwrap() {
        let path = item.unwrap().path();
        if path.is_file() {
            fs::copy(&path, dst.join(path.file_name().unwrap())).unwrap();
        }
    }
}

/// Copies the six-site corpus into `dir/har` and analyzes it into `dir/out`.
pub fn analyze_corpus(dir: &Path, anonymize: bool) -> BatchOutcome {
    let har = dir.join("har");
    copy_dir(&fixtures().join("corpus"), &har);
    analyze(&BatchConfig {
        har_dir: har,
        manifest: fixtures().join("corpus_sites.json"),
        anonymize,
        out_dir: dir.join("out"),
        jobs: Some(2),
        ..BatchConfig::default()
    })
    .expect("corpus analyzes")
}

/// Every regular file under `dir`, recursively.
pub fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for item in fs::read_dir(&d).unwrap() {
            let path = item.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

/// Raw metrics each golden capture was built to produce, D1..D8.
pub fn golden_raw() -> Vec<(&'static str, [f64; 8])> {
    let mut v = vec![
        ("minimal", [0.0; 8]),
        ("redundant", [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ("n_plus_one", [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        (
            "n_plus_one_two_patterns",
            [0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ),
        // session 200 ms, then profile 300 ms, before feed
        ("waterfall", [0.0, 0.0, 500.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        (
            "waterfall_floor",
            [0.0, 0.0, 6000.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ),
        // 77 of 94 API 200 responses without cache headers
        (
            "missing_cache",
            [0.0, 0.0, 0.0, 7700.0 / 94.0, 0.0, 0.0, 0.0, 0.0],
        ),
        ("oversized", [0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]),
        // 0.7 * 50000 bytes; the 1000-byte body is not over the limit
        ("uncompressed", [0.0, 0.0, 0.0, 0.0, 0.0, 35.0, 0.0, 0.0]),
        (
            "compression_boundary",
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.7007, 0.0, 0.0],
        ),
        // 77 of 78 entries third-party
        (
            "third_party",
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 7700.0 / 78.0, 0.0],
        ),
        ("error_rate", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0]),
        ("error_floor", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 40.0]),
        // one 503 among 19 completed calls; the aborted call is excluded
        (
            "aborted_request",
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 100.0 / 19.0],
        ),
    ];
    // Two cart calls, one 120 kB gzip export, one 404, one analytics script
    // among six entries.
    v.push((
        "combined",
        [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 100.0 / 6.0, 25.0],
    ));
    v
}

pub mod arb {
    use har_audit::har::HarEntry;
    use har_audit::synth::EntryBuilder;
    use proptest::prelude::*;

    /// Hosts with their registered domains, fixed here rather than looked up.
    pub const HOSTS: [(&str, &str); 5] = [
        ("api.shop.co.uk", "shop.co.uk"),
        ("www.shop.co.uk", "shop.co.uk"),
        ("static.cdn-host.com", "cdn-host.com"),
        ("a.b.news.com.au", "news.com.au"),
        ("www.google-analytics.com", "google-analytics.com"),
    ];
    pub const SITE: &str = "shop.co.uk";

    const SEGMENTS: [&str; 9] = [
        "api", "v1", "items", "users", "42", "7", "007", "x1", "orders",
    ];
    const QUERIES: [&str; 3] = ["", "?a=1", "?a=2"];
    const STATUSES: [u16; 7] = [200, 200, 200, 204, 404, 500, 0];

    /// A JSON API call with varied shape; every one is classified as API.
    pub fn api_call() -> impl Strategy<Value = HarEntry> {
        (
            prop::bool::ANY,
            0..HOSTS.len(),
            prop::collection::vec(0..SEGMENTS.len(), 1..4),
            0..QUERIES.len(),
            0..STATUSES.len(),
            (prop::bool::ANY, prop::bool::ANY),
            prop_oneof![0i64..2000, 90_000i64..200_000],
            (0u32..2000, 1u32..800),
        )
            .prop_map(
                |(post, host, segs, q, status, (cache, gzip), body, (start, dur))| {
                    let path: Vec<&str> = segs.iter().map(|&i| SEGMENTS[i]).collect();
                    let url = format!("https://{}/{}{}", HOSTS[host].0, path.join("/"), QUERIES[q]);
                    let mut b = EntryBuilder::new(if post { "POST" } else { "GET" }, &url)
                        .response_header("Content-Type", "application/json")
                        .status(STATUSES[status])
                        .body_size(body)
                        .timing(f64::from(start), f64::from(dur));
                    if cache {
                        b = b.response_header("ETag", "\"v1\"");
                    }
                    if gzip {
                        b = b.response_header("Content-Encoding", "br");
                    }
                    b.build()
                },
            )
    }

    /// A non-API asset.
    pub fn asset() -> impl Strategy<Value = HarEntry> {
        (
            0..HOSTS.len(),
            0u32..100,
            prop::sample::select(vec![200u16, 304, 404]),
        )
            .prop_map(|(host, n, status)| {
                EntryBuilder::get(&format!("https://{}/img/{n}.png", HOSTS[host].0))
                    .response_header("Content-Type", "image/png")
                    .status(status)
                    .body_size(i64::from(n) * 100)
                    .build()
            })
    }

    pub fn entries(max: usize) -> impl Strategy<Value = Vec<HarEntry>> {
        prop::collection::vec(prop_oneof![3 => api_call(), 1 => asset()], 0..=max)
    }

    pub fn api_calls(max: usize) -> impl Strategy<Value = Vec<HarEntry>> {
        prop::collection::vec(api_call(), 0..=max)
    }

    pub fn registered(host: &str) -> &'static str {
        HOSTS
            .iter()
            .find(|(h, _)| *h == host)
            .expect("known host")
            .1
    }
}

pub mod oracle {
    use super::arb::registered;
    use har_audit::har::HarEntry;

    /// Calls that repeat an earlier call's method and URL.
    pub fn redundant_excess(calls: &[HarEntry]) -> usize {
        (0..calls.len())
            .filter(|&i| {
                (0..i).any(|j| calls[j].method == calls[i].method && calls[j].url == calls[i].url)
            })
            .count()
    }

    fn path_segments(url: &str) -> Vec<&str> {
        let rest = url.split_once("://").map_or(url, |(_, r)| r);
        let path = rest.find('/').map_or("", |i| &rest[i..]);
        let path = path.split(['?', '#']).next().unwrap();
        path.split('/').collect()
    }

    fn numeric(s: &str) -> bool {
        !s.is_empty() && s.chars().all(|c| c.is_ascii_digit())
    }

    /// Same method, same registered domain, and paths equal segment by
    /// segment except where both segments are numbers.
    fn same_template(a: &HarEntry, b: &HarEntry) -> bool {
        let (sa, sb) = (path_segments(&a.url), path_segments(&b.url));
        a.method == b.method
            && registered(&a.host) == registered(&b.host)
            && sa.len() == sb.len()
            && sa
                .iter()
                .zip(&sb)
                .all(|(x, y)| x == y || (numeric(x) && numeric(y)))
    }

    /// Pairwise grouping; a group counts with 3+ distinct URLs and a numeric
    /// segment.
    pub fn n_plus_one_patterns(calls: &[HarEntry], min_urls: usize) -> usize {
        let mut seen = vec![false; calls.len()];
        let mut patterns = 0;
        for i in 0..calls.len() {
            if seen[i] {
                continue;
            }
            let mut urls: Vec<&str> = Vec::new();
            for j in i..calls.len() {
                if same_template(&calls[i], &calls[j]) {
                    seen[j] = true;
                    if !urls.contains(&calls[j].url.as_str()) {
                        urls.push(&calls[j].url);
                    }
                }
            }
            let has_number = path_segments(&calls[i].url).iter().any(|s| numeric(s));
            if has_number && urls.len() >= min_urls {
                patterns += 1;
            }
        }
        patterns
    }
}

pub mod faults {
    use std::fs;
    use std::path::Path;

    use har_audit::validate::{run_validation, CheckResult, ValidatorConfig};
    use serde_json::Value;

    pub fn validate(har: &Path, out: &Path) -> Vec<CheckResult> {
        run_validation(har, out, None, &ValidatorConfig::default()).expect("outputs present")
    }

    pub fn failing(checks: &[CheckResult]) -> Vec<u8> {
        checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.check_id)
            .collect()
    }

    pub fn edit_json(path: &Path, f: impl FnOnce(&mut Value)) {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        f(&mut v);
        fs::write(path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    }

    /// Replaces one cell of the site table.
    pub fn edit_csv(path: &Path, site: &str, column: &str, value: &str) {
        let text = fs::read_to_string(path).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let col = lines[0].split(',').position(|h| h == column).unwrap();
        let row = lines
            .iter()
            .position(|l| l.split(',').next() == Some(site))
            .unwrap();
        let mut cells: Vec<String> = lines[row].split(',').map(str::to_string).collect();
        cells[col] = value.to_string();
        lines[row] = cells.join(",");
        fs::write(path, lines.join("\n") + "\n").unwrap();
    }

    pub fn csv_cell(path: &Path, site: &str, column: &str) -> String {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let col = lines
            .next()
            .unwrap()
            .split(',')
            .position(|h| h == column)
            .unwrap();
        let row = lines.find(|l| l.split(',').next() == Some(site)).unwrap();
        row.split(',').nth(col).unwrap().to_string()
    }

    /// One targeted corruption per audited check, applied to an analyzed
    /// corpus under `out` with captures in `har`.
    pub fn inject(check: u8, har: &Path, out: &Path) {
        let report = out.join("results/sites/shopmart.json");
        match check {
            1 => edit_json(&report, |v| {
                let n = v["captures"][0]["request_count"].as_u64().unwrap();
                v["captures"][0]["request_count"] = (n + 1).into();
            }),
            3 => edit_json(&report, |v| {
                let q = v["captures"][0]["precise"]["composite"].as_f64().unwrap();
                v["captures"][0]["precise"]["composite"] = (q + 0.5).into();
            }),
            5 => {
                let csv = out.join("results/quality_scores.csv");
                let size: f64 = csv_cell(&csv, "shopmart", "size_kb").parse().unwrap();
                edit_csv(&csv, "shopmart", "size_kb", &format!("{:.1}", size + 0.1));
            }
            7 => fs::remove_file(har.join("shopmart__search__run3.har")).unwrap(),
            _ => panic!("no fault defined for check {check}"),
        }
    }
}
