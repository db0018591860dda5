use std::collections::{BTreeMap, BTreeSet};

use super::load::{Batch, HarRecord, RunConfig};
use super::{CheckResult, CheckStatus, ValidatorConfig};
use crate::domain::registered_domain;
use crate::report::fmt1;

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn clamp(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 100.0)
    }
}

/// Dimension score from its raw metric, written out again here so a fault
/// in the detector formulas cannot hide itself.
fn rescore(index: usize, raw: f64, cfg: &RunConfig) -> f64 {
    let t = |name, default| cfg.threshold(name, default);
    clamp(match index {
        0 => 100.0 - raw * t("redundant_penalty", 10.0),
        1 => 100.0 - raw * t("n_plus_one_penalty", 20.0),
        2 => 100.0 - raw / t("waterfall_ms_per_point", 50.0),
        3 | 6 => 100.0 - raw,
        4 => 100.0 - raw * t("oversized_penalty", 15.0),
        5 => 100.0 - raw / t("compression_kb_per_point", 5.0),
        _ => 100.0 - raw * t("error_penalty", 5.0),
    })
}

fn weighted(scores: &[f64], weights: &[f64; 8]) -> f64 {
    scores.iter().zip(weights).map(|(s, w)| w * clamp(*s)).sum()
}

pub(crate) fn request_counts(batch: &Batch, cfg: &ValidatorConfig) -> CheckResult {
    let mut r = CheckResult::new(1, "request_count_verification");
    for u in &batch.unreadable {
        r.note(format!("unreadable capture skipped: {u}"));
    }
    let by_site = batch.hars_by_site();
    for report in &batch.reports {
        let hars: BTreeMap<(&str, u32), &HarRecord> = by_site
            .get(report.site_key.as_str())
            .into_iter()
            .flatten()
            .map(|h| ((h.page.as_str(), h.run), *h))
            .collect();
        let mut all_matched = hars.len() == report.captures.len();
        for c in &report.captures {
            let Some(h) = hars.get(&(c.page.as_str(), c.run)) else {
                all_matched = false;
                r.note(format!(
                    "{}: {}/run{} has no capture file",
                    report.site, c.page, c.run
                ));
                continue;
            };
            let diff = (h.entries.len() as f64 - c.request_count as f64).abs();
            if diff > cfg.request_tolerance {
                r.fail(format!(
                    "{}: {} has {} entries, report says {}",
                    report.site,
                    h.file,
                    h.entries.len(),
                    c.request_count
                ));
            }
        }
        if all_matched {
            let har_mean = mean(hars.values().map(|h| h.entries.len() as f64));
            let reported = report.aggregate.precise.requests;
            if (har_mean - reported).abs() > cfg.request_tolerance {
                r.fail(format!(
                    "{}: mean requests {har_mean:.2} from captures, report says {reported:.2}",
                    report.site
                ));
            }
        } else {
            r.note(format!(
                "{}: capture files and report captures differ; site mean not compared",
                report.site
            ));
        }
    }
    r
}

/// A capture "loads" when some text/html response has status 200. Captures
/// without any html entry fall back to their first entry.
fn capture_loaded(h: &HarRecord) -> bool {
    let html: Vec<_> = h
        .entries
        .iter()
        .filter(|e| e.mime.contains("text/html"))
        .collect();
    if html.is_empty() {
        h.entries.first().is_some_and(|e| e.status == 200)
    } else {
        html.iter().any(|e| e.status == 200)
    }
}

pub(crate) fn invalid_sites(batch: &Batch) -> CheckResult {
    let mut r = CheckResult::new(2, "invalid_site_detection");
    for (key, hars) in batch.hars_by_site() {
        let name = batch
            .report_for_key(key)
            .map(|rep| rep.site.clone())
            .unwrap_or_else(|| hars[0].file.clone());
        if !hars.iter().any(|h| capture_loaded(h)) {
            r.fail(format!("{name}: no capture returned a 200 main document"));
            continue;
        }
        let secondary: Vec<_> = hars
            .iter()
            .flat_map(|h| h.entries.iter().filter(|e| !e.mime.contains("text/html")))
            .filter(|e| e.status >= 100)
            .collect();
        let mean_requests = mean(hars.iter().map(|h| h.entries.len() as f64));
        if !secondary.is_empty()
            && secondary.iter().all(|e| e.status >= 400)
            && mean_requests < 10.0
        {
            r.warn(format!(
                "{name}: every non-document response is an error over {mean_requests:.1} requests on average"
            ));
        }
    }
    r
}

pub(crate) fn scoring_formula(batch: &Batch, cfg: &ValidatorConfig) -> CheckResult {
    let mut r = CheckResult::new(3, "scoring_formula_verification");
    let run = &batch.config;
    let tol = cfg.score_tolerance;
    let weight_sum: f64 = run.weights.iter().sum();
    if (weight_sum - 1.0).abs() > 1e-6 || run.weights.iter().any(|w| *w < 0.0) {
        r.fail(format!("recorded weights sum to {weight_sum}"));
    }
    for report in &batch.reports {
        let mut composites = Vec::new();
        for c in &report.captures {
            let label = format!("{} {}/run{}", report.site, c.page, c.run);
            let dims = &c.precise.dimensions;
            if dims.len() != 8 {
                r.fail(format!("{label}: {} dimensions reported", dims.len()));
                continue;
            }
            for (i, d) in dims.iter().enumerate() {
                let expect = rescore(i, d.raw_metric, run);
                if (expect - d.score).abs() > tol {
                    r.fail(format!(
                        "{label}: {} score {} but raw {} gives {expect:.2}",
                        d.id, d.score, d.raw_metric
                    ));
                }
            }
            let scores: Vec<f64> = dims.iter().map(|d| d.score).collect();
            let q = weighted(&scores, &run.weights);
            for (what, reported) in [("precise", c.precise.composite), ("rounded", c.composite)] {
                if (q - reported).abs() > tol {
                    r.fail(format!(
                        "{label}: {what} composite {reported} but dimensions give {q:.2}"
                    ));
                }
            }
            composites.push(q);
        }
        if composites.is_empty() {
            continue;
        }
        let site_q = mean(composites.iter().copied());
        let reported = report.aggregate.precise.quality_score;
        if (site_q - reported).abs() > tol {
            r.fail(format!(
                "{}: site score {reported} but captures give {site_q:.2}",
                report.site
            ));
        }
        match batch.csv.iter().find(|row| row.site == report.site) {
            Some(row) => match row.cells.get("quality_score").map(|v| v.parse::<f64>()) {
                Some(Ok(v)) if (v - site_q).abs() <= tol => {}
                Some(Ok(v)) => r.fail(format!(
                    "{}: table quality_score {v} but captures give {site_q:.2}",
                    report.site
                )),
                _ => r.fail(format!("{}: table quality_score unreadable", report.site)),
            },
            None => r.fail(format!("{}: no table row", report.site)),
        }
        for (i, d) in report
            .aggregate
            .precise
            .dimensions
            .iter()
            .enumerate()
            .take(8)
        {
            let from_mean_raw = rescore(i, d.raw_metric, run);
            if (from_mean_raw - d.score).abs() > tol {
                r.note(format!(
                    "{}: {} mean score {:.2} vs {from_mean_raw:.2} from mean raw (averaging a clamped formula)",
                    report.site, d.id, d.score
                ));
            }
        }
    }
    r
}

/// Hosts with a known registered domain under multi-part suffixes.
pub(crate) const DOMAIN_VECTORS: [(&str, &str); 8] = [
    ("www.shop.example.co.uk", "example.co.uk"),
    ("cdn.static.example.com", "example.com"),
    ("a.b.example.com.au", "example.com.au"),
    ("x.y.example.co.jp", "example.co.jp"),
    ("news.example.org.uk", "example.org.uk"),
    ("service.example.gov.uk", "example.gov.uk"),
    ("a.city.kawasaki.jp", "city.kawasaki.jp"),
    ("EXAMPLE.co.uk.", "example.co.uk"),
];

fn observed_host(url: &str) -> Option<String> {
    let parsed = url::Url::parse(url).ok()?;
    match parsed.host()? {
        url::Host::Domain(d) => Some(d.to_ascii_lowercase()),
        _ => None,
    }
}

pub(crate) fn domain_extraction(batch: &Batch) -> CheckResult {
    let mut r = CheckResult::new(4, "domain_extraction_audit");
    for (host, expect) in DOMAIN_VECTORS {
        match registered_domain(host) {
            Ok(got) if got == expect => {}
            Ok(got) => r.fail(format!("{host}: got {got}, expected {expect}")),
            Err(e) => r.fail(format!("{host}: {e}")),
        }
    }
    let hosts: BTreeSet<String> = batch
        .hars
        .iter()
        .flat_map(|h| h.entries.iter().filter_map(|e| observed_host(&e.url)))
        .collect();
    for host in &hosts {
        match registered_domain(host) {
            Ok(d) => {
                if host != &d && !host.ends_with(&format!(".{d}")) {
                    r.fail(format!("{host}: {d} is not a suffix of the host"));
                } else if registered_domain(&d).as_deref() != Ok(d.as_str()) {
                    r.fail(format!("{host}: {d} is not stable under re-extraction"));
                }
            }
            Err(e) => r.note(format!("{host}: {e}")),
        }
    }
    r.note(format!("{} observed hosts audited", hosts.len()));
    r
}

pub(crate) fn csv_report_consistency(batch: &Batch) -> CheckResult {
    let mut r = CheckResult::new(5, "csv_report_consistency");
    let reported: BTreeSet<&str> = batch.reports.iter().map(|rep| rep.site.as_str()).collect();
    for row in &batch.csv {
        if !reported.contains(row.site.as_str()) {
            r.fail(format!("{}: table row without a report", row.site));
        }
    }
    for report in &batch.reports {
        let Some(row) = batch.csv.iter().find(|row| row.site == report.site) else {
            r.fail(format!("{}: report without a table row", report.site));
            continue;
        };
        let a = &report.aggregate.rounded;
        let p = &report.aggregate.precise;
        let fields = [
            ("requests", a.requests, p.requests),
            ("api_calls", a.api_calls, p.api_calls),
            ("size_kb", a.size_kb, p.size_kb),
            ("quality_score", a.quality_score, p.quality_score),
            ("redundant_excess", a.redundant_excess, p.redundant_excess),
            (
                "missing_cache_pct",
                a.missing_cache_pct,
                p.missing_cache_pct,
            ),
            ("third_party_pct", a.third_party_pct, p.third_party_pct),
        ];
        for (name, rounded, precise) in fields {
            let cell = row
                .cells
                .get(name)
                .map(String::as_str)
                .unwrap_or("<absent>");
            if cell != fmt1(rounded) {
                r.fail(format!(
                    "{}: {name} is {cell} in the table, {} in the report",
                    report.site,
                    fmt1(rounded)
                ));
            }
            if fmt1(precise) != fmt1(rounded) {
                r.fail(format!(
                    "{}: {name} rounded {rounded} disagrees with precise {precise}",
                    report.site
                ));
            }
        }
        if row.cells.get("category") != Some(&report.category) {
            r.fail(format!("{}: category differs", report.site));
        }
    }
    r
}

/// Average ranks (1-based), ties sharing their mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `None` when either side is constant or the
/// lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(rx.iter().copied()), mean(ry.iter().copied()));
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

pub(crate) fn score_sanity(batch: &Batch, cfg: &ValidatorConfig) -> CheckResult {
    let mut r = CheckResult::new(6, "score_sanity");
    let mut requests = Vec::new();
    let mut scores = Vec::new();
    for row in &batch.csv {
        let get = |k: &str| row.cells.get(k).and_then(|v| v.parse::<f64>().ok());
        if let (Some(q), Some(n)) = (get("quality_score"), get("requests")) {
            requests.push(n);
            scores.push(q);
        }
    }
    let n = requests.len();
    match spearman(&requests, &scores) {
        _ if n < cfg.min_sites_for_correlation => r.warn(format!(
            "{n} sites; correlation needs at least {}",
            cfg.min_sites_for_correlation
        )),
        None => r.warn("requests or scores are constant; correlation undefined"),
        Some(rho) if rho < 0.0 => r.note(format!("spearman rho {rho:.3} over {n} sites")),
        Some(rho) => r.fail(format!(
            "spearman rho {rho:.3} over {n} sites; heavier sites do not score lower"
        )),
    }
    r
}

pub(crate) fn har_completeness(batch: &Batch, cfg: &ValidatorConfig) -> CheckResult {
    let mut r = CheckResult::new(7, "har_completeness");
    let by_site = batch.hars_by_site();
    let exempt: BTreeSet<&str> = batch
        .manifest
        .exempt_keys
        .iter()
        .map(String::as_str)
        .collect();
    for report in &batch.reports {
        let n = by_site.get(report.site_key.as_str()).map_or(0, Vec::len);
        if n == cfg.expected_captures {
            continue;
        }
        let msg = format!(
            "{}: {n} capture files, expected {}",
            report.site, cfg.expected_captures
        );
        if exempt.contains(report.site_key.as_str()) {
            r.note(format!("{msg} (declared exception)"));
        } else {
            r.fail(msg);
        }
    }
    for (key, hars) in &by_site {
        if batch.report_for_key(key).is_none() {
            r.note(format!(
                "{}: capture files for a site with no report",
                hars[0].file
            ));
        }
    }
    r
}

pub(crate) fn run_consistency(batch: &Batch, cfg: &ValidatorConfig) -> CheckResult {
    let mut r = CheckResult::new(8, "run_consistency");
    let mut pages: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for h in &batch.hars {
        pages
            .entry((h.site_key.as_str(), h.page.as_str()))
            .or_default()
            .push(h.entries.len());
    }
    for ((key, page), counts) in pages {
        let (lo, hi) = (
            *counts.iter().min().expect("non-empty"),
            *counts.iter().max().expect("non-empty"),
        );
        let ratio = if lo == 0 {
            if hi == 0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            hi as f64 / lo as f64
        };
        if ratio > cfg.run_ratio_warn {
            let name = batch
                .report_for_key(key)
                .map_or(key, |rep| rep.site.as_str());
            r.warn(format!(
                "{name} {page}: request counts {lo}..{hi} across runs ({ratio:.1}x)"
            ));
        }
    }
    if r.status == CheckStatus::Pass {
        r.note(format!("max/min ratio limit {}x", cfg.run_ratio_warn));
    }
    r
}
