use std::path::Path;

use super::stats::{summary_table, SUMMARY_COLUMNS};
use super::{fmt1, write_file, ReportError};
use crate::scoring::SiteScore;

pub const SITE_CSV_HEADER: [&str; 9] = [
    "site",
    "category",
    "requests",
    "api_calls",
    "size_kb",
    "quality_score",
    "redundant_excess",
    "missing_cache_pct",
    "third_party_pct",
];

pub const ANTIPATTERN_HEADER: [&str; 9] = [
    "site",
    "redundant_excess",
    "n_plus_one_patterns",
    "waterfall_wasted_ms",
    "missing_cache_pct",
    "oversized_payloads",
    "compression_savings_kb",
    "third_party_pct",
    "error_pct",
];

pub const SUMMARY_HEADER: [&str; 6] = ["metric", "mean", "median", "stddev", "min", "max"];

/// Lowest score first; ties by site id.
fn sorted(scores: &[SiteScore]) -> Vec<&SiteScore> {
    let mut v: Vec<&SiteScore> = scores.iter().collect();
    v.sort_by(|a, b| {
        a.mean_composite
            .total_cmp(&b.mean_composite)
            .then_with(|| a.site_id().cmp(b.site_id()))
    });
    v
}

fn render(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn site_csv(scores: &[SiteScore]) -> Result<String, ReportError> {
    if scores.is_empty() {
        return Err(ReportError::Empty);
    }
    let rows = sorted(scores)
        .into_iter()
        .map(|s| {
            let mut row = vec![s.site_id().to_string(), s.meta.category.clone()];
            row.extend(SUMMARY_COLUMNS.iter().map(|(_, get)| fmt1(get(s))));
            row
        })
        .collect();
    Ok(render(&SITE_CSV_HEADER, rows))
}

pub fn antipattern_csv(scores: &[SiteScore]) -> Result<String, ReportError> {
    if scores.is_empty() {
        return Err(ReportError::Empty);
    }
    let rows = sorted(scores)
        .into_iter()
        .map(|s| {
            let mut row = vec![s.site_id().to_string()];
            row.extend(s.mean_raw.iter().map(|v| fmt1(*v)));
            row
        })
        .collect();
    Ok(render(&ANTIPATTERN_HEADER, rows))
}

pub fn summary_csv(scores: &[SiteScore]) -> Result<String, ReportError> {
    if scores.is_empty() {
        return Err(ReportError::Empty);
    }
    let rows = summary_table(scores)
        .into_iter()
        .map(|r| {
            vec![
                r.metric.to_string(),
                fmt1(r.stats.mean),
                fmt1(r.stats.median),
                fmt1(r.stats.stddev),
                fmt1(r.stats.min),
                fmt1(r.stats.max),
            ]
        })
        .collect();
    Ok(render(&SUMMARY_HEADER, rows))
}

/// Writes the site table; an empty batch is refused before touching disk.
pub fn write_site_csv(scores: &[SiteScore], path: &Path) -> Result<(), ReportError> {
    let text = site_csv(scores)?;
    write_file(path, text.as_bytes())
}
