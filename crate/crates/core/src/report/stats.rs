use serde::Serialize;

use crate::scoring::SiteScore;

/// Descriptive statistics over one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1); 0 for fewer than two values.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

/// `None` for an empty slice.
pub fn summary_stats(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let stddev = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Some(Stats {
        mean,
        median,
        stddev,
        min: sorted[0],
        max: sorted[n - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub metric: &'static str,
    pub stats: Stats,
}

pub(crate) type Column = (&'static str, fn(&SiteScore) -> f64);

/// Column extractors shared with the site table.
pub(crate) const SUMMARY_COLUMNS: [Column; 7] = [
    ("requests", |s| s.mean_requests),
    ("api_calls", |s| s.mean_api_calls),
    ("size_kb", |s| s.mean_size_kb),
    ("quality_score", |s| s.mean_composite),
    ("redundant_excess", |s| s.mean_raw[0]),
    ("missing_cache_pct", |s| s.mean_raw[3]),
    ("third_party_pct", |s| s.mean_raw[6]),
];

/// Statistics for every site-table column; empty for an empty batch.
pub fn summary_table(scores: &[SiteScore]) -> Vec<SummaryRow> {
    SUMMARY_COLUMNS
        .iter()
        .filter_map(|(metric, get)| {
            let values: Vec<f64> = scores.iter().map(get).collect();
            summary_stats(&values).map(|stats| SummaryRow { metric, stats })
        })
        .collect()
}
