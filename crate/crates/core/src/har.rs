//! HAR 1.2 ingestion.
//!
//! Maps the archive's `log.entries` onto [`HarEntry`] values. Only the
//! observables the detectors need are kept: method, URL, status, headers,
//! content type, sizes and timing. Response body text is never read.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("archive has no log.entries array")]
    MissingLog,
    #[error("file name {0:?} does not follow <site>__<page>__run<k>.har")]
    BadFileName(String),
    #[error("duplicate capture {0}")]
    DuplicateCapture(Provenance),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which side of the exchange a header belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Request,
    Response,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub name: String,
    pub value: String,
}

/// One request/response pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HarEntry {
    pub method: String,
    pub url: String,
    /// Lowercased hostname, empty when the URL has none (`data:`, `blob:`).
    pub host: String,
    /// 0 when the request never completed.
    pub status: u16,
    pub request_headers: Vec<Header>,
    pub response_headers: Vec<Header>,
    pub mime_type: String,
    /// -1 when unknown.
    pub body_size: i64,
    /// -1 when unknown.
    pub transfer_size: i64,
    pub started_at: DateTime<FixedOffset>,
    pub duration_ms: f64,
}

impl HarEntry {
    /// First header matching `name` case-insensitively.
    pub fn header(&self, side: Side, name: &str) -> Option<&str> {
        let headers = match side {
            Side::Request => &self.request_headers,
            Side::Response => &self.response_headers,
        };
        headers
            .iter()
            .find(|h| h.name.eq_ignore_ascii_case(name))
            .map(|h| h.value.as_str())
    }

    /// Path component of the URL, without query or fragment.
    pub fn path(&self) -> &str {
        url_path(&self.url)
    }

    /// Start instant in epoch milliseconds, sub-millisecond part kept.
    pub fn start_ms(&self) -> f64 {
        self.started_at.timestamp_micros() as f64 / 1000.0
    }

    pub fn end_ms(&self) -> f64 {
        self.start_ms() + self.duration_ms
    }

    /// Whether the response status is a definite HTTP status.
    pub fn completed(&self) -> bool {
        self.status >= 100
    }
}

/// Free-function form of [`HarEntry::header`].
pub fn header_value<'a>(entry: &'a HarEntry, side: Side, name: &str) -> Option<&'a str> {
    entry.header(side, name)
}

/// Lowercased host of `url`; empty when it has none or does not parse.
pub fn host_of(url: &str) -> String {
    url::Url::parse(url)
        .ok()
        .and_then(|u| {
            u.host_str()
                .map(|h| h.trim_end_matches('.').to_ascii_lowercase())
        })
        .unwrap_or_default()
}

/// Extracts the path of an absolute URL without normalizing it.
pub fn url_path(url: &str) -> &str {
    let rest = match url.find("://") {
        Some(i) => &url[i + 3..],
        None => return "",
    };
    let rest = match rest.find('/') {
        Some(i) => &rest[i..],
        None => return "/",
    };
    let end = rest.find(['?', '#']).unwrap_or(rest.len());
    &rest[..end]
}

/// Identifies one capture: site × page × run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub site_id: String,
    pub page_id: String,
    pub run_index: u32,
}

impl Provenance {
    pub fn new(site_id: impl Into<String>, page_id: impl Into<String>, run_index: u32) -> Self {
        Self {
            site_id: site_id.into(),
            page_id: page_id.into(),
            run_index,
        }
    }

    /// Parses `<site>__<page>__run<k>.har`.
    pub fn from_file_name(name: &str) -> Result<Self, HarError> {
        let bad = || HarError::BadFileName(name.to_string());
        let stem = name.strip_suffix(".har").ok_or_else(bad)?;
        let mut parts = stem.split("__");
        let (site, page, run) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(p), Some(r), None) => (s, p, r),
            _ => return Err(bad()),
        };
        let run_index: u32 = run
            .strip_prefix("run")
            .and_then(|k| k.parse().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(bad)?;
        if site.is_empty() || page.is_empty() {
            return Err(bad());
        }
        Ok(Self::new(site, page, run_index))
    }

    pub fn file_name(&self) -> String {
        format!(
            "{}__{}__run{}.har",
            self.site_id, self.page_id, self.run_index
        )
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/run{}", self.site_id, self.page_id, self.run_index)
    }
}

/// One parsed HAR file.
#[derive(Debug, Clone)]
pub struct HarCapture {
    pub provenance: Provenance,
    pub entries: Vec<HarEntry>,
    pub captured_at: Option<DateTime<FixedOffset>>,
    pub warnings: Vec<String>,
}

// Raw serde mirror of the parts of HAR 1.2 we read. Unknown fields,
// including response.content.text, are skipped by serde.

#[derive(Deserialize)]
struct RawHar {
    log: Option<RawLog>,
}

#[derive(Deserialize)]
struct RawLog {
    entries: Option<Vec<RawEntry>>,
    #[serde(default)]
    pages: Vec<RawPage>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawPage {
    started_date_time: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawEntry {
    started_date_time: String,
    #[serde(default)]
    time: Option<f64>,
    request: RawRequest,
    response: RawResponse,
}

#[derive(Deserialize)]
struct RawRequest {
    method: String,
    url: String,
    #[serde(default)]
    headers: Vec<Header>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawResponse {
    #[serde(default)]
    status: i64,
    #[serde(default)]
    headers: Vec<Header>,
    #[serde(default)]
    content: Option<RawContent>,
    #[serde(default)]
    body_size: Option<i64>,
    #[serde(default, rename = "_transferSize")]
    transfer_size: Option<i64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawContent {
    #[serde(default)]
    mime_type: Option<String>,
}

/// Parses one archive. Entries keep file order.
pub fn parse_har(raw: &[u8], provenance: Provenance) -> Result<HarCapture, HarError> {
    let text = std::str::from_utf8(raw)
        .map_err(|e| HarError::MalformedDocument(format!("not UTF-8: {e}")))?;
    let doc: RawHar =
        serde_json::from_str(text).map_err(|e| HarError::MalformedDocument(e.to_string()))?;
    let log = doc.log.ok_or(HarError::MissingLog)?;
    let raw_entries = log.entries.ok_or(HarError::MissingLog)?;

    let mut warnings = Vec::new();
    let mut entries = Vec::with_capacity(raw_entries.len());
    for (i, raw) in raw_entries.into_iter().enumerate() {
        entries.push(convert_entry(i, raw, &mut warnings)?);
    }
    if entries.is_empty() {
        warnings.push("archive contains no entries".to_string());
    }

    let captured_at = log
        .pages
        .first()
        .and_then(|p| p.started_date_time.as_deref())
        .and_then(|s| DateTime::parse_from_rfc3339(s).ok())
        .or_else(|| entries.iter().map(|e| e.started_at).min());

    Ok(HarCapture {
        provenance,
        entries,
        captured_at,
        warnings,
    })
}

fn convert_entry(
    index: usize,
    raw: RawEntry,
    warnings: &mut Vec<String>,
) -> Result<HarEntry, HarError> {
    let malformed = |msg: String| HarError::MalformedDocument(format!("entry {index}: {msg}"));

    let method = raw.request.method.trim().to_ascii_uppercase();
    if method.is_empty() || method.contains(char::is_whitespace) {
        return Err(malformed(format!(
            "invalid method {:?}",
            raw.request.method
        )));
    }
    let status = match raw.response.status {
        0 => 0,
        s @ 100..=599 => s as u16,
        s => return Err(malformed(format!("status {s} out of range"))),
    };
    let started_at = DateTime::parse_from_rfc3339(&raw.started_date_time)
        .map_err(|e| malformed(format!("startedDateTime: {e}")))?;

    let mut duration_ms = raw.time.unwrap_or(0.0);
    if !duration_ms.is_finite() || duration_ms < 0.0 {
        warnings.push(format!("entry {index}: time {duration_ms} clamped to 0"));
        duration_ms = 0.0;
    }

    let host = host_of(&raw.request.url);

    Ok(HarEntry {
        method,
        url: raw.request.url,
        host,
        status,
        request_headers: raw.request.headers,
        response_headers: raw.response.headers,
        mime_type: raw
            .response
            .content
            .and_then(|c| c.mime_type)
            .unwrap_or_default(),
        body_size: raw.response.body_size.filter(|&b| b >= 0).unwrap_or(-1),
        transfer_size: raw.response.transfer_size.filter(|&b| b >= 0).unwrap_or(-1),
        started_at,
        duration_ms,
    })
}

/// Reads and parses a single file. Provenance comes from the file name
/// unless given explicitly.
pub fn parse_har_file(path: &Path, provenance: Option<Provenance>) -> Result<HarCapture, HarError> {
    let provenance = match provenance {
        Some(p) => p,
        None => {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| HarError::BadFileName(path.display().to_string()))?;
            Provenance::from_file_name(name)?
        }
    };
    let bytes = fs::read(path).map_err(|source| HarError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_har(&bytes, provenance)
}

/// Outcome of parsing a directory: successes plus one error record per
/// failed file.
#[derive(Debug, Default)]
pub struct BatchParse {
    pub captures: Vec<HarCapture>,
    pub errors: Vec<(PathBuf, HarError)>,
}

/// Lists `*.har` files directly under `dir`, sorted by name.
pub fn list_har_files(dir: &Path) -> Result<Vec<PathBuf>, HarError> {
    let io = |source| HarError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for item in fs::read_dir(dir).map_err(io)? {
        let path = item.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "har") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Parses every `*.har` under `dir`. A bad file never aborts the batch.
/// Captures come back sorted by provenance.
pub fn parse_batch(dir: &Path) -> Result<BatchParse, HarError> {
    let files = list_har_files(dir)?;
    let results: Vec<_> = files
        .par_iter()
        .map(|path| (path.clone(), parse_har_file(path, None)))
        .collect();

    let mut batch = BatchParse::default();
    for (path, result) in results {
        match result {
            Ok(capture) => {
                if batch
                    .captures
                    .iter()
                    .any(|c| c.provenance == capture.provenance)
                {
                    batch
                        .errors
                        .push((path, HarError::DuplicateCapture(capture.provenance)));
                } else {
                    batch.captures.push(capture);
                }
            }
            Err(e) => batch.errors.push((path, e)),
        }
    }
    batch
        .captures
        .sort_by(|a, b| a.provenance.cmp(&b.provenance));
    Ok(batch)
}
