//! Builders for synthetic entries and archives.
//!
//! Used by the fixture generator and the test suites. Archives written by
//! [`har_json`] are headers-only HAR 1.2 documents that round-trip through
//! [`crate::har::parse_har`].

use chrono::{DateTime, Duration, FixedOffset};
use serde_json::{json, Value};

use crate::har::{host_of, HarCapture, HarEntry, Header, Provenance};

/// Start instant all synthetic offsets are measured from.
pub fn epoch() -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339("2026-02-07T10:00:00.000Z").expect("valid literal")
}

#[derive(Debug, Clone)]
pub struct EntryBuilder {
    entry: HarEntry,
}

impl EntryBuilder {
    pub fn new(method: &str, url: &str) -> Self {
        Self {
            entry: HarEntry {
                method: method.to_string(),
                url: url.to_string(),
                host: host_of(url),
                status: 200,
                request_headers: Vec::new(),
                response_headers: Vec::new(),
                mime_type: String::new(),
                body_size: -1,
                transfer_size: -1,
                started_at: epoch(),
                duration_ms: 10.0,
            },
        }
    }

    pub fn get(url: &str) -> Self {
        Self::new("GET", url)
    }

    pub fn status(mut self, status: u16) -> Self {
        self.entry.status = status;
        self
    }

    pub fn request_header(mut self, name: &str, value: &str) -> Self {
        self.entry.request_headers.push(Header {
            name: name.to_string(),
            value: value.to_string(),
        });
        self
    }

    /// Adds a response header; `Content-Type` also sets the mime type.
    pub fn response_header(mut self, name: &str, value: &str) -> Self {
        if name.eq_ignore_ascii_case("content-type") && self.entry.mime_type.is_empty() {
            self.entry.mime_type = value.to_string();
        }
        self.entry.response_headers.push(Header {
            name: name.to_string(),
            value: value.to_string(),
        });
        self
    }

    /// JSON response with `Cache-Control` and gzip, the clean API shape.
    pub fn json(self) -> Self {
        self.response_header("Content-Type", "application/json")
            .response_header("Cache-Control", "max-age=60")
            .response_header("Content-Encoding", "gzip")
            .body_size(512)
    }

    pub fn body_size(mut self, bytes: i64) -> Self {
        self.entry.body_size = bytes;
        self
    }

    /// Starts `offset_ms` after [`epoch`] and lasts `duration_ms`.
    pub fn timing(mut self, offset_ms: f64, duration_ms: f64) -> Self {
        self.entry.started_at =
            epoch() + Duration::microseconds((offset_ms * 1000.0).round() as i64);
        self.entry.duration_ms = duration_ms;
        self
    }

    pub fn build(self) -> HarEntry {
        self.entry
    }
}

pub fn capture(site: &str, page: &str, run: u32, entries: Vec<HarEntry>) -> HarCapture {
    HarCapture {
        provenance: Provenance::new(site, page, run),
        entries,
        captured_at: Some(epoch()),
        warnings: Vec::new(),
    }
}

fn headers_json(headers: &[Header]) -> Value {
    Value::Array(
        headers
            .iter()
            .map(|h| json!({"name": h.name, "value": h.value}))
            .collect(),
    )
}

fn entry_json(e: &HarEntry) -> Value {
    let mut response = json!({
        "status": e.status,
        "statusText": "",
        "httpVersion": "HTTP/1.1",
        "cookies": [],
        "headers": headers_json(&e.response_headers),
        "content": {"size": e.body_size.max(0), "mimeType": e.mime_type},
        "redirectURL": "",
        "headersSize": -1,
        "bodySize": e.body_size,
    });
    if e.transfer_size >= 0 {
        response["_transferSize"] = json!(e.transfer_size);
    }
    json!({
        "startedDateTime": e.started_at.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
        "time": e.duration_ms,
        "request": {
            "method": e.method,
            "url": e.url,
            "httpVersion": "HTTP/1.1",
            "cookies": [],
            "headers": headers_json(&e.request_headers),
            "queryString": [],
            "headersSize": -1,
            "bodySize": 0,
        },
        "response": response,
        "cache": {},
        "timings": {"send": 0, "wait": e.duration_ms, "receive": 0},
    })
}

/// Serializes entries as a headers-only HAR 1.2 document.
pub fn har_json(entries: &[HarEntry]) -> String {
    let doc = json!({
        "log": {
            "version": "1.2",
            "creator": {"name": "har-audit synth", "version": env!("CARGO_PKG_VERSION")},
            "pages": [{
                "startedDateTime": epoch().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                "id": "page_1",
                "title": "",
                "pageTimings": {},
            }],
            "entries": entries.iter().map(entry_json).collect::<Vec<_>>(),
        }
    });
    serde_json::to_string_pretty(&doc).expect("json values serialize")
}
