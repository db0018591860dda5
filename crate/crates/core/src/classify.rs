//! API call identification.
//!
//! An entry counts as an API call when any of five header/path heuristics
//! fires. Every heuristic that fired is recorded on the view.

use std::fmt;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::har::{HarCapture, HarEntry, Side};

/// The five API-call heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heuristic {
    /// Response Content-Type is JSON or GraphQL.
    ResponseContentType,
    /// `X-Requested-With: XMLHttpRequest` on the request.
    XhrHeader,
    /// Request Accept includes JSON.
    AcceptHeader,
    /// Request body declared as JSON.
    RequestContentType,
    /// URL path contains a known API prefix.
    UrlPattern,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Heuristic::ResponseContentType,
        Heuristic::XhrHeader,
        Heuristic::AcceptHeader,
        Heuristic::RequestContentType,
        Heuristic::UrlPattern,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Heuristic::ResponseContentType => "H1_response_content_type",
            Heuristic::XhrHeader => "H2_xhr_header",
            Heuristic::AcceptHeader => "H3_accept_header",
            Heuristic::RequestContentType => "H4_request_content_type",
            Heuristic::UrlPattern => "H5_url_pattern",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for Heuristic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

/// Small set of heuristics, iterated in H1..H5 order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct HeuristicSet(u8);

impl HeuristicSet {
    pub fn insert(&mut self, h: Heuristic) {
        self.0 |= h.bit();
    }

    pub fn contains(self, h: Heuristic) -> bool {
        self.0 & h.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Heuristic> {
        Heuristic::ALL
            .into_iter()
            .filter(move |h| self.contains(*h))
    }
}

impl FromIterator<Heuristic> for HeuristicSet {
    fn from_iter<I: IntoIterator<Item = Heuristic>>(iter: I) -> Self {
        let mut set = HeuristicSet::default();
        for h in iter {
            set.insert(h);
        }
        set
    }
}

/// An entry that was classified as an API call.
#[derive(Debug, Clone, Copy)]
pub struct ApiCallView<'a> {
    pub entry: &'a HarEntry,
    pub matched: HeuristicSet,
}

pub const DEFAULT_PATH_PATTERNS: [&str; 9] = [
    "/api/",
    "/graphql",
    "/v1/",
    "/v2/",
    "/v3/",
    "/ajax/",
    "/rest/",
    "/_next/data/",
    "/wp-json/",
];

const JSON: &str = "application/json";
const GRAPHQL: &str = "application/graphql";

fn contains_ci(haystack: &str, needle: &str) -> bool {
    haystack.to_ascii_lowercase().contains(needle)
}

/// Applies the heuristics. Path patterns are overridable so that the
/// URL heuristic can be extended.
#[derive(Debug, Clone)]
pub struct ApiClassifier {
    path_patterns: Vec<String>,
}

impl Default for ApiClassifier {
    fn default() -> Self {
        Self {
            path_patterns: DEFAULT_PATH_PATTERNS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl ApiClassifier {
    pub fn with_patterns<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            path_patterns: patterns.into_iter().map(Into::into).collect(),
        }
    }

    /// One pattern per line; blank lines and `#` comments skipped.
    pub fn from_pattern_text(text: &str) -> Self {
        Self::with_patterns(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn from_pattern_file(path: &Path) -> std::io::Result<Self> {
        Ok(Self::from_pattern_text(&std::fs::read_to_string(path)?))
    }

    pub fn path_patterns(&self) -> &[String] {
        &self.path_patterns
    }

    pub fn matched_heuristics(&self, entry: &HarEntry) -> HeuristicSet {
        let mut set = HeuristicSet::default();
        if let Some(ct) = entry.header(Side::Response, "content-type") {
            if contains_ci(ct, JSON) || contains_ci(ct, GRAPHQL) {
                set.insert(Heuristic::ResponseContentType);
            }
        }
        if entry
            .header(Side::Request, "x-requested-with")
            .is_some_and(|v| v.trim().eq_ignore_ascii_case("XMLHttpRequest"))
        {
            set.insert(Heuristic::XhrHeader);
        }
        if entry
            .header(Side::Request, "accept")
            .is_some_and(|v| contains_ci(v, JSON))
        {
            set.insert(Heuristic::AcceptHeader);
        }
        if entry
            .header(Side::Request, "content-type")
            .is_some_and(|v| contains_ci(v, JSON))
        {
            set.insert(Heuristic::RequestContentType);
        }
        let path = entry.path();
        if self.path_patterns.iter().any(|p| path.contains(p.as_str())) {
            set.insert(Heuristic::UrlPattern);
        }
        set
    }

    pub fn is_api_call<'a>(&self, entry: &'a HarEntry) -> Option<ApiCallView<'a>> {
        let matched = self.matched_heuristics(entry);
        (!matched.is_empty()).then_some(ApiCallView { entry, matched })
    }

    pub fn api_calls<'a>(&self, capture: &'a HarCapture) -> Vec<ApiCallView<'a>> {
        capture
            .entries
            .iter()
            .filter_map(|e| self.is_api_call(e))
            .collect()
    }
}

/// Classifies with the default pattern list.
pub fn is_api_call(entry: &HarEntry) -> Option<ApiCallView<'_>> {
    ApiClassifier::default().is_api_call(entry)
}

pub fn api_calls(capture: &HarCapture) -> Vec<ApiCallView<'_>> {
    ApiClassifier::default().api_calls(capture)
}
