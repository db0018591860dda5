//! Third-party host categories.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DomainError;

const DEFAULT_DICTIONARY: &str = include_str!("../../data/third_party_categories.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThirdPartyCategory {
    Analytics,
    Ads,
    Social,
    Cdn,
    Tracking,
    Other,
}

impl ThirdPartyCategory {
    pub const ALL: [ThirdPartyCategory; 6] = [
        ThirdPartyCategory::Analytics,
        ThirdPartyCategory::Ads,
        ThirdPartyCategory::Social,
        ThirdPartyCategory::Cdn,
        ThirdPartyCategory::Tracking,
        ThirdPartyCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ThirdPartyCategory::Analytics => "analytics",
            ThirdPartyCategory::Ads => "ads",
            ThirdPartyCategory::Social => "social",
            ThirdPartyCategory::Cdn => "cdn",
            ThirdPartyCategory::Tracking => "tracking",
            ThirdPartyCategory::Other => "other",
        }
    }
}

impl fmt::Display for ThirdPartyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThirdPartyCategory {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ThirdPartyCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| DomainError::Dictionary(format!("unknown category {s:?}")))
    }
}

/// Host-substring patterns mapped to categories, kept longest first and
/// then lexicographic so lookups are deterministic.
#[derive(Debug, Clone)]
pub struct CategoryDictionary {
    patterns: Vec<(String, ThirdPartyCategory)>,
}

impl Default for CategoryDictionary {
    fn default() -> Self {
        Self::parse(DEFAULT_DICTIONARY).expect("bundled dictionary is valid")
    }
}

impl CategoryDictionary {
    pub fn new<I>(patterns: I) -> Result<Self, DomainError>
    where
        I: IntoIterator<Item = (String, ThirdPartyCategory)>,
    {
        let mut patterns: Vec<_> = patterns
            .into_iter()
            .map(|(p, c)| (p.to_ascii_lowercase(), c))
            .collect();
        if patterns.is_empty() {
            return Err(DomainError::Dictionary("dictionary is empty".into()));
        }
        patterns.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        patterns.dedup_by(|a, b| a.0 == b.0);
        Ok(Self { patterns })
    }

    /// `pattern<TAB>category` per line, `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, DomainError> {
        let mut patterns = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (pattern, category) = line.split_once('\t').ok_or_else(|| {
                DomainError::Dictionary(format!("line {}: expected pattern<TAB>category", n + 1))
            })?;
            let pattern = pattern.trim();
            if pattern.is_empty() {
                return Err(DomainError::Dictionary(format!(
                    "line {}: empty pattern",
                    n + 1
                )));
            }
            patterns.push((pattern.to_string(), category.parse()?));
        }
        Self::new(patterns)
    }

    pub fn from_file(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DomainError::Dictionary(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[(String, ThirdPartyCategory)] {
        &self.patterns
    }

    /// First pattern contained in `host` decides; no hit means `Other`.
    pub fn categorize(&self, host: &str) -> ThirdPartyCategory {
        let host = host.to_ascii_lowercase();
        self.patterns
            .iter()
            .find(|(p, _)| host.contains(p.as_str()))
            .map_or(ThirdPartyCategory::Other, |(_, c)| *c)
    }
}

pub fn categorize_third_party(host: &str, dict: &CategoryDictionary) -> ThirdPartyCategory {
    dict.categorize(host)
}
