//! Category-based pseudonyms and URL redaction.

use std::collections::{BTreeMap, BTreeSet};

use super::ReportError;
use crate::config::Manifest;
use crate::detect::normalize_path;
use crate::domain::{registered_domain, CategoryDictionary};
use crate::har::{host_of, url_path};
use crate::scoring::SiteScore;

/// Pseudonym stem for a category, e.g. "E-commerce" → "Commerce",
/// "Dev Blog" → "DevBlog".
pub fn pseudonym_prefix(category: &str) -> Option<String> {
    let key = category.trim().to_ascii_lowercase();
    match key.as_str() {
        "" => return None,
        "e-commerce" | "ecommerce" => return Some("Commerce".into()),
        "dev tools" | "developer tools" | "devtools" => return Some("DevTool".into()),
        _ => {}
    }
    let stem: String = category
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut chars = w.chars();
            let first = chars.next().map(|c| c.to_ascii_uppercase());
            first.into_iter().chain(chars).collect::<String>()
        })
        .collect();
    (!stem.is_empty()).then_some(stem)
}

/// Raw site id → `<Prefix>-<k>`, with k counting up per prefix in the
/// order sites are first assigned.
#[derive(Debug, Clone, Default)]
pub struct PseudonymMap {
    assigned: BTreeMap<String, String>,
    used: BTreeSet<String>,
    counters: BTreeMap<String, u32>,
}

impl PseudonymMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, raw: &str) -> Option<&str> {
        self.assigned.get(raw).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.assigned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned.is_empty()
    }

    /// Assigns (or returns the existing) pseudonym. An id that already has
    /// the `<Prefix>-<k>` shape for its category is kept as is.
    pub fn assign(
        &mut self,
        raw: &str,
        category: &str,
        fixed: Option<&str>,
    ) -> Result<String, ReportError> {
        if let Some(p) = self.assigned.get(raw) {
            return Ok(p.clone());
        }
        let pseudonym = match fixed {
            Some(f) => f.to_string(),
            None => {
                let prefix = pseudonym_prefix(category)
                    .ok_or_else(|| ReportError::CategoryMissing(raw.to_string()))?;
                let existing = raw
                    .strip_prefix(&prefix)
                    .and_then(|r| r.strip_prefix('-'))
                    .and_then(|k| k.parse::<u32>().ok())
                    .filter(|&k| k >= 1 && !self.used.contains(raw));
                let counter = self.counters.entry(prefix.clone()).or_insert(0);
                match existing {
                    Some(k) => {
                        *counter = (*counter).max(k);
                        raw.to_string()
                    }
                    None => loop {
                        *counter += 1;
                        let candidate = format!("{prefix}-{counter}");
                        if !self.used.contains(&candidate) {
                            break candidate;
                        }
                    },
                }
            }
        };
        self.used.insert(pseudonym.clone());
        self.assigned.insert(raw.to_string(), pseudonym.clone());
        Ok(pseudonym)
    }
}

/// Case-insensitive removal of sensitive strings.
#[derive(Debug, Clone, Default)]
pub struct Redactor {
    needles: Vec<String>,
}

pub const REDACTED: &str = "[redacted]";

impl Redactor {
    pub fn new<I, S>(needles: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut needles: Vec<String> = needles
            .into_iter()
            .map(|s| s.as_ref().trim().to_ascii_lowercase())
            .filter(|s| !s.is_empty())
            .collect();
        needles.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        needles.dedup();
        Self { needles }
    }

    pub fn scrub(&self, text: &str) -> String {
        let mut out = text.to_string();
        for needle in &self.needles {
            // ASCII lowercasing keeps byte offsets aligned.
            while let Some(pos) = out.to_ascii_lowercase().find(needle.as_str()) {
                out.replace_range(pos..pos + needle.len(), REDACTED);
            }
        }
        out
    }
}

fn is_redacted(s: &str) -> bool {
    s.starts_with("first-party") || s.starts_with("third-party") || s.starts_with("other/")
}

/// Party label plus category for a host, e.g. `third-party/analytics`.
fn host_label(host: &str, site_domain: Option<&str>, dict: &CategoryDictionary) -> String {
    match registered_domain(host) {
        Ok(d) if site_domain.is_some_and(|s| s.eq_ignore_ascii_case(&d)) => "first-party".into(),
        Ok(_) => format!("third-party/{}", dict.categorize(host)),
        Err(_) => "other".into(),
    }
}

/// Reduces a URL (or bare host) to party/category plus path template.
pub fn redact_url(url: &str, site_domain: Option<&str>, dict: &CategoryDictionary) -> String {
    if is_redacted(url) {
        return url.to_string();
    }
    let Ok(parsed) = url::Url::parse(url) else {
        return host_label(url, site_domain, dict);
    };
    let host = host_of(url);
    if host.is_empty() {
        return format!("other/{}", parsed.scheme());
    }
    format!(
        "{}{}",
        host_label(&host, site_domain, dict),
        normalize_path(url_path(url))
    )
}

/// Replaces site ids with pseudonyms and strips hostnames and full URLs
/// from everything carried in the scores.
pub fn anonymize(
    batch: Vec<SiteScore>,
    map: &mut PseudonymMap,
    manifest: &Manifest,
    dict: &CategoryDictionary,
) -> Result<Vec<SiteScore>, ReportError> {
    let mut needles = manifest.hostnames();
    needles.extend(
        manifest
            .sites
            .iter()
            .filter(|s| s.id.contains('.'))
            .map(|s| s.id.clone()),
    );
    let redactor = Redactor::new(&needles);

    batch
        .into_iter()
        .map(|mut site| {
            let raw = site.meta.site_id.clone();
            let entry = manifest.site(&raw);
            let site_domain = entry.map(|e| e.site_domain());
            let pseudonym = map.assign(
                &raw,
                &site.meta.category,
                entry.and_then(|e| e.pseudonym.as_deref()),
            )?;
            site.meta.site_id = pseudonym.clone();
            site.meta.category = redactor.scrub(&site.meta.category);
            site.meta.architecture_note = redactor.scrub(&site.meta.architecture_note);
            site.warnings = site.warnings.iter().map(|w| redactor.scrub(w)).collect();
            for capture in &mut site.capture_scores {
                capture.provenance.site_id = pseudonym.clone();
                capture.warnings = capture.warnings.iter().map(|w| redactor.scrub(w)).collect();
                for dim in &mut capture.dimensions {
                    for ev in &mut dim.evidence {
                        let mut description = ev.description.clone();
                        let mut urls = Vec::with_capacity(ev.urls.len());
                        for u in &ev.urls {
                            let r = redact_url(u, site_domain.as_deref(), dict);
                            if u.contains("://") {
                                description = description.replace(u.as_str(), &r);
                            }
                            let r = redactor.scrub(&r);
                            if !urls.contains(&r) {
                                urls.push(r);
                            }
                        }
                        ev.description = redactor.scrub(&description);
                        ev.urls = urls;
                    }
                }
            }
            Ok(site)
        })
        .collect()
}
