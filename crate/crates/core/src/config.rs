//! Site manifest and tuning configuration.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::Thresholds;
use crate::domain::registered_domain;
use crate::validate::ValidatorConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("invalid config: {0}")]
    Config(String),
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// One audited site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    /// Identifier used in capture file names.
    pub id: String,
    /// Site hostname; its registered domain anchors first-party traffic.
    pub domain: String,
    pub category: String,
    #[serde(default)]
    pub architecture: String,
    #[serde(default)]
    pub pages: Vec<String>,
    /// Fixed pseudonym, overriding the category counter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudonym: Option<String>,
    /// Declared exception to the capture-count check.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub completeness_exempt: bool,
}

impl SiteEntry {
    pub fn site_domain(&self) -> String {
        registered_domain(&self.domain).unwrap_or_else(|_| self.domain.to_ascii_lowercase())
    }
}

/// JSON array of [`SiteEntry`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub sites: Vec<SiteEntry>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let sites: Vec<SiteEntry> =
            serde_json::from_str(text).map_err(|e| ConfigError::Manifest(e.to_string()))?;
        let mut seen = BTreeSet::new();
        for site in &sites {
            if site.id.is_empty() || site.id.contains("__") || site.id.contains('/') {
                return Err(ConfigError::Manifest(format!("bad site id {:?}", site.id)));
            }
            if !seen.insert(site.id.as_str()) {
                return Err(ConfigError::Manifest(format!(
                    "duplicate site id {:?}",
                    site.id
                )));
            }
            registered_domain(&site.domain).map_err(|e| {
                ConfigError::Manifest(format!("site {:?}: domain {:?}: {e}", site.id, site.domain))
            })?;
        }
        Ok(Self { sites })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&read(path)?)
    }

    pub fn site(&self, id: &str) -> Option<&SiteEntry> {
        self.sites.iter().find(|s| s.id == id)
    }

    /// Hostnames that must never appear in anonymized output: each site's
    /// domain and its registered domain.
    pub fn hostnames(&self) -> Vec<String> {
        let mut names = BTreeSet::new();
        for s in &self.sites {
            names.insert(s.domain.to_ascii_lowercase());
            names.insert(s.site_domain());
        }
        names.into_iter().collect()
    }
}

/// Optional `--config` document: detector thresholds and validator limits.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub thresholds: Thresholds,
    pub validator: ValidatorConfig,
}

impl Settings {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&read(path)?)
    }
}
