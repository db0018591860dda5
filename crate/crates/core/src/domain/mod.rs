//! Registered-domain extraction, first/third-party split and third-party
//! categorization.

mod category;
mod psl;

use std::net::IpAddr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use category::{categorize_third_party, CategoryDictionary, ThirdPartyCategory};
pub use psl::SuffixList;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("empty host")]
    EmptyHost,
    #[error("invalid host {0:?}")]
    InvalidHost(String),
    #[error("category dictionary: {0}")]
    Dictionary(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartyLabel {
    FirstParty,
    ThirdParty,
}

impl PartyLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PartyLabel::FirstParty => "first-party",
            PartyLabel::ThirdParty => "third-party",
        }
    }
}

/// Registrable domain (eTLD+1) of `host` under the bundled suffix list.
/// IP literals come back unchanged.
pub fn registered_domain(host: &str) -> Result<String, DomainError> {
    registered_domain_with(SuffixList::bundled(), host)
}

pub fn registered_domain_with(list: &SuffixList, host: &str) -> Result<String, DomainError> {
    let host = host.trim();
    if host.is_empty() {
        return Err(DomainError::EmptyHost);
    }
    let bare = host.trim_start_matches('[').trim_end_matches(']');
    if bare.parse::<IpAddr>().is_ok() {
        return Ok(host.to_string());
    }
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    let valid = !host.is_empty()
        && host.split('.').all(|label| {
            !label.is_empty()
                && label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        });
    if !valid {
        return Err(DomainError::InvalidHost(host));
    }
    Ok(list.registrable(&host).to_string())
}

pub fn classify_party(entry_host: &str, site_domain: &str) -> Result<PartyLabel, DomainError> {
    let domain = registered_domain(entry_host)?;
    Ok(if domain.eq_ignore_ascii_case(site_domain) {
        PartyLabel::FirstParty
    } else {
        PartyLabel::ThirdParty
    })
}
