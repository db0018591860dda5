//! Batch analysis: capture directory in, published outputs out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::classify::ApiClassifier;
use crate::config::{ConfigError, Manifest, Settings};
use crate::domain::{CategoryDictionary, DomainError};
use crate::har::{list_har_files, parse_batch, HarError};
use crate::report::{
    anonymize, antipattern_csv, build_site_report, site_csv, site_key, summary_csv,
    AnalysisConfigDoc, ManifestRecord, OutputLayout, PseudonymMap, ReportError,
};
use crate::scoring::{
    aggregate_site, Auditor, CaptureScore, ScoringError, SiteMeta, SiteScore, WeightVector,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no .har files in {0}")]
    NoInputFiles(PathBuf),
    #[error("manifest not found: {0}")]
    ManifestMissing(PathBuf),
    #[error("every capture file failed to parse")]
    AllFilesFailed,
    #[error("no capture belongs to a manifest site")]
    NoSites,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Har(#[from] HarError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Other(String),
}

/// Inputs of one analysis run.
#[derive(Debug, Clone, Default)]
pub struct BatchConfig {
    pub har_dir: PathBuf,
    pub manifest: PathBuf,
    pub weights: Option<PathBuf>,
    pub anonymize: bool,
    pub out_dir: PathBuf,
    pub dictionary: Option<PathBuf>,
    /// Thresholds and validator settings.
    pub settings: Option<PathBuf>,
    /// Replacement API path patterns, one per line.
    pub api_patterns: Option<PathBuf>,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

#[derive(Debug)]
pub struct BatchOutcome {
    /// Site scores as published (pseudonymous when anonymized).
    pub sites: Vec<SiteScore>,
    /// One line per file or site that was skipped.
    pub errors: Vec<String>,
    pub written: Vec<PathBuf>,
    pub layout: OutputLayout,
}

impl BatchConfig {
    fn auditor(&self) -> Result<Auditor, PipelineError> {
        let weights = match &self.weights {
            Some(p) => WeightVector::from_file(p)?,
            None => WeightVector::default(),
        };
        let dictionary = match &self.dictionary {
            Some(p) => CategoryDictionary::from_file(p)?,
            None => CategoryDictionary::default(),
        };
        let thresholds = match &self.settings {
            Some(p) => Settings::from_file(p)?.thresholds,
            None => Default::default(),
        };
        let classifier = match &self.api_patterns {
            Some(p) => ApiClassifier::from_pattern_file(p)
                .map_err(|e| PipelineError::Other(format!("{}: {e}", p.display())))?,
            None => ApiClassifier::default(),
        };
        Ok(Auditor {
            classifier,
            dictionary,
            thresholds,
            weights,
        })
    }
}

/// Runs the whole batch on a dedicated thread pool.
pub fn analyze(config: &BatchConfig) -> Result<BatchOutcome, PipelineError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.jobs.filter(|&n| n > 0) {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| PipelineError::Other(e.to_string()))?;
    pool.install(|| analyze_in_pool(config))
}

fn analyze_in_pool(config: &BatchConfig) -> Result<BatchOutcome, PipelineError> {
    if !config.manifest.is_file() {
        return Err(PipelineError::ManifestMissing(config.manifest.clone()));
    }
    let manifest = Manifest::from_file(&config.manifest)?;
    let auditor = config.auditor()?;

    if list_har_files(&config.har_dir)?.is_empty() {
        return Err(PipelineError::NoInputFiles(config.har_dir.clone()));
    }
    let parsed = parse_batch(&config.har_dir)?;
    let mut errors: Vec<String> = parsed
        .errors
        .iter()
        .map(|(path, e)| format!("{}: {e}", path.display()))
        .collect();
    if parsed.captures.is_empty() {
        return Err(PipelineError::AllFilesFailed);
    }

    let scored: Vec<(String, CaptureScore)> = parsed
        .captures
        .par_iter()
        .filter_map(|c| {
            let site = manifest.site(&c.provenance.site_id)?;
            Some((
                site.id.clone(),
                auditor.score_capture(c, &site.site_domain()),
            ))
        })
        .collect();
    for c in &parsed.captures {
        if manifest.site(&c.provenance.site_id).is_none() {
            errors.push(format!(
                "{}: site not in manifest",
                c.provenance.file_name()
            ));
        }
    }

    let mut by_site: BTreeMap<String, Vec<CaptureScore>> = BTreeMap::new();
    for (id, score) in scored {
        by_site.entry(id).or_default().push(score);
    }

    let mut sites = Vec::new();
    let mut keys = BTreeMap::new();
    let mut records = Vec::new();
    for entry in &manifest.sites {
        let Some(captures) = by_site.remove(&entry.id) else {
            errors.push(format!("{}: no usable captures", entry.id));
            continue;
        };
        let mut pages = entry.pages.clone();
        for c in &captures {
            if !pages.contains(&c.provenance.page_id) {
                pages.push(c.provenance.page_id.clone());
            }
        }
        let score = aggregate_site(
            captures,
            SiteMeta {
                site_id: entry.id.clone(),
                category: entry.category.clone(),
                architecture_note: entry.architecture.clone(),
            },
        )?;
        keys.insert(entry.id.clone(), site_key(&entry.id));
        records.push((entry, pages));
        sites.push(score);
    }
    if sites.is_empty() {
        return Err(PipelineError::NoSites);
    }

    // Keys are taken from raw ids before pseudonyms replace them.
    let raw_ids: Vec<String> = sites.iter().map(|s| s.site_id().to_string()).collect();
    let sites = if config.anonymize {
        let mut map = PseudonymMap::new();
        anonymize(sites, &mut map, &manifest, &auditor.dictionary)?
    } else {
        sites
    };

    let layout = OutputLayout::new(&config.out_dir);
    let written = write_outputs(
        &layout,
        &sites,
        &raw_ids,
        &keys,
        &records,
        &auditor,
        config.anonymize,
    )?;
    Ok(BatchOutcome {
        sites,
        errors,
        written,
        layout,
    })
}

fn write_outputs(
    layout: &OutputLayout,
    sites: &[SiteScore],
    raw_ids: &[String],
    keys: &BTreeMap<String, String>,
    records: &[(&crate::config::SiteEntry, Vec<String>)],
    auditor: &Auditor,
    anonymized: bool,
) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: String| -> Result<(), PipelineError> {
        write(&path, &text)?;
        written.push(path);
        Ok(())
    };

    clear_reports(&layout.sites_dir())?;
    put(layout.quality_csv(), site_csv(sites)?)?;
    put(layout.antipattern_csv(), antipattern_csv(sites)?)?;
    put(layout.summary_csv(), summary_csv(sites)?)?;
    let config_doc = AnalysisConfigDoc {
        anonymized,
        weights: auditor.weights.to_map(),
        thresholds: auditor.thresholds.clone(),
    };
    put(layout.config_json(), pretty(&config_doc))?;

    let mut manifest_out = Vec::new();
    for ((site, raw), (entry, pages)) in sites.iter().zip(raw_ids).zip(records) {
        let key = &keys[raw];
        let doc = build_site_report(site, key, anonymized);
        put(layout.site_report(site.site_id()), pretty(&doc))?;
        manifest_out.push(ManifestRecord {
            site: site.site_id().to_string(),
            site_key: key.clone(),
            category: site.meta.category.clone(),
            architecture: site.meta.architecture_note.clone(),
            pages: pages.clone(),
            url: if anonymized {
                "redacted".into()
            } else {
                format!("https://{}/", entry.domain)
            },
            completeness_exempt: entry.completeness_exempt,
        });
    }
    // Never leave the other mode's manifest behind.
    let stale = layout.manifest(!anonymized);
    if stale.is_file() {
        std::fs::remove_file(&stale).map_err(|e| io(&stale, e))?;
    }
    put(layout.manifest(anonymized), pretty(&manifest_out))?;
    Ok(written)
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}

fn io(path: &Path, e: std::io::Error) -> PipelineError {
    PipelineError::Report(ReportError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| io(path, e))
}

/// Removes reports left by an earlier run so stale sites cannot linger.
fn clear_reports(dir: &Path) -> Result<(), PipelineError> {
    let Ok(rd) = std::fs::read_dir(dir) else {
        return Ok(());
    };
    for item in rd.flatten() {
        let path = item.path();
        if path.extension().is_some_and(|x| x == "json") {
            std::fs::remove_file(&path).map_err(|e| io(&path, e))?;
        }
    }
    Ok(())
}
