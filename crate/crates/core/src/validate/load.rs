//! Reads a finished batch back from disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use super::ValidationError;
use crate::report::{site_key, OutputLayout, SiteReportFile};

/// What the validator needs from one capture file.
#[derive(Debug, Clone)]
pub(crate) struct HarRecord {
    pub file: String,
    pub site_key: String,
    pub page: String,
    pub run: u32,
    pub entries: Vec<HarLine>,
}

#[derive(Debug, Clone)]
pub(crate) struct HarLine {
    pub url: String,
    pub status: i64,
    pub mime: String,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ManifestInfo {
    pub exempt_keys: Vec<String>,
}

/// Analysis parameters as written in `analysis_config.json`.
#[derive(Debug, Clone)]
pub(crate) struct RunConfig {
    pub weights: [f64; 8],
    pub thresholds: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn threshold(&self, name: &str, default: f64) -> f64 {
        self.thresholds.get(name).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CsvRow {
    pub site: String,
    pub cells: BTreeMap<String, String>,
}

pub(crate) struct Batch {
    pub hars: Vec<HarRecord>,
    /// Files that could not be read, with the reason.
    pub unreadable: Vec<String>,
    pub reports: Vec<SiteReportFile>,
    pub csv: Vec<CsvRow>,
    pub config: RunConfig,
    pub manifest: ManifestInfo,
}

fn missing(what: impl Into<String>) -> ValidationError {
    ValidationError::MissingOutputs(what.into())
}

fn read_text(path: &Path) -> Result<String, ValidationError> {
    std::fs::read_to_string(path).map_err(|e| missing(format!("{}: {e}", path.display())))
}

fn parse_har(path: &Path) -> Result<HarRecord, String> {
    let file = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or("non-UTF-8 file name")?
        .to_string();
    let stem = file.strip_suffix(".har").ok_or("not a .har file")?;
    let parts: Vec<&str> = stem.split("__").collect();
    let [site, page, run] = parts[..] else {
        return Err("file name is not <site>__<page>__run<k>.har".into());
    };
    let run: u32 = run
        .strip_prefix("run")
        .and_then(|k| k.parse().ok())
        .ok_or("bad run index")?;
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    let doc: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    let entries = doc
        .pointer("/log/entries")
        .and_then(Value::as_array)
        .ok_or("no log.entries array")?;
    let entries = entries
        .iter()
        .map(|e| HarLine {
            url: e
                .pointer("/request/url")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string(),
            status: e
                .pointer("/response/status")
                .and_then(Value::as_i64)
                .unwrap_or(0),
            mime: e
                .pointer("/response/content/mimeType")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_ascii_lowercase(),
        })
        .collect();
    let (site_key, page) = (site_key(site), page.to_string());
    Ok(HarRecord {
        file,
        site_key,
        page,
        run,
        entries,
    })
}

fn har_paths(dir: &Path) -> Result<Vec<PathBuf>, ValidationError> {
    let rd = std::fs::read_dir(dir).map_err(|e| missing(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("har")))
        .collect();
    paths.sort();
    Ok(paths)
}

fn read_csv(path: &Path) -> Result<Vec<CsvRow>, ValidationError> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| missing(format!("{}: {e}", path.display())))?
        .clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| missing(format!("{}: {e}", path.display())))?;
        let cells: BTreeMap<String, String> = headers
            .iter()
            .zip(record.iter())
            .map(|(h, v)| (h.to_string(), v.to_string()))
            .collect();
        rows.push(CsvRow {
            site: cells.get("site").cloned().unwrap_or_default(),
            cells,
        });
    }
    Ok(rows)
}

fn read_config(path: &Path) -> Result<RunConfig, ValidationError> {
    let doc: Value = serde_json::from_str(&read_text(path)?)
        .map_err(|e| missing(format!("{}: {e}", path.display())))?;
    let mut weights = [0.0; 8];
    for (i, w) in weights.iter_mut().enumerate() {
        *w = doc
            .pointer(&format!("/weights/D{}", i + 1))
            .and_then(Value::as_f64)
            .ok_or_else(|| missing(format!("{}: weight D{} absent", path.display(), i + 1)))?;
    }
    let thresholds = doc
        .get("thresholds")
        .and_then(Value::as_object)
        .map(|m| {
            m.iter()
                .filter_map(|(k, v)| v.as_f64().map(|v| (k.clone(), v)))
                .collect()
        })
        .unwrap_or_default();
    Ok(RunConfig {
        weights,
        thresholds,
    })
}

#[derive(Deserialize)]
struct ManifestLine {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    site_key: Option<String>,
    #[serde(default)]
    completeness_exempt: bool,
}

/// Accepts both the written site manifest and the analysis input manifest.
fn read_manifest(path: &Path) -> Result<ManifestInfo, ValidationError> {
    let lines: Vec<ManifestLine> = serde_json::from_str(&read_text(path)?)
        .map_err(|e| missing(format!("{}: {e}", path.display())))?;
    let exempt_keys = lines
        .into_iter()
        .filter(|l| l.completeness_exempt)
        .filter_map(|l| l.site_key.or_else(|| l.id.as_deref().map(site_key)))
        .collect();
    Ok(ManifestInfo { exempt_keys })
}

impl Batch {
    pub fn load(
        har_dir: &Path,
        layout: &OutputLayout,
        manifest: Option<&Path>,
    ) -> Result<Self, ValidationError> {
        for required in [
            layout.quality_csv(),
            layout.config_json(),
            layout.sites_dir(),
        ] {
            if !required.exists() {
                return Err(missing(required.display().to_string()));
            }
        }

        let mut hars = Vec::new();
        let mut unreadable = Vec::new();
        for path in har_paths(har_dir)? {
            match parse_har(&path) {
                Ok(h) => hars.push(h),
                Err(e) => unreadable.push(format!("{}: {e}", path.display())),
            }
        }

        let mut reports = Vec::new();
        let rd = std::fs::read_dir(layout.sites_dir())
            .map_err(|e| missing(format!("{}: {e}", layout.sites_dir().display())))?;
        let mut report_paths: Vec<PathBuf> = rd
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        report_paths.sort();
        for path in report_paths {
            let doc: SiteReportFile = serde_json::from_str(&read_text(&path)?)
                .map_err(|e| missing(format!("{}: {e}", path.display())))?;
            reports.push(doc);
        }
        if reports.is_empty() {
            return Err(missing(format!(
                "{}: no site reports",
                layout.sites_dir().display()
            )));
        }

        let manifest = match manifest {
            Some(p) => read_manifest(p)?,
            None => [layout.manifest(true), layout.manifest(false)]
                .iter()
                .find(|p| p.is_file())
                .map(|p| read_manifest(p))
                .transpose()?
                .unwrap_or_default(),
        };

        Ok(Self {
            hars,
            unreadable,
            reports,
            csv: read_csv(&layout.quality_csv())?,
            config: read_config(&layout.config_json())?,
            manifest,
        })
    }

    /// Capture files grouped by site key.
    pub fn hars_by_site(&self) -> BTreeMap<&str, Vec<&HarRecord>> {
        let mut map: BTreeMap<&str, Vec<&HarRecord>> = BTreeMap::new();
        for h in &self.hars {
            map.entry(h.site_key.as_str()).or_default().push(h);
        }
        map
    }

    pub fn report_for_key(&self, key: &str) -> Option<&SiteReportFile> {
        self.reports.iter().find(|r| r.site_key == key)
    }
}
