use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use har_audit::config::Settings;
use har_audit::detect::Dimension;
use har_audit::domain::registered_domain;
use har_audit::har::{parse_har_file, Provenance};
use har_audit::pipeline::{analyze, BatchConfig};
use har_audit::report::fmt1;
use har_audit::scoring::{Auditor, WeightVector};
use har_audit::validate::{run_validation, write_validation_report, ValidatorConfig};

#[derive(Parser)]
#[command(
    name = "har-audit",
    version,
    about = "API call quality auditing over HAR captures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every capture in a directory and write the result tables.
    Analyze {
        #[arg(long)]
        har_dir: PathBuf,
        /// JSON list of sites: id, domain, category, architecture, pages.
        #[arg(long)]
        manifest: PathBuf,
        /// Replace site names with category pseudonyms and redact URLs.
        #[arg(long)]
        anonymize: bool,
        /// JSON object of weights keyed D1..D8.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Third-party category dictionary (pattern<TAB>category).
        #[arg(long)]
        dict: Option<PathBuf>,
        /// API path patterns, one per line.
        #[arg(long)]
        api_patterns: Option<PathBuf>,
        /// Thresholds and validator limits as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Re-audit a finished batch from its files.
    Validate {
        #[arg(long)]
        har_dir: PathBuf,
        /// Output root or its results/ directory.
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a single capture.
    Score {
        file: PathBuf,
        /// Site hostname; its registered domain is first-party.
        #[arg(long)]
        domain: String,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Exit 1 when the composite falls below this.
        #[arg(long)]
        min_score: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze {
            har_dir,
            manifest,
            anonymize,
            weights,
            out,
            dict,
            api_patterns,
            config,
            jobs,
        } => cmd_analyze(&BatchConfig {
            har_dir,
            manifest,
            weights,
            anonymize,
            out_dir: out,
            dictionary: dict,
            settings: config,
            api_patterns,
            jobs,
        }),
        Command::Validate {
            har_dir,
            results,
            manifest,
            config,
        } => cmd_validate(&har_dir, &results, manifest.as_deref(), config.as_deref()),
        Command::Score {
            file,
            domain,
            weights,
            min_score,
        } => cmd_score(&file, &domain, weights.as_deref(), min_score),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_analyze(config: &BatchConfig) -> Result<bool> {
    let outcome = analyze(config)?;
    for site in &outcome.sites {
        println!(
            "{:<24} {:>6} req {:>6} api {:>9} KB  Q {:>5}",
            site.site_id(),
            fmt1(site.mean_requests),
            fmt1(site.mean_api_calls),
            fmt1(site.mean_size_kb),
            fmt1(site.mean_composite),
        );
    }
    for e in &outcome.errors {
        eprintln!("skipped: {e}");
    }
    println!(
        "{} sites, {} files written under {}",
        outcome.sites.len(),
        outcome.written.len(),
        outcome.layout.root.display()
    );
    Ok(true)
}

fn cmd_validate(
    har_dir: &Path,
    results: &Path,
    manifest: Option<&Path>,
    config: Option<&Path>,
) -> Result<bool> {
    let limits = match config {
        Some(p) => Settings::from_file(p)?.validator,
        None => ValidatorConfig::default(),
    };
    let checks = run_validation(har_dir, results, manifest, &limits)?;
    for c in &checks {
        println!("{}", c.summary_line());
    }
    let path = write_validation_report(results, &checks)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!(
        "{} of {} checks passed; report at {}",
        checks.len() - failed,
        checks.len(),
        path.display()
    );
    Ok(failed == 0)
}

fn cmd_score(file: &Path, domain: &str, weights: Option<&Path>, min: Option<f64>) -> Result<bool> {
    let name = file
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("capture");
    let provenance = Provenance::from_file_name(name)
        .unwrap_or_else(|_| Provenance::new(name.trim_end_matches(".har"), "page", 1));
    let capture = parse_har_file(file, Some(provenance))?;
    let site_domain =
        registered_domain(domain).with_context(|| format!("bad domain {domain:?}"))?;
    let auditor = Auditor {
        weights: match weights {
            Some(p) => WeightVector::from_file(p)?,
            None => WeightVector::default(),
        },
        ..Auditor::default()
    };
    let score = auditor.score_capture(&capture, &site_domain);
    println!(
        "{} ({} requests, {} API calls)",
        file.display(),
        score.totals.request_count,
        score.totals.api_call_count
    );
    for d in Dimension::ALL {
        let r = score.dimension(d);
        println!(
            "  {} {:<24} score {:>5}  raw {:>8} {:<8} evidence {}",
            d.id(),
            d.name(),
            fmt1(r.score),
            fmt1(r.raw_metric),
            d.unit(),
            r.evidence.len()
        );
    }
    println!("composite {}", fmt1(score.composite));
    for w in &capture.warnings {
        eprintln!("warning: {w}");
    }
    Ok(min.is_none_or(|t| score.composite >= t))
}
