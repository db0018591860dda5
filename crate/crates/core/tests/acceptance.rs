//! One line per acceptance criterion. Runs without the libtest harness so
//! the lines always reach the console.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use common::faults::{failing, inject, validate};
use common::{
    analyze_corpus, arb, expected_composite, expected_score, files_under, fixtures, golden_raw,
    oracle,
};
use har_audit::config::Manifest;
use har_audit::detect::{Dimension, Thresholds};
use har_audit::har::{parse_har_file, HarEntry};
use har_audit::pipeline::{analyze, BatchConfig};
use har_audit::report::SiteReportFile;
use har_audit::scoring::{composite_of, Auditor, CaptureScore, WeightVector};
use har_audit::synth::capture;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn composite_formula() -> Outcome {
    let mut s = [100.0; 8];
    s[0] = 80.0;
    let q = composite_of(&s, &WeightVector::default());
    ensure(q == 97.0, || format!("Q = {q}, expected 97.0"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    analyze_corpus(dir.path(), false);
    let mut checked = 0;
    for path in files_under(&dir.path().join("out/results/sites")) {
        let doc: SiteReportFile =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        for c in &doc.captures {
            let dims: Vec<f64> = c.dimensions.iter().map(|d| d.score).collect();
            let q = expected_composite(&dims.try_into().unwrap());
            ensure((q - c.composite).abs() <= 0.2, || {
                format!(
                    "{} {}/run{}: {q} vs {}",
                    doc.site, c.page, c.run, c.composite
                )
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "Q = 97.0; {checked} reported composites within 0.2"
    ))
}

fn score_golden(name: &str) -> CaptureScore {
    let path = fixtures().join(format!("golden/golden__{name}__run1.har"));
    let cap = parse_har_file(&path, None).expect("fixture parses");
    Auditor::default().score_capture(&cap, "golden.example")
}

fn golden_corpus() -> Outcome {
    let fixtures_ = golden_raw();
    ensure(fixtures_.len() >= 12, || {
        format!("{} fixtures", fixtures_.len())
    })?;
    for (name, raw) in &fixtures_ {
        let s = score_golden(name);
        for d in Dimension::ALL {
            let i = d.index();
            let got = s.dimension(d);
            let want = expected_score(i, raw[i]);
            ensure(
                (got.raw_metric - raw[i]).abs() < 1e-9 && (got.score - want).abs() < 1e-9,
                || {
                    format!(
                        "{name} {d}: ({}, {}) vs ({}, {want})",
                        got.raw_metric, got.score, raw[i]
                    )
                },
            )?;
        }
    }
    let d4 = score_golden("missing_cache").dimension(Dimension::D4).score;
    let d7 = score_golden("third_party").dimension(Dimension::D7).score;
    let d1 = score_golden("redundant").dimension(Dimension::D1).score;
    ensure((d4 - 18.1).abs() <= 0.05, || format!("D4 {d4}"))?;
    ensure((d7 - 1.3).abs() <= 0.05, || format!("D7 {d7}"))?;
    ensure(d1 == 80.0, || format!("D1 {d1}"))?;
    Ok(format!(
        "{} captures exact to 1e-9; D1 {d1}, D4 {d4:.3}, D7 {d7:.3}",
        fixtures_.len()
    ))
}

fn zero_anti_pattern() -> Outcome {
    let s = score_golden("minimal");
    ensure(
        s.totals.request_count == 6 && s.totals.api_call_count == 0,
        || format!("{} requests", s.totals.request_count),
    )?;
    ensure(s.composite == 100.0, || format!("Q {}", s.composite))?;
    Ok("6 first-party requests, composite 100.0".into())
}

fn oracle_equivalence() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let auditor = Auditor::default();
    let min_urls = Thresholds::default().n_plus_one_min_urls;
    runner
        .run(&arb::api_calls(50), |calls| {
            let s = auditor.score_capture(&capture("s", "p", 1, calls.clone()), arb::SITE);
            prop_assert_eq!(
                s.dimension(Dimension::D1).raw_metric,
                oracle::redundant_excess(&calls) as f64
            );
            prop_assert_eq!(
                s.dimension(Dimension::D2).raw_metric,
                oracle::n_plus_one_patterns(&calls, min_urls) as f64
            );
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("200 random captures, D1 and D2 agree with brute force".into())
}

fn score(entries: Vec<HarEntry>) -> CaptureScore {
    Auditor::default().score_capture(&capture("s", "p", 1, entries), arb::SITE)
}

fn properties() -> Outcome {
    let run = |cases: u32| {
        TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let range = |x: f64| (0.0..=100.0).contains(&x);
    let mut total = 0;

    run(400)
        .run(
            &(arb::entries(50), prop::num::f64::ANY),
            |(entries, raw)| {
                let s = score(entries);
                for d in Dimension::ALL {
                    prop_assert!(range(s.dimension(d).score));
                    prop_assert!(range(Thresholds::default().score(d, raw)));
                }
                prop_assert!(range(s.composite));
                Ok(())
            },
        )
        .map_err(|e| format!("clamping: {e}"))?;
    total += 400;

    run(150)
        .run(&(0usize..30), |n| {
            let calls = (0..n)
                .map(|i| {
                    let w = format!("{i:b}").replace('0', "a").replace('1', "b");
                    har_audit::synth::EntryBuilder::get(&format!("https://api.shop.co.uk/api/{w}"))
                        .json()
                        .build()
                })
                .collect();
            let s = score(calls);
            for d in Dimension::ALL {
                prop_assert_eq!(s.dimension(d).score, 100.0);
            }
            Ok(())
        })
        .map_err(|e| format!("zero instances: {e}"))?;
    total += 150;

    run(150)
        .run(
            &(arb::api_calls(30), any::<prop::sample::Index>()),
            |(calls, pick)| {
                if calls.is_empty() {
                    return Ok(());
                }
                let before = score(calls.clone()).dimension(Dimension::D1).clone();
                let mut more = calls.clone();
                more.push(calls[pick.index(calls.len())].clone());
                let after = score(more).dimension(Dimension::D1).clone();
                prop_assert_eq!(after.raw_metric, before.raw_metric + 1.0);
                prop_assert!(after.score <= before.score);
                Ok(())
            },
        )
        .map_err(|e| format!("D1 monotonicity: {e}"))?;
    total += 150;

    run(150)
        .run(&arb::entries(40), |entries| {
            let once = score(entries.clone());
            let mut doubled = entries.clone();
            doubled.extend(entries);
            let twice = score(doubled);
            for d in [Dimension::D4, Dimension::D7, Dimension::D8] {
                prop_assert!(
                    (once.dimension(d).raw_metric - twice.dimension(d).raw_metric).abs() < 1e-9
                );
            }
            Ok(())
        })
        .map_err(|e| format!("duplication invariance: {e}"))?;
    total += 150;

    run(200)
        .run(
            &(
                prop::array::uniform8(0.01f64..10.0),
                0.001f64..1000.0,
                prop::array::uniform8(0.0f64..=100.0),
            ),
            |(raw, scale, scores)| {
                let a = composite_of(&scores, &WeightVector::normalized(raw).unwrap());
                let b = composite_of(
                    &scores,
                    &WeightVector::normalized(raw.map(|x| x * scale)).unwrap(),
                );
                prop_assert!((a - b).abs() < 1e-9);
                Ok(())
            },
        )
        .map_err(|e| format!("weight renormalization: {e}"))?;
    total += 200;

    Ok(format!(
        "{total} randomized cases over 5 properties, 0 violations"
    ))
}

fn table_statistics() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    analyze(&BatchConfig {
        har_dir: fixtures().join("table"),
        manifest: fixtures().join("table_sites.json"),
        out_dir: dir.path().to_path_buf(),
        ..BatchConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let text = fs::read_to_string(dir.path().join("results/summary_stats.csv")).unwrap();
    let row = text
        .lines()
        .find(|l| l.starts_with("quality_score,"))
        .ok_or("no quality_score row")?;
    let v: Vec<f64> = row.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
    for (name, got, want) in [
        ("mean", v[0], 76.9),
        ("median", v[1], 74.8),
        ("sd", v[2], 15.4),
    ] {
        ensure((got - want).abs() <= 0.1, || {
            format!("{name} {got} vs {want}")
        })?;
    }
    Ok(format!(
        "mean {}, median {}, sd {} over 18 sites",
        v[0], v[1], v[2]
    ))
}

fn validator_faults() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    analyze_corpus(dir.path(), false);
    let checks = validate(&dir.path().join("har"), &dir.path().join("out"));
    let passes = checks
        .iter()
        .filter(|c| c.status == har_audit::validate::CheckStatus::Pass)
        .count();
    ensure(passes == 8, || format!("clean batch: {passes} of 8 pass"))?;
    for check in [1u8, 3, 5, 7] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        analyze_corpus(dir.path(), false);
        let (har, out) = (dir.path().join("har"), dir.path().join("out"));
        inject(check, &har, &out);
        let failed = failing(&validate(&har, &out));
        ensure(failed == [check], || {
            format!("fault {check} failed checks {failed:?}")
        })?;
    }
    Ok("clean batch 8/8 pass; faults for checks 1, 3, 5, 7 each fail only that check".into())
}

fn anonymization() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    analyze_corpus(dir.path(), true);
    let manifest = Manifest::from_file(&fixtures().join("corpus_sites.json")).unwrap();
    let needles = manifest.hostnames();
    let files = files_under(&dir.path().join("out"));
    let mut bytes_scanned = 0;
    for path in &files {
        let bytes = fs::read(path).unwrap().to_ascii_lowercase();
        bytes_scanned += bytes.len();
        for n in &needles {
            ensure(!bytes.windows(n.len()).any(|w| w == n.as_bytes()), || {
                format!("{} contains {n}", path.display())
            })?;
        }
    }
    Ok(format!(
        "{} files, {bytes_scanned} bytes, {} hostnames, 0 occurrences",
        files.len(),
        needles.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "composite formula reproduction",
            Duration::from_secs(1),
            composite_formula,
        ),
        (
            "golden-fixture corpus",
            Duration::from_secs(5),
            golden_corpus,
        ),
        (
            "zero-anti-pattern fixture",
            Duration::from_secs(1),
            zero_anti_pattern,
        ),
        (
            "oracle equivalence",
            Duration::from_secs(30),
            oracle_equivalence,
        ),
        ("property suite", Duration::from_secs(60), properties),
        (
            "table-shaped statistics",
            Duration::from_secs(5),
            table_statistics,
        ),
        (
            "validator fault injection",
            Duration::from_secs(10),
            validator_faults,
        ),
        (
            "anonymization soundness",
            Duration::from_secs(5),
            anonymization,
        ),
    ];
    let mut failures = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            r => r,
        };
        match result {
            Ok(msg) => println!("PASS  {name}: {msg} ({elapsed:.2?})"),
            Err(msg) => {
                failures += 1;
                println!("FAIL  {name}: {msg} ({elapsed:.2?})");
            }
        }
    }
    println!("acceptance: {} of 8 criteria pass", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
