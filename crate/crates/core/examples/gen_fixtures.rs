//! Regenerates the committed fixture corpora under `tests/fixtures/`.
//!
//! ```text
//! cargo run -p har-audit-core --example gen_fixtures
//! ```
//!
//! `golden/` holds one capture per seeded anti-pattern. `table/` holds one
//! capture per site with composites set to a published score column.
//! `corpus/` is a six-site, six-capture batch for end-to-end runs.

use std::fs;
use std::path::{Path, PathBuf};

use har_audit::har::HarEntry;
use har_audit::synth::{har_json, EntryBuilder};
use serde_json::json;

fn doc(host: &str) -> HarEntry {
    EntryBuilder::get(&format!("https://{host}/"))
        .response_header("Content-Type", "text/html; charset=utf-8")
        .response_header("Cache-Control", "no-cache")
        .response_header("Content-Encoding", "gzip")
        .body_size(4200)
        .build()
}

fn asset(host: &str, path: &str, mime: &str, size: i64) -> HarEntry {
    EntryBuilder::get(&format!("https://{host}{path}"))
        .response_header("Content-Type", mime)
        .response_header("Cache-Control", "max-age=31536000")
        .body_size(size)
        .build()
}

fn api(host: &str, path: &str) -> EntryBuilder {
    EntryBuilder::get(&format!("https://{host}{path}"))
        .request_header("Accept", "application/json")
        .json()
}

/// JSON response with gzip but no cache validators.
fn api_uncached(host: &str, path: &str) -> EntryBuilder {
    EntryBuilder::get(&format!("https://{host}{path}"))
        .request_header("Accept", "application/json")
        .response_header("Content-Type", "application/json")
        .response_header("Content-Encoding", "gzip")
        .body_size(512)
}

/// JSON response with cache headers but no compression.
fn api_plain(host: &str, path: &str, size: i64) -> EntryBuilder {
    EntryBuilder::get(&format!("https://{host}{path}"))
        .request_header("Accept", "application/json")
        .response_header("Content-Type", "application/json")
        .response_header("Cache-Control", "max-age=60")
        .body_size(size)
}

const THIRD_PARTY: [&str; 7] = [
    "www.google-analytics.com",
    "www.googletagmanager.com",
    "securepubads.g.doubleclick.net",
    "connect.facebook.net",
    "cdn.jsdelivr.net",
    "static.hotjar.com",
    "cdnjs.cloudflare.com",
];

fn third_party(i: usize) -> HarEntry {
    let host = THIRD_PARTY[i % THIRD_PARTY.len()];
    asset(host, &format!("/js/t{i}.js"), "application/javascript", 900)
}

const GOLDEN_HOST: &str = "www.golden.example";

fn golden() -> Vec<(&'static str, Vec<HarEntry>)> {
    let h = GOLDEN_HOST;
    let with_doc = |mut rest: Vec<HarEntry>| {
        rest.insert(0, doc(h));
        rest
    };
    vec![
        (
            "minimal",
            vec![
                doc(h),
                asset(h, "/style.css", "text/css", 2600),
                asset(h, "/app.js", "application/javascript", 3100),
                asset(h, "/logo.png", "image/png", 1500),
                asset(h, "/hero.jpg", "image/jpeg", 1000),
                asset(h, "/favicon.ico", "image/x-icon", 300),
            ],
        ),
        (
            "redundant",
            with_doc(vec![
                api(h, "/api/cart").build(),
                api(h, "/api/cart").build(),
                api(h, "/api/cart").build(),
                api(h, "/api/user").build(),
            ]),
        ),
        (
            "n_plus_one",
            with_doc(
                (1..=4)
                    .map(|i| api(h, &format!("/api/items/{i}")).build())
                    .collect(),
            ),
        ),
        (
            "n_plus_one_two_patterns",
            with_doc(
                (1..=3)
                    .map(|i| api(h, &format!("/api/items/{i}")).build())
                    .chain((7..=9).map(|i| api(h, &format!("/api/users/{i}/orders")).build()))
                    .chain((1..=2).map(|i| api(h, &format!("/api/tags/{i}")).build()))
                    .collect(),
            ),
        ),
        (
            "waterfall",
            with_doc(vec![
                api(h, "/api/session").timing(0.0, 200.0).build(),
                api(h, "/api/profile").timing(200.0, 300.0).build(),
                api(h, "/api/feed").timing(500.0, 100.0).build(),
            ]),
        ),
        (
            "waterfall_floor",
            with_doc(vec![
                api(h, "/api/bootstrap").timing(0.0, 6000.0).build(),
                api(h, "/api/config").timing(6000.0, 10.0).build(),
            ]),
        ),
        (
            "missing_cache",
            with_doc(
                (0..94)
                    .map(|i| {
                        let path = format!("/api/records?page={i}");
                        if i < 77 {
                            api_uncached(h, &path).build()
                        } else {
                            api(h, &path).build()
                        }
                    })
                    .collect(),
            ),
        ),
        (
            "oversized",
            with_doc(vec![
                api(h, "/api/catalog?part=a").body_size(150_000).build(),
                api(h, "/api/catalog?part=b").body_size(150_000).build(),
                api(h, "/api/catalog?part=c").body_size(100_000).build(),
            ]),
        ),
        (
            "uncompressed",
            with_doc(vec![
                api_plain(h, "/api/listing", 50_000).build(),
                api_plain(h, "/api/menu", 1_000).build(),
            ]),
        ),
        (
            "compression_boundary",
            with_doc(vec![api_plain(h, "/api/menu", 1_001).build()]),
        ),
        ("third_party", with_doc((0..77).map(third_party).collect())),
        (
            "error_rate",
            with_doc(
                (0..10)
                    .map(|i| {
                        let b = api(h, &format!("/api/search?q={i}"));
                        if i == 3 { b.status(500) } else { b }.build()
                    })
                    .collect(),
            ),
        ),
        (
            "error_floor",
            with_doc(
                (0..5)
                    .map(|i| {
                        let b = api(h, &format!("/api/search?q={i}"));
                        if i < 2 { b.status(404) } else { b }.build()
                    })
                    .collect(),
            ),
        ),
        (
            "aborted_request",
            with_doc(
                (0..20)
                    .map(|i| {
                        let b = api(h, &format!("/api/stream?n={i}"));
                        match i {
                            0 => b.status(503),
                            19 => b.status(0),
                            _ => b,
                        }
                        .build()
                    })
                    .collect(),
            ),
        ),
        (
            "combined",
            with_doc(vec![
                api(h, "/api/cart").build(),
                api(h, "/api/cart").build(),
                api(h, "/api/export").body_size(120_000).build(),
                api(h, "/api/news?page=1").status(404).build(),
                asset(
                    "www.google-analytics.com",
                    "/analytics.js",
                    "text/javascript",
                    900,
                ),
            ]),
        ),
    ]
}

/// Entries whose composite under the default weights is `100 - deficit`
/// (to within rounding of integer body sizes). The deficit is spent on
/// redundant calls first, then oversized payloads, a single waterfall and
/// uncompressed bodies.
fn engineered(host: &str, deficit: f64, padding: usize) -> Vec<HarEntry> {
    let mut left = deficit;
    let excess = ((left / 1.5 + 1e-9).floor() as usize).min(10);
    left -= 1.5 * excess as f64;
    let oversized = ((left / 2.25 + 1e-9).floor() as usize).min(6);
    left -= 2.25 * oversized as f64;
    let waterfall_points = left.min(9.9);
    left -= waterfall_points;
    let compression_points = left.max(0.0);

    let mut out = vec![doc(host)];
    out.extend((0..padding).map(|i| asset(host, &format!("/img/p{i}.webp"), "image/webp", 2000)));
    if excess > 0 {
        out.extend((0..=excess).map(|_| api(host, "/api/poll").build()));
    }
    out.extend((0..oversized).map(|i| {
        api(host, &format!("/api/bundle?chunk={i}"))
            .body_size(150_000)
            .build()
    }));
    if compression_points > 0.0 {
        // 0.1 weight, 5 KB per point, 0.7 saved, 1000 bytes per KB.
        let bytes = compression_points / 0.10 * 5.0 * 1000.0 / 0.7;
        let parts = (bytes / 90_000.0).ceil() as usize;
        let each = (bytes / parts as f64).round() as i64;
        out.extend(
            (0..parts).map(|i| api_plain(host, &format!("/api/feed?part={i}"), each).build()),
        );
    }
    if waterfall_points > 0.0 {
        // 0.1 weight, 50 ms per point.
        let ms = (waterfall_points / 0.10 * 50.0 * 1000.0).round() / 1000.0;
        out.push(api(host, "/api/session").timing(0.0, ms).build());
        out.push(api(host, "/api/profile").timing(ms, 10.0).build());
    }
    out
}

/// Quality scores of the published 18-site table.
const TABLE_SITES: [(&str, &str, f64); 18] = [
    ("News-1", "News", 56.8),
    ("Utility-1", "Utility", 59.9),
    ("Commerce-3", "E-commerce", 60.8),
    ("Travel-1", "Travel", 61.1),
    ("Travel-2", "Travel", 61.8),
    ("Entertainment-1", "Entertainment", 63.6),
    ("Commerce-1", "E-commerce", 65.3),
    ("News-2", "News", 69.6),
    ("News-3", "News", 70.9),
    ("DevTool-2", "Dev Tools", 78.7),
    ("Commerce-2", "E-commerce", 81.4),
    ("Reference-2", "Reference", 84.3),
    ("DevTool-1", "Dev Tools", 85.4),
    ("Reference-1", "Reference", 92.2),
    ("DevBlog-1", "Dev Blog", 95.4),
    ("Classifieds-1", "Classifieds", 97.5),
    ("Government-1", "Government", 100.0),
    ("Forum-1", "Forum", 100.0),
];

struct CorpusSite {
    id: &'static str,
    domain: &'static str,
    category: &'static str,
    architecture: &'static str,
    deficit: f64,
    padding: usize,
    trackers: usize,
}

const CORPUS: [CorpusSite; 6] = [
    CorpusSite {
        id: "plainforum",
        domain: "www.plainforum.example",
        category: "Forum",
        architecture: "Server-rendered, no client API",
        deficit: 0.0,
        padding: 4,
        trackers: 0,
    },
    CorpusSite {
        id: "citydocs",
        domain: "www.citydocs.gov.uk",
        category: "Government",
        architecture: "Static site",
        deficit: 2.0,
        padding: 10,
        trackers: 0,
    },
    CorpusSite {
        id: "devnotes",
        domain: "blog.devnotes.example",
        category: "Dev Blog",
        architecture: "Static site with comments widget",
        deficit: 6.5,
        padding: 18,
        trackers: 2,
    },
    CorpusSite {
        id: "shopmart",
        domain: "www.shopmart.co.uk",
        category: "E-commerce",
        architecture: "React SPA over REST",
        deficit: 18.0,
        padding: 30,
        trackers: 8,
    },
    CorpusSite {
        id: "dailyherald",
        domain: "www.dailyherald.com.au",
        category: "News",
        architecture: "Server-rendered with ad stack",
        deficit: 27.0,
        padding: 45,
        trackers: 20,
    },
    CorpusSite {
        id: "tripfinder",
        domain: "app.tripfinder.co.jp",
        category: "Travel",
        architecture: "Next.js SPA",
        deficit: 34.0,
        padding: 60,
        trackers: 30,
    },
];

fn write_har(dir: &Path, site: &str, page: &str, run: u32, entries: &[HarEntry]) {
    let path = dir.join(format!("{site}__{page}__run{run}.har"));
    fs::write(&path, har_json(entries)).expect("write capture");
}

fn reset(dir: &Path) {
    if dir.exists() {
        fs::remove_dir_all(dir).expect("clear fixture directory");
    }
    fs::create_dir_all(dir).expect("create fixture directory");
}

fn write_json(path: &Path, value: &serde_json::Value) {
    let mut text = serde_json::to_string_pretty(value).expect("serialize");
    text.push('\n');
    fs::write(path, text).expect("write json");
}

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");

    let dir = root.join("golden");
    reset(&dir);
    let fixtures = golden();
    for (name, entries) in &fixtures {
        write_har(&dir, "golden", name, 1, entries);
    }
    println!("{} golden captures", fixtures.len());

    let dir = root.join("table");
    reset(&dir);
    let mut manifest = Vec::new();
    for (id, category, qs) in TABLE_SITES {
        let slug = id.to_ascii_lowercase();
        let host = format!("www.{slug}.example");
        let padding = if qs == 100.0 { 5 } else { 12 };
        write_har(
            &dir,
            &slug,
            "home",
            1,
            &engineered(&host, 100.0 - qs, padding),
        );
        manifest.push(json!({
            "id": slug,
            "domain": host,
            "category": category,
            "pseudonym": id,
            "pages": ["home"],
            "completeness_exempt": true,
        }));
    }
    write_json(&root.join("table_sites.json"), &json!(manifest));
    println!("{} table captures", TABLE_SITES.len());

    let dir = root.join("corpus");
    reset(&dir);
    let mut manifest = Vec::new();
    for site in &CORPUS {
        for page in ["home", "search"] {
            for run in 1..=3u32 {
                // Small run-to-run drift in the static part of the page.
                let padding = site.padding + (run as usize - 1) + usize::from(page == "search");
                let mut entries = engineered(site.domain, site.deficit, padding);
                entries.extend((0..site.trackers).map(third_party));
                write_har(&dir, site.id, page, run, &entries);
            }
        }
        manifest.push(json!({
            "id": site.id,
            "domain": site.domain,
            "category": site.category,
            "architecture": site.architecture,
            "pages": ["home", "search"],
        }));
    }
    write_json(&root.join("corpus_sites.json"), &json!(manifest));
    println!("{} corpus sites", CORPUS.len());
}
