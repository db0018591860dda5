//! Public-suffix lookup over the vendored list snapshot.

use std::collections::HashSet;
use std::sync::OnceLock;

const SNAPSHOT: &str = include_str!("../../data/public_suffix_list.dat");

/// Parsed suffix rules: plain, wildcard (`*.x`, stored as `x`) and
/// exception (`!y.x`, stored as `y.x`).
#[derive(Debug, Default)]
pub struct SuffixList {
    rules: HashSet<String>,
    wildcards: HashSet<String>,
    exceptions: HashSet<String>,
}

impl SuffixList {
    /// Parses the `public_suffix_list.dat` text format.
    pub fn parse(text: &str) -> Self {
        let mut list = SuffixList::default();
        for line in text.lines() {
            let rule = line.split_whitespace().next().unwrap_or("");
            if rule.is_empty() || rule.starts_with("//") {
                continue;
            }
            let rule = rule.to_ascii_lowercase();
            if let Some(rest) = rule.strip_prefix('!') {
                list.exceptions.insert(rest.to_string());
            } else if let Some(rest) = rule.strip_prefix("*.") {
                list.wildcards.insert(rest.to_string());
            } else {
                list.rules.insert(rule);
            }
        }
        list
    }

    /// The bundled snapshot.
    pub fn bundled() -> &'static SuffixList {
        static LIST: OnceLock<SuffixList> = OnceLock::new();
        LIST.get_or_init(|| SuffixList::parse(SNAPSHOT))
    }

    pub fn len(&self) -> usize {
        self.rules.len() + self.wildcards.len() + self.exceptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the first label of the public suffix within `labels`.
    /// Unlisted TLDs fall back to the implicit `*` rule.
    pub fn suffix_start(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        for i in 0..n {
            let candidate = labels[i..].join(".");
            if self.exceptions.contains(&candidate) {
                return i + 1;
            }
            if self.rules.contains(&candidate) {
                return i;
            }
            if i + 1 < n && self.wildcards.contains(&labels[i + 1..].join(".")) {
                return i;
            }
        }
        n.saturating_sub(1)
    }

    /// Registrable domain: one label below the public suffix. A name that
    /// is itself a public suffix is returned unchanged.
    pub fn registrable<'a>(&self, host: &'a str) -> &'a str {
        let labels: Vec<&str> = host.split('.').collect();
        let start = self.suffix_start(&labels);
        if start == 0 {
            return host;
        }
        let skip: usize = labels[..start - 1].iter().map(|l| l.len() + 1).sum();
        &host[skip..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_loads() {
        let list = SuffixList::bundled();
        assert!(list.len() > 9000);
        assert!(list.rules.contains("co.uk"));
        assert!(list.wildcards.contains("ck"));
        assert!(list.exceptions.contains("www.ck"));
    }

    #[test]
    fn rule_kinds() {
        let list = SuffixList::parse("// comment\ncom\nuk\nco.uk\n*.ck\n!www.ck\n");
        assert_eq!(list.registrable("a.b.example.com"), "example.com");
        assert_eq!(list.registrable("www.shop.example.co.uk"), "example.co.uk");
        assert_eq!(list.registrable("x.y.foo.ck"), "y.foo.ck");
        assert_eq!(list.registrable("a.www.ck"), "www.ck");
        assert_eq!(list.registrable("host.unlisted"), "host.unlisted");
        assert_eq!(list.registrable("co.uk"), "co.uk");
        assert_eq!(list.registrable("localhost"), "localhost");
    }
}
