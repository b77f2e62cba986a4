//! Token hygiene shared by the knowledge importer and the text ingester:
//! a fixed stop-word list and the mapping from surface tokens to ASP
//! constants.

use std::collections::BTreeSet;
use std::sync::OnceLock;

const STOPWORDS_RAW: &str = include_str!("../assets/stopwords.txt");

fn stopwords() -> &'static BTreeSet<&'static str> {
    static SET: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_RAW
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

/// Lowercase a surface token and force it into the constant alphabet
/// `[a-z][a-z0-9_]*`: runs of other characters collapse to `_`, and a
/// leading non-letter gets an `x` prefix. Multi-word lemmas such as
/// `break down` become `break_down`.
pub fn sanitize_constant(token: &str) -> String {
    let mut out = String::new();
    let mut last_sep = false;
    for c in token.trim().to_lowercase().chars() {
        if c.is_ascii_lowercase() || c.is_ascii_digit() {
            out.push(c);
            last_sep = false;
        } else if !last_sep && !out.is_empty() {
            out.push('_');
            last_sep = true;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    if out.is_empty() {
        return "x".to_string();
    }
    if !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        out.insert(0, 'x');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitizes_tokens() {
        assert_eq!(sanitize_constant("Tweety"), "tweety");
        assert_eq!(sanitize_constant("break down"), "break_down");
        assert_eq!(sanitize_constant("tree#plant"), "tree_plant");
        assert_eq!(sanitize_constant("3rd"), "x3rd");
        assert_eq!(sanitize_constant("--"), "x");
    }

    #[test]
    fn stopwords_are_filtered() {
        assert!(is_stopword("the"));
        assert!(is_stopword("of"));
        assert!(!is_stopword("engine"));
    }
}
