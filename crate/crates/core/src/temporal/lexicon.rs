//! Loader for the tab-separated temporal rule lexicon.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

/// The lexicon compiled into the crate.
pub const BUNDLED_LEXICON: &str = include_str!("../../resources/temporal_lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extractor {
    FullDate,
    MonthYear,
    Year,
    Age,
    YearsAgo,
    MonthsAgo,
    LastYear,
    ThisYear,
    Current,
    Early,
}

impl Extractor {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "full-date" => Extractor::FullDate,
            "month-year" => Extractor::MonthYear,
            "year" => Extractor::Year,
            "age" => Extractor::Age,
            "years-ago" => Extractor::YearsAgo,
            "months-ago" => Extractor::MonthsAgo,
            "last-year" => Extractor::LastYear,
            "this-year" => Extractor::ThisYear,
            "current" => Extractor::Current,
            "early" => Extractor::Early,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixKind {
    RangeOpen,
    RangeBetween,
    Since,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectorKind {
    Range,
    RangeBetween,
}

#[derive(Debug, Clone)]
pub struct AtomRule {
    pub regex: Regex,
    pub extractor: Extractor,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub version: String,
    pub atoms: Vec<AtomRule>,
    pub prefixes: Vec<(String, PrefixKind)>,
    pub connectors: Vec<(String, ConnectorKind)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lexicon line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

impl Lexicon {
    pub fn bundled() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::parse(BUNDLED_LEXICON).expect("bundled lexicon is valid"))
    }

    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut version = None;
        let mut macros: HashMap<String, String> = HashMap::new();
        let mut atoms = Vec::new();
        let mut prefixes = Vec::new();
        let mut connectors = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| LexiconError { line, message };
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            let [kind, pattern, variant] = cols[..] else {
                return Err(err(format!(
                    "expected 3 tab-separated columns, found {}",
                    cols.len()
                )));
            };
            match kind {
                "meta" => {
                    if let Some(v) = pattern.strip_prefix("version=") {
                        version = Some(v.to_string());
                    }
                }
                "define" => {
                    let expanded = expand(pattern, &macros).map_err(err)?;
                    macros.insert(variant.to_string(), expanded);
                }
                "regex" | "phrase" => {
                    let extractor = Extractor::parse(variant)
                        .ok_or_else(|| err(format!("unknown variant `{variant}`")))?;
                    let source = if kind == "regex" {
                        expand(pattern, &macros).map_err(err)?
                    } else {
                        phrase_regex(pattern)
                    };
                    let regex =
                        Regex::new(&format!("(?i){source}")).map_err(|e| err(format!("bad pattern: {e}")))?;
                    atoms.push(AtomRule { regex, extractor });
                }
                "prefix" => {
                    let kind = match variant {
                        "range-open" => PrefixKind::RangeOpen,
                        "range-between" => PrefixKind::RangeBetween,
                        "since" => PrefixKind::Since,
                        _ => return Err(err(format!("unknown prefix variant `{variant}`"))),
                    };
                    prefixes.push((pattern.to_lowercase(), kind));
                }
                "connector" => {
                    let kind = match variant {
                        "range" => ConnectorKind::Range,
                        "range-between" => ConnectorKind::RangeBetween,
                        _ => return Err(err(format!("unknown connector variant `{variant}`"))),
                    };
                    connectors.push((pattern.to_lowercase(), kind));
                }
                other => return Err(err(format!("unknown pattern kind `{other}`"))),
            }
        }

        Ok(Lexicon {
            version: version.ok_or(LexiconError {
                line: 0,
                message: "missing `meta version=` line".into(),
            })?,
            atoms,
            prefixes,
            connectors,
        })
    }
}

fn phrase_regex(phrase: &str) -> String {
    let words: Vec<String> = phrase.split_whitespace().map(regex::escape).collect();
    format!(r"\b{}\b", words.join(r"\s+"))
}

fn expand(pattern: &str, macros: &HashMap<String, String>) -> Result<String, String> {
    let mut out = String::with_capacity(pattern.len());
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let close = after.find('}');
        let name = close.map(|c| &after[..c]);
        match name.and_then(|n| macros.get(n).map(|v| (n, v))) {
            Some((n, value)) => {
                out.push_str(&rest[..open]);
                out.push_str(value);
                rest = &after[n.len() + 1..];
            }
            None => {
                // Regex repetition like `\d{2}` stays as written.
                if name.is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit() || c == ',')) {
                    let end = open + 1 + close.unwrap() + 1;
                    out.push_str(&rest[..end]);
                    rest = &rest[end..];
                } else {
                    return Err(format!("undefined macro in `{pattern}`"));
                }
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}
