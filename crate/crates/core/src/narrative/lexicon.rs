use std::sync::OnceLock;

use thiserror::Error;

use crate::model::Designation;

pub const BUNDLED_DESIGNATIONS: &str = include_str!("../../resources/designation_lexicon.tsv");
pub const BUNDLED_CONCERNS: &str = include_str!("../../resources/concern_lexicon.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lexicon line {line}: {message}")]
pub struct TermLexiconError {
    pub line: usize,
    pub message: String,
}

/// A lowercase word sequence; the last word may be a prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub words: Vec<String>,
    pub prefix: bool,
}

impl Term {
    pub fn parse(text: &str) -> Option<Self> {
        let (body, prefix) = match text.strip_suffix('*') {
            Some(b) => (b, true),
            None => (text, false),
        };
        let words: Vec<String> = body.split_whitespace().map(str::to_owned).collect();
        (!words.is_empty() && words.iter().all(|w| *w == w.to_lowercase())).then_some(Term { words, prefix })
    }

    /// Number of words matched at `at`, if the term matches there.
    fn match_at(&self, words: &[Word], at: usize) -> Option<usize> {
        let n = self.words.len();
        let slice = words.get(at..at + n)?;
        let last = n - 1;
        slice
            .iter()
            .zip(&self.words)
            .enumerate()
            .all(|(i, (w, t))| {
                if i == last && self.prefix {
                    w.lower.starts_with(t.as_str())
                } else {
                    w.lower == *t
                }
            })
            .then_some(n)
    }
}

/// A word of a clause with its character offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub lower: String,
    pub start: usize,
    pub end: usize,
}

/// Splits text into words of letters, digits, apostrophes and inner hyphens.
pub fn words(text: &str) -> Vec<Word> {
    let mut out = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let inner = (c == '\'' || c == '\u{2019}' || c == '-')
            && current.is_some()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || inner {
            let c = if c == '\u{2019}' { '\'' } else { c };
            current
                .get_or_insert_with(|| (i, String::new()))
                .1
                .extend(c.to_lowercase());
        } else if let Some((start, lower)) = current.take() {
            out.push(Word { lower, start, end: i });
        }
    }
    if let Some((start, lower)) = current {
        out.push(Word {
            lower,
            start,
            end: chars.len(),
        });
    }
    out
}

/// Terms mapped to values, matched over a word sequence.
#[derive(Debug, Clone)]
pub struct TermLexicon<T> {
    entries: Vec<(Term, T)>,
}

/// One lexicon hit: word range and the matched value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hit<'a, T> {
    pub first_word: usize,
    pub word_count: usize,
    pub value: &'a T,
}

impl<T> TermLexicon<T> {
    fn parse_with(
        text: &str,
        columns: usize,
        mut value: impl FnMut(&[&str]) -> Result<T, String>,
    ) -> Result<Self, TermLexiconError> {
        let mut entries: Vec<(Term, T)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| TermLexiconError {
                line: line_no,
                message,
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 || cols.len() > columns {
                return Err(err(format!("expected 2 to {columns} tab-separated columns")));
            }
            let term = Term::parse(cols[0]).ok_or_else(|| err(format!("bad term {:?}", cols[0])))?;
            if entries.iter().any(|(t, _)| *t == term) {
                return Err(err(format!("duplicate term {:?}", cols[0])));
            }
            entries.push((term, value(&cols[1..]).map_err(err)?));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All hits, ordered by position then by decreasing length.
    pub fn hits<'a>(&'a self, words: &[Word]) -> Vec<Hit<'a, T>> {
        let mut out = Vec::new();
        for at in 0..words.len() {
            let mut here: Vec<Hit<'a, T>> = self
                .entries
                .iter()
                .filter_map(|(term, value)| {
                    term.match_at(words, at).map(|n| Hit {
                        first_word: at,
                        word_count: n,
                        value,
                    })
                })
                .collect();
            here.sort_by_key(|h| std::cmp::Reverse(h.word_count));
            out.extend(here);
        }
        out
    }
}

pub type DesignationLexicon = TermLexicon<Designation>;

/// Specific concern and optional broad concern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcernEntry {
    pub specific: String,
    pub broad: Option<String>,
}

pub type ConcernLexicon = TermLexicon<ConcernEntry>;

impl TermLexicon<Designation> {
    pub fn parse(text: &str) -> Result<Self, TermLexiconError> {
        Self::parse_with(text, 2, |cols| {
            Designation::from_name(cols[0]).ok_or_else(|| format!("unknown designation {:?}", cols[0]))
        })
    }

    pub fn bundled() -> &'static Self {
        static CELL: OnceLock<DesignationLexicon> = OnceLock::new();
        CELL.get_or_init(|| Self::parse(BUNDLED_DESIGNATIONS).expect("bundled designation lexicon parses"))
    }
}

impl TermLexicon<ConcernEntry> {
    pub fn parse(text: &str) -> Result<Self, TermLexiconError> {
        Self::parse_with(text, 3, |cols| {
            let specific = cols[0].trim();
            if specific.is_empty() {
                return Err("empty specific concern".into());
            }
            let broad = cols.get(1).map(|b| b.trim()).filter(|b| !b.is_empty());
            Ok(ConcernEntry {
                specific: specific.to_owned(),
                broad: broad.map(str::to_owned),
            })
        })
    }

    pub fn bundled() -> &'static Self {
        static CELL: OnceLock<ConcernLexicon> = OnceLock::new();
        CELL.get_or_init(|| Self::parse(BUNDLED_CONCERNS).expect("bundled concern lexicon parses"))
    }
}
