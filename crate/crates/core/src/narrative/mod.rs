//! Narrative to events.
//!
//! The rule-based pipeline splits a narrative into clauses, keeps clauses
//! that mention a designation keyword, and reads times, titles and concerns
//! from the clause text alone. It never invents words: titles are built from
//! the clause itself. A remote parser with the same output contract can be
//! used instead, with the rule-based pipeline as fallback.

mod lexicon;
mod remote;

use chrono::NaiveDate;
use serde::Serialize;

pub use lexicon::{
    words, ConcernEntry, ConcernLexicon, DesignationLexicon, Hit, Term, TermLexicon, TermLexiconError, Word,
    BUNDLED_CONCERNS, BUNDLED_DESIGNATIONS,
};
pub use remote::{
    is_grounded, remote_parse, HttpRemoteParser, RemoteError, RemoteOutcome, RemoteParser, RemoteRequest,
    KEY_VAR, PARSER_PROMPT, PROMPT_VERSION, PROMPT_VERSION_HEADER, URL_VAR,
};

use crate::model::{Designation, Event, SpecificConcern, TimeValue};
use crate::temporal::{parse_time_expression, RangeRole, Span, TemporalMention};

const TITLE_WORDS: usize = 8;

const ABBREVIATIONS: &[&str] = &["dr", "mr", "mrs", "ms", "st", "e.g", "i.e", "vs", "approx", "etc"];

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "of", "to", "in", "on", "at", "for", "with", "by", "from", "as",
    "so", "my", "me", "i", "we", "our", "was", "were", "is", "are", "be", "been", "had", "have", "has", "it",
    "its", "that", "this", "then", "when", "up", "into", "out", "after", "before", "since", "until", "about",
    "very", "really", "just", "also", "i'm", "i've", "i'd",
];

const PRONOUNS: &[&str] = &["i", "we", "i've", "i'd", "i'm", "i'll", "we've", "we'd", "we're"];

const AUXILIARIES: &[&str] = &[
    "was",
    "were",
    "had",
    "have",
    "has",
    "am",
    "got",
    "get",
    "been",
    "did",
    "do",
    "also",
    "then",
    "finally",
    "eventually",
    "just",
    "first",
    "later",
    "again",
];

const LEAD_FILLERS: &[&str] = &[
    "when",
    "in",
    "on",
    "at",
    "since",
    "from",
    "around",
    "about",
    "by",
    "during",
    "after",
    "before",
    "until",
    "till",
    "and",
    "but",
    "then",
    "so",
    "also",
    "later",
    "eventually",
    "finally",
    "of",
    "to",
    "through",
    "between",
    "ago",
    "as",
    "was",
    "were",
    "got",
    "been",
    "a",
    "an",
    "the",
    "just",
    "again",
    "first",
];

const CONJUNCTIONS: &[&str] = &["and", "but", "then", "so"];

pub(crate) fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(&word)
}

/// Who the narrative is about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Profile {
    pub name: String,
    pub date_of_birth: Option<NaiveDate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParserMode {
    RuleBased,
    Remote,
    RemoteWithFallback,
}

impl std::str::FromStr for ParserMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rule-based" | "rule" => Ok(ParserMode::RuleBased),
            "remote" => Ok(ParserMode::Remote),
            "remote-with-fallback" | "fallback" => Ok(ParserMode::RemoteWithFallback),
            _ => Err(format!("unknown parser mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParserConfig {
    pub designations: DesignationLexicon,
    pub concerns: ConcernLexicon,
    pub mode: ParserMode,
    /// "Now" for relative expressions such as "two years ago".
    pub reference_date: NaiveDate,
}

impl ParserConfig {
    pub fn new(reference_date: NaiveDate) -> Self {
        Self {
            designations: DesignationLexicon::bundled().clone(),
            concerns: ConcernLexicon::bundled().clone(),
            mode: ParserMode::RuleBased,
            reference_date,
        }
    }

    pub fn with_mode(mut self, mode: ParserMode) -> Self {
        self.mode = mode;
        self
    }
}

/// A sentence-level piece of the narrative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub text: String,
    /// Character offsets into the narrative.
    pub span: Span,
}

fn is_abbreviation(chars: &[char], dot: usize) -> bool {
    let mut start = dot;
    while start > 0 && (chars[start - 1].is_alphanumeric() || chars[start - 1] == '.') {
        start -= 1;
    }
    let word: String = chars[start..dot].iter().collect::<String>().to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Splits at `.`, `!` or `?` followed by whitespace or the end of text, and
/// at line breaks. Clause spans are trimmed and together cover every
/// non-whitespace character.
pub fn segment_narrative(text: &str) -> Vec<Clause> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut push = |from: usize, to: usize| {
        let mut a = from;
        let mut b = to;
        while a < b && chars[a].is_whitespace() {
            a += 1;
        }
        while b > a && chars[b - 1].is_whitespace() {
            b -= 1;
        }
        if a < b {
            out.push(Clause {
                text: chars[a..b].iter().collect(),
                span: Span { start: a, end: b },
            });
        }
    };
    for i in 0..chars.len() {
        let c = chars[i];
        if c == '\n' {
            push(start, i);
            start = i + 1;
        } else if matches!(c, '.' | '!' | '?')
            && chars.get(i + 1).is_none_or(|n| n.is_whitespace())
            && !(c == '.' && is_abbreviation(&chars, i))
        {
            push(start, i + 1);
            start = i + 1;
        }
    }
    push(start, chars.len());
    out
}

/// Highest-priority designation mentioned in `clause`, by the bundled lexicon.
pub fn classify_designation(clause: &str) -> Option<Designation> {
    classify_with(DesignationLexicon::bundled(), &words(clause))
}

fn classify_with(lexicon: &DesignationLexicon, words: &[Word]) -> Option<Designation> {
    lexicon
        .hits(words)
        .into_iter()
        .map(|h| *h.value)
        .min_by_key(|d| d.priority())
}

/// Start and end from the mentions of one clause.
fn times_from(mentions: &[TemporalMention]) -> (TimeValue, TimeValue) {
    if let Some(i) = mentions.iter().position(|m| m.role == RangeRole::RangeStart) {
        let end = mentions[i + 1..]
            .iter()
            .find(|m| m.role == RangeRole::RangeEnd)
            .map_or(TimeValue::Unspecified, |m| m.value);
        return (mentions[i].value, end);
    }
    let ongoing = mentions.iter().any(|m| m.value == TimeValue::Current);
    let first = mentions
        .iter()
        .find(|m| m.value != TimeValue::Current)
        .map(|m| m.value);
    match (first, ongoing) {
        (Some(v), true) => (v, TimeValue::Current),
        (Some(v), false) => (v, TimeValue::Unspecified),
        (None, true) => (TimeValue::Current, TimeValue::Unspecified),
        (None, false) => (TimeValue::Unspecified, TimeValue::Unspecified),
    }
}

fn strip_lead(tokens: &mut Vec<&str>) {
    loop {
        let Some(first) = tokens.first().map(|t| t.to_lowercase()) else {
            return;
        };
        if LEAD_FILLERS.contains(&first.as_str()) {
            tokens.remove(0);
        } else if PRONOUNS.contains(&first.as_str()) {
            tokens.remove(0);
            while tokens
                .first()
                .is_some_and(|t| AUXILIARIES.contains(&t.to_lowercase().as_str()))
            {
                tokens.remove(0);
            }
        } else {
            return;
        }
    }
}

fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .collect()
}

fn head(tokens: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut content = 0;
    for t in tokens {
        let lower = t.to_lowercase();
        if content == TITLE_WORDS || (content > 0 && CONJUNCTIONS.contains(&lower.as_str())) {
            break;
        }
        if !is_stopword(&lower) {
            content += 1;
        }
        out.push((*t).to_owned());
    }
    while out.last().is_some_and(|t| {
        let l = t.to_lowercase();
        is_stopword(&l) || LEAD_FILLERS.contains(&l.as_str())
    }) {
        out.pop();
    }
    out
}

/// Up to eight content words of the clause, without its time expressions
/// and without a leading "I was" or similar. Stops at a conjunction.
fn title_for(text: &str, mentions: &[TemporalMention]) -> String {
    let masked: String = text
        .chars()
        .enumerate()
        .map(|(i, c)| {
            if mentions.iter().any(|m| m.span.start <= i && i < m.span.end) {
                ' '
            } else {
                c
            }
        })
        .collect();
    let mut t = tokens(&masked);
    strip_lead(&mut t);
    let mut words = head(&t);
    if words.is_empty() {
        words = head(&tokens(text));
    }
    let title = words.join(" ");
    let mut chars = title.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => title,
    }
}

/// Character range of a clause part, relative to the clause.
#[derive(Debug, Clone, Copy)]
struct Part {
    start: usize,
    end: usize,
}

/// Splits a clause with hits of two or more designations at coordinating
/// conjunctions. Parts without a hit are merged into a neighbour.
fn split_parts(
    clause: &str,
    words: &[Word],
    mentions: &[TemporalMention],
    config: &ParserConfig,
) -> Vec<Part> {
    let len = clause.chars().count();
    let whole = vec![Part { start: 0, end: len }];
    let hits = config.designations.hits(words);
    let distinct: std::collections::BTreeSet<Designation> = hits.iter().map(|h| *h.value).collect();
    if distinct.len() < 2 {
        return whole;
    }

    let inside_range = |at: usize| {
        mentions.windows(2).any(|w| {
            w[0].role == RangeRole::RangeStart
                && w[1].role == RangeRole::RangeEnd
                && w[0].span.end <= at
                && at < w[1].span.start
        }) || mentions.iter().any(|m| m.span.start <= at && at < m.span.end)
    };
    let cuts: Vec<&Word> = words
        .iter()
        .skip(1)
        .filter(|w| CONJUNCTIONS.contains(&w.lower.as_str()) && !inside_range(w.start))
        .collect();
    if cuts.is_empty() {
        return whole;
    }

    let mut parts = Vec::new();
    let mut from = 0;
    for w in &cuts {
        parts.push(Part {
            start: from,
            end: w.start,
        });
        from = w.end;
    }
    parts.push(Part {
        start: from,
        end: len,
    });

    let has_hit = |p: &Part| {
        hits.iter().any(|h| {
            let w = &words[h.first_word];
            p.start <= w.start && w.end <= p.end
        })
    };
    let mut merged: Vec<Part> = Vec::new();
    let mut pending: Option<usize> = None;
    for p in parts {
        if has_hit(&p) {
            let start = pending.take().unwrap_or(p.start);
            merged.push(Part { start, end: p.end });
        } else if let Some(last) = merged.last_mut() {
            last.end = p.end;
        } else {
            pending.get_or_insert(p.start);
        }
    }
    if merged.len() < 2 {
        whole
    } else {
        merged
    }
}

fn substring(chars: &[char], part: Part) -> String {
    let s: String = chars[part.start..part.end].iter().collect();
    s.trim().trim_end_matches([',', ';', ':']).trim().to_owned()
}

/// Rule-based extraction: one event per designation-bearing clause part.
pub fn extract_events(text: &str, profile: &Profile, config: &ParserConfig) -> Vec<Event> {
    let mut events = Vec::new();
    for clause in segment_narrative(text) {
        let clause_words = words(&clause.text);
        if classify_with(&config.designations, &clause_words).is_none() {
            continue;
        }
        let mentions = parse_time_expression(&clause.text, profile.date_of_birth, config.reference_date);
        let chars: Vec<char> = clause.text.chars().collect();
        let parts = split_parts(&clause.text, &clause_words, &mentions, config);

        let per_part: Vec<Vec<TemporalMention>> = parts
            .iter()
            .map(|p| {
                mentions
                    .iter()
                    .filter(|m| p.start <= m.span.start && m.span.end <= p.end)
                    .map(|m| TemporalMention {
                        span: Span {
                            start: m.span.start - p.start,
                            end: m.span.end - p.start,
                        },
                        ..m.clone()
                    })
                    .collect()
            })
            .collect();

        for (k, part) in parts.iter().enumerate() {
            let part_text: String = chars[part.start..part.end].iter().collect();
            let part_words = words(&part_text);
            let Some(designation) = classify_with(&config.designations, &part_words) else {
                continue;
            };
            let own = &per_part[k];
            let times = if !own.is_empty() {
                times_from(own)
            } else {
                let borrowed = per_part[..k]
                    .iter()
                    .rev()
                    .chain(per_part[k + 1..].iter())
                    .find(|m| !m.is_empty());
                borrowed.map_or((TimeValue::Unspecified, TimeValue::Unspecified), |m| {
                    times_from(m)
                })
            };

            let (specific, broad) = if designation == Designation::LifeEvent {
                (SpecificConcern::LifeConcern, None)
            } else {
                let hit = config
                    .concerns
                    .hits(&part_words)
                    .into_iter()
                    .next()
                    .or_else(|| config.concerns.hits(&clause_words).into_iter().next());
                match hit {
                    Some(h) => (
                        SpecificConcern::Named(h.value.specific.clone()),
                        h.value.broad.clone(),
                    ),
                    None => (SpecificConcern::Other, None),
                }
            };

            let n = events.len();
            events.push(Event {
                id: format!("e{}", n + 1),
                title: title_for(&part_text, own),
                notes: substring(&chars, *part),
                designation,
                specific_concern: specific,
                broad_concern: broad,
                start: times.0,
                end: times.1,
                narrative_index: u32::try_from(n).unwrap_or(u32::MAX),
            });
        }
    }
    events
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParserSource {
    RuleBased,
    Remote,
}

/// How a narrative was parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParseReport {
    pub source: ParserSource,
    /// Why the remote parser was skipped, when it was.
    pub fallback_reason: Option<String>,
    pub dropped: Vec<crate::model::Violation>,
    pub not_grounded: Vec<String>,
}

/// Parses with the configured mode. In `RemoteWithFallback` an unavailable
/// remote parser falls back to the rule-based pipeline; protocol errors are
/// returned.
pub fn parse_narrative(
    text: &str,
    profile: &Profile,
    config: &ParserConfig,
    remote: Option<&dyn RemoteParser>,
) -> Result<(Vec<Event>, ParseReport), RemoteError> {
    let rule_based = |reason: Option<String>| {
        (
            extract_events(text, profile, config),
            ParseReport {
                source: ParserSource::RuleBased,
                fallback_reason: reason,
                dropped: Vec::new(),
                not_grounded: Vec::new(),
            },
        )
    };
    let attempt = match (config.mode, remote) {
        (ParserMode::RuleBased, _) => return Ok(rule_based(None)),
        (_, None) => Err(RemoteError::Unavailable("no remote parser configured".into())),
        (_, Some(client)) => remote_parse(text, profile, client),
    };
    match (attempt, config.mode) {
        (Ok(outcome), _) => Ok((
            outcome.events,
            ParseReport {
                source: ParserSource::Remote,
                fallback_reason: None,
                dropped: outcome.dropped,
                not_grounded: outcome.not_grounded,
            },
        )),
        (Err(RemoteError::Unavailable(reason)), ParserMode::RemoteWithFallback) => {
            Ok(rule_based(Some(reason)))
        }
        (Err(e), _) => Err(e),
    }
}
