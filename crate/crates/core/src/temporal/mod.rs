//! Rule-based extraction of temporal references from narrative text.
//!
//! Matching is driven entirely by the [`Lexicon`]. Candidate matches are
//! resolved leftmost-longest, then adjacent mentions are joined into ranges
//! when the text between them is a lexicon connector. Anything the lexicon
//! does not recognize is ignored rather than guessed.

mod corpus;
mod lexicon;

use std::fmt::Write as _;

use chrono::{Datelike, Months, NaiveDate};

pub use corpus::{Corpus, CorpusCase, CorpusMiss};
pub use lexicon::{AtomRule, ConnectorKind, Extractor, Lexicon, LexiconError, PrefixKind, BUNDLED_LEXICON};

use crate::model::{DateOrigin, DateValue, Precision, TimeValue};

/// Half-open range of character (not byte) offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RangeRole {
    Point,
    RangeStart,
    RangeEnd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalMention {
    pub span: Span,
    pub value: TimeValue,
    pub role: RangeRole,
}

/// Extracts mentions with the bundled lexicon.
pub fn parse_time_expression(
    text: &str,
    dob: Option<NaiveDate>,
    reference: NaiveDate,
) -> Vec<TemporalMention> {
    parse_with(Lexicon::bundled(), text, dob, reference)
}

#[derive(Debug, Clone)]
struct Atom {
    start: usize,
    end: usize,
    rule: usize,
    value: TimeValue,
}

pub fn parse_with(
    lexicon: &Lexicon,
    text: &str,
    dob: Option<NaiveDate>,
    reference: NaiveDate,
) -> Vec<TemporalMention> {
    let atoms = select_atoms(collect_candidates(lexicon, text, dob, reference));

    let mut raw: Vec<(Atom, RangeRole, Option<TimeValue>)> = Vec::new();
    let mut i = 0;
    while i < atoms.len() {
        let a = &atoms[i];
        let rangeable = matches!(a.value, TimeValue::Date(_) | TimeValue::Early);
        let prefix = prefix_of(lexicon, text, a);

        if rangeable {
            if let Some(b) = atoms.get(i + 1) {
                let gap = text[a.end..b.start].trim().to_lowercase();
                let connector = lexicon
                    .connectors
                    .iter()
                    .find(|(c, _)| *c == gap)
                    .map(|(_, k)| *k);
                let joins = match connector {
                    Some(ConnectorKind::Range) => true,
                    Some(ConnectorKind::RangeBetween) => prefix == Some(PrefixKind::RangeBetween),
                    None => false,
                };
                if joins && matches!(b.value, TimeValue::Date(_) | TimeValue::Early) {
                    raw.push((a.clone(), RangeRole::RangeStart, None));
                    raw.push((b.clone(), RangeRole::RangeEnd, None));
                    i += 2;
                    continue;
                }
                if gap.is_empty()
                    && b.value == TimeValue::Current
                    && opens_with_connector(&text[b.start..b.end])
                {
                    raw.push((a.clone(), RangeRole::RangeStart, None));
                    raw.push((b.clone(), RangeRole::RangeEnd, None));
                    i += 2;
                    continue;
                }
            }
            if prefix == Some(PrefixKind::Since) {
                raw.push((a.clone(), RangeRole::RangeStart, None));
                raw.push((a.clone(), RangeRole::RangeEnd, Some(TimeValue::Current)));
                i += 1;
                continue;
            }
        }
        raw.push((a.clone(), RangeRole::Point, None));
        i += 1;
    }

    // Repeated ongoing/early markers say the same thing once; an ongoing
    // marker is redundant next to a range that already runs to the present.
    let open_ended = raw
        .iter()
        .any(|(a, role, v)| *role == RangeRole::RangeEnd && v.unwrap_or(a.value) == TimeValue::Current);
    let mut seen_current = open_ended;
    let mut seen_early = false;
    raw.retain(|(a, role, _)| {
        if *role != RangeRole::Point {
            return true;
        }
        let seen = match a.value {
            TimeValue::Current => &mut seen_current,
            TimeValue::Early => &mut seen_early,
            _ => return true,
        };
        !std::mem::replace(seen, true)
    });

    raw.into_iter()
        .map(|(atom, role, value)| TemporalMention {
            span: Span {
                start: char_offset(text, atom.start),
                end: char_offset(text, atom.end),
            },
            value: value.unwrap_or(atom.value),
            role,
        })
        .collect()
}

fn collect_candidates(
    lexicon: &Lexicon,
    text: &str,
    dob: Option<NaiveDate>,
    reference: NaiveDate,
) -> Vec<Atom> {
    let mut out = Vec::new();
    for (rule, atom_rule) in lexicon.atoms.iter().enumerate() {
        for caps in atom_rule.regex.captures_iter(text) {
            let whole = caps.get(0).expect("group 0 always exists");
            let group = |name: &str| caps.name(name).map(|m| m.as_str().to_lowercase());
            let value = extract(atom_rule.extractor, &group, dob, reference);
            if let Some(value) = value {
                out.push(Atom {
                    start: whole.start(),
                    end: whole.end(),
                    rule,
                    value,
                });
            }
        }
    }
    out
}

/// Leftmost-longest non-overlapping selection; earlier rules win exact ties.
fn select_atoms(mut candidates: Vec<Atom>) -> Vec<Atom> {
    candidates.sort_by_key(|a| (std::cmp::Reverse(a.end - a.start), a.start, a.rule));
    let mut chosen: Vec<Atom> = Vec::new();
    for c in candidates {
        if chosen.iter().all(|k| c.end <= k.start || k.end <= c.start) {
            chosen.push(c);
        }
    }
    chosen.sort_by_key(|a| a.start);
    chosen
}

fn extract(
    extractor: Extractor,
    group: &dyn Fn(&str) -> Option<String>,
    dob: Option<NaiveDate>,
    reference: NaiveDate,
) -> Option<TimeValue> {
    let year = || group("year")?.parse::<i32>().ok();
    let date = match extractor {
        Extractor::Current => return Some(TimeValue::Current),
        Extractor::Early => return Some(TimeValue::Early),
        Extractor::FullDate => {
            let month = parse_month(&group("month")?)?;
            let day = group("day")?.parse().ok()?;
            DateValue::day(NaiveDate::from_ymd_opt(year()?, month, day)?)
        }
        Extractor::MonthYear => DateValue::month(year()?, parse_month(&group("month")?)?)?,
        Extractor::Year => DateValue::year(year()?)?,
        Extractor::Age => DateValue::at_age(parse_number(&group("age")?)?, dob),
        Extractor::YearsAgo => {
            let n = parse_number(&group("n")?)?;
            DateValue::year(reference.year() - i32::try_from(n).ok()?)?
        }
        Extractor::MonthsAgo => {
            let n = parse_number(&group("n")?)?;
            let first = reference.with_day(1)?.checked_sub_months(Months::new(n))?;
            DateValue::absolute(first, Precision::Month)
        }
        Extractor::LastYear => DateValue::year(reference.year() - 1)?,
        Extractor::ThisYear => DateValue::year(reference.year())?,
    };
    Some(TimeValue::Date(date))
}

fn prefix_of(lexicon: &Lexicon, text: &str, atom: &Atom) -> Option<PrefixKind> {
    let own = text[atom.start..atom.end].to_lowercase();
    let before = text[..atom.start].trim_end().to_lowercase();
    lexicon.prefixes.iter().find_map(|(word, kind)| {
        let leads = own
            .strip_prefix(word.as_str())
            .is_some_and(|rest| rest.starts_with(char::is_whitespace));
        let trails = before
            .strip_suffix(word.as_str())
            .is_some_and(|head| head.chars().last().is_none_or(|c| !c.is_alphanumeric()));
        (leads || trails).then_some(*kind)
    })
}

fn opens_with_connector(phrase: &str) -> bool {
    let p = phrase.to_lowercase();
    ["to ", "until ", "till ", "up to "]
        .iter()
        .any(|c| p.starts_with(c))
}

fn parse_month(s: &str) -> Option<u32> {
    if let Ok(n) = s.parse::<u32>() {
        return (1..=12).contains(&n).then_some(n);
    }
    const NAMES: [&str; 12] = [
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
    ];
    let head = s.get(..3)?;
    NAMES.iter().position(|m| *m == head).map(|i| i as u32 + 1)
}

/// Parses digits or English number words up to ninety-nine.
pub fn parse_number(s: &str) -> Option<u32> {
    let s = s.trim().to_lowercase();
    if let Ok(n) = s.parse() {
        return Some(n);
    }
    const UNITS: [&str; 20] = [
        "zero",
        "one",
        "two",
        "three",
        "four",
        "five",
        "six",
        "seven",
        "eight",
        "nine",
        "ten",
        "eleven",
        "twelve",
        "thirteen",
        "fourteen",
        "fifteen",
        "sixteen",
        "seventeen",
        "eighteen",
        "nineteen",
    ];
    const TENS: [&str; 8] = [
        "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    ];
    if s == "a" || s == "an" {
        return Some(1);
    }
    if let Some(i) = UNITS.iter().position(|u| *u == s) {
        return Some(i as u32);
    }
    let mut parts = s.split(['-', ' ']).filter(|p| !p.is_empty());
    let tens = parts.next()?;
    let t = TENS.iter().position(|w| *w == tens)? as u32;
    let unit = match parts.next() {
        None => 0,
        Some(u) => UNITS[1..10].iter().position(|w| *w == u)? as u32 + 1,
    };
    parts.next().is_none().then_some(20 + 10 * t + unit)
}

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Corpus encoding of a mention list, e.g.
/// `start:date(2019-01-01,year,absolute) ; end:current`. An empty list is `-`.
pub fn encode_mentions(mentions: &[TemporalMention]) -> String {
    if mentions.is_empty() {
        return "-".into();
    }
    let mut out = String::new();
    for (i, m) in mentions.iter().enumerate() {
        if i > 0 {
            out.push_str(" ; ");
        }
        out.push_str(match m.role {
            RangeRole::Point => "point:",
            RangeRole::RangeStart => "start:",
            RangeRole::RangeEnd => "end:",
        });
        out.push_str(&encode_value(&m.value));
    }
    out
}

pub fn encode_value(value: &TimeValue) -> String {
    match value {
        TimeValue::Unspecified => "unspecified".into(),
        TimeValue::Early => "early".into(),
        TimeValue::Current => "current".into(),
        TimeValue::Date(d) => {
            let mut s = String::from("date(");
            match d.date {
                Some(date) => write!(s, "{date}").unwrap(),
                None => s.push('?'),
            }
            s.push_str(match d.precision {
                Precision::Day => ",day,",
                Precision::Month => ",month,",
                Precision::Year => ",year,",
            });
            match d.origin {
                DateOrigin::Absolute => s.push_str("absolute"),
                DateOrigin::RelativeAge { stated_age } => write!(s, "age={stated_age}").unwrap(),
            }
            s.push(')');
            s
        }
    }
}
