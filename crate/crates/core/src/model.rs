//! Events, their attributes, and the story that owns them.

use std::collections::HashSet;
use std::fmt;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

/// How much of a stored calendar date the patient actually stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Precision {
    Day,
    Month,
    Year,
}

/// Whether a date was given on the calendar or as "when I was N".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DateOrigin {
    Absolute,
    RelativeAge { stated_age: u32 },
}

impl DateOrigin {
    pub fn stated_age(self) -> Option<u32> {
        match self {
            DateOrigin::Absolute => None,
            DateOrigin::RelativeAge { stated_age } => Some(stated_age),
        }
    }
}

/// An explicit temporal reference.
///
/// `date` is `None` only for a relative age that has not yet been mapped onto
/// the calendar because the date of birth is unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DateValue {
    pub date: Option<NaiveDate>,
    pub precision: Precision,
    pub origin: DateOrigin,
}

impl DateValue {
    pub fn absolute(date: NaiveDate, precision: Precision) -> Self {
        Self {
            date: Some(date),
            precision,
            origin: DateOrigin::Absolute,
        }
    }

    /// Absolute year-only date anchored on January 1.
    pub fn year(year: i32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, 1, 1).map(|d| Self::absolute(d, Precision::Year))
    }

    /// Absolute month-only date anchored on the 1st.
    pub fn month(year: i32, month: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, 1).map(|d| Self::absolute(d, Precision::Month))
    }

    pub fn day(date: NaiveDate) -> Self {
        Self::absolute(date, Precision::Day)
    }

    /// A relative age, resolved immediately when the date of birth is known.
    pub fn at_age(stated_age: u32, dob: Option<NaiveDate>) -> Self {
        Self {
            date: dob.and_then(|dob| anniversary(dob, stated_age)),
            precision: Precision::Year,
            origin: DateOrigin::RelativeAge { stated_age },
        }
    }

    pub fn is_unresolved(&self) -> bool {
        self.date.is_none()
    }
}

/// The date of birth shifted forward by `years` whole years.
///
/// A February 29 birthday lands on February 28 in non-leap years.
pub fn anniversary(dob: NaiveDate, years: u32) -> Option<NaiveDate> {
    dob.checked_add_months(Months::new(years.checked_mul(12)?))
}

/// Whole years elapsed between `dob` and `on`; negative before birth.
pub fn age_on(dob: NaiveDate, on: NaiveDate) -> i32 {
    let mut years = on.year() - dob.year();
    if (on.month(), on.day()) < (dob.month(), dob.day()) {
        years -= 1;
    }
    years
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum TimeValue {
    #[default]
    Unspecified,
    Early,
    Current,
    Date(DateValue),
}

impl TimeValue {
    pub fn resolved_date(&self) -> Option<NaiveDate> {
        match self {
            TimeValue::Date(d) => d.date,
            _ => None,
        }
    }

    pub fn is_unresolved_date(&self) -> bool {
        matches!(self, TimeValue::Date(d) if d.is_unresolved())
    }

    pub fn date_value(&self) -> Option<&DateValue> {
        match self {
            TimeValue::Date(d) => Some(d),
            _ => None,
        }
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeValue::Unspecified => f.write_str("unspecified"),
            TimeValue::Early => f.write_str("early"),
            TimeValue::Current => f.write_str("current"),
            TimeValue::Date(d) => {
                match d.date {
                    Some(date) => write!(f, "{date}")?,
                    None => f.write_str("?")?,
                }
                if let DateOrigin::RelativeAge { stated_age } = d.origin {
                    write!(f, " (age {stated_age})")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Designation {
    Symptom,
    Medication,
    Treatment,
    Provider,
    Test,
    Procedure,
    Diagnosis,
    LifeEvent,
}

impl Designation {
    pub const ALL: [Designation; 8] = [
        Designation::Symptom,
        Designation::Medication,
        Designation::Treatment,
        Designation::Provider,
        Designation::Test,
        Designation::Procedure,
        Designation::Diagnosis,
        Designation::LifeEvent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Designation::Symptom => "Symptom",
            Designation::Medication => "Medication",
            Designation::Treatment => "Treatment",
            Designation::Provider => "Provider",
            Designation::Test => "Test",
            Designation::Procedure => "Procedure",
            Designation::Diagnosis => "Diagnosis",
            Designation::LifeEvent => "LifeEvent",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == name)
    }

    /// Rank used when one clause hits several designations; lower wins.
    pub fn priority(self) -> u8 {
        match self {
            Designation::Diagnosis => 0,
            Designation::Procedure => 1,
            Designation::Test => 2,
            Designation::Medication => 3,
            Designation::Treatment => 4,
            Designation::Provider => 5,
            Designation::Symptom => 6,
            Designation::LifeEvent => 7,
        }
    }
}

impl fmt::Display for Designation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpecificConcern {
    Named(String),
    Other,
    LifeConcern,
}

impl SpecificConcern {
    pub const OTHER: &'static str = "Other";
    pub const LIFE_CONCERN: &'static str = "LifeConcern";

    pub fn parse(s: &str) -> Self {
        match s {
            Self::OTHER => SpecificConcern::Other,
            Self::LIFE_CONCERN => SpecificConcern::LifeConcern,
            other => SpecificConcern::Named(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            SpecificConcern::Named(s) => s,
            SpecificConcern::Other => Self::OTHER,
            SpecificConcern::LifeConcern => Self::LIFE_CONCERN,
        }
    }
}

impl fmt::Display for SpecificConcern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    pub title: String,
    pub notes: String,
    pub designation: Designation,
    pub specific_concern: SpecificConcern,
    pub broad_concern: Option<String>,
    pub start: TimeValue,
    pub end: TimeValue,
    pub narrative_index: u32,
}

impl Event {
    pub fn ends(&self) -> [(EventEnd, &TimeValue); 2] {
        [(EventEnd::Start, &self.start), (EventEnd::End, &self.end)]
    }
}

/// Which of an event's two temporal attributes a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EventEnd {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HealthStory {
    pub name: String,
    pub date_of_birth: Option<NaiveDate>,
    pub source_narrative: Option<String>,
    pub events: Vec<Event>,
}

impl HealthStory {
    pub fn new(name: impl Into<String>, date_of_birth: Option<NaiveDate>) -> Self {
        Self {
            name: name.into(),
            date_of_birth,
            source_narrative: None,
            events: Vec::new(),
        }
    }

    pub fn event(&self, id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn event_mut(&mut self, id: &str) -> Option<&mut Event> {
        self.events.iter_mut().find(|e| e.id == id)
    }

    /// Index for an event appended after everything already in the story.
    pub fn next_narrative_index(&self) -> u32 {
        self.events
            .iter()
            .map(|e| e.narrative_index + 1)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    EmptyTitle,
    DuplicateId,
    LifeConcernCoupling,
    StartAfterEnd,
    NarrativeOrder,
    BeforeBirth,
    PrecisionAnchor,
    UnresolvedRelativeDate,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::EmptyTitle => "empty-title",
            Rule::DuplicateId => "duplicate-id",
            Rule::LifeConcernCoupling => "life-concern-coupling",
            Rule::StartAfterEnd => "start-after-end",
            Rule::NarrativeOrder => "narrative-order",
            Rule::BeforeBirth => "before-birth",
            Rule::PrecisionAnchor => "precision-anchor",
            Rule::UnresolvedRelativeDate => "unresolved-relative-date",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub event_id: String,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.event_id, self.rule.id(), self.message)
    }
}

/// Checks every event invariant and returns all violations in event order.
pub fn validate_story(story: &HealthStory) -> Vec<Violation> {
    let mut report = Vec::new();
    let mut seen = HashSet::new();
    let mut previous_index: Option<u32> = None;

    for event in &story.events {
        let mut flag = |rule: Rule, message: String| {
            report.push(Violation {
                event_id: event.id.clone(),
                rule,
                message,
            })
        };

        if event.title.trim().is_empty() {
            flag(Rule::EmptyTitle, "title is empty".into());
        }
        if !seen.insert(event.id.as_str()) {
            flag(
                Rule::DuplicateId,
                format!("id `{}` is used more than once", event.id),
            );
        }
        let is_life = event.designation == Designation::LifeEvent;
        let has_life_concern = event.specific_concern == SpecificConcern::LifeConcern;
        if is_life != has_life_concern {
            flag(
                Rule::LifeConcernCoupling,
                format!(
                    "designation {} requires specific concern {}",
                    event.designation,
                    if is_life {
                        "LifeConcern"
                    } else {
                        "other than LifeConcern"
                    }
                ),
            );
        }
        if let Some(prev) = previous_index {
            if event.narrative_index <= prev {
                flag(
                    Rule::NarrativeOrder,
                    format!("narrative index {} does not follow {prev}", event.narrative_index),
                );
            }
        }
        previous_index = Some(event.narrative_index);

        if let (Some(start), Some(end)) = (event.start.resolved_date(), event.end.resolved_date()) {
            if start > end {
                flag(Rule::StartAfterEnd, format!("start {start} is after end {end}"));
            }
        }

        for (which, value) in event.ends() {
            let Some(date_value) = value.date_value() else {
                continue;
            };
            let Some(date) = date_value.date else {
                flag(
                    Rule::UnresolvedRelativeDate,
                    format!("{which:?} relative age has no calendar date"),
                );
                continue;
            };
            if let Some(dob) = story.date_of_birth {
                if date < dob {
                    flag(
                        Rule::BeforeBirth,
                        format!("{which:?} {date} precedes date of birth {dob}"),
                    );
                }
            }
            if let Some(msg) = anchor_problem(date_value, date, story.date_of_birth) {
                flag(Rule::PrecisionAnchor, format!("{which:?} {msg}"));
            }
        }
    }
    report
}

fn anchor_problem(value: &DateValue, date: NaiveDate, dob: Option<NaiveDate>) -> Option<String> {
    match (value.precision, value.origin) {
        (Precision::Day, _) => None,
        (Precision::Month, _) => (date.day() != 1).then(|| format!("month date {date} not on the 1st")),
        (Precision::Year, DateOrigin::Absolute) => {
            (date.ordinal() != 1).then(|| format!("year date {date} not on January 1"))
        }
        (Precision::Year, DateOrigin::RelativeAge { stated_age }) => {
            let expected = anniversary(dob?, stated_age)?;
            (date != expected)
                .then(|| format!("age {stated_age} maps to {date}, expected anniversary {expected}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("relative ages cannot be resolved without a date of birth (events: {})", .event_ids.join(", "))]
pub struct UnresolvableRelativeDate {
    pub event_ids: Vec<String>,
}

/// Maps every relative age onto the calendar using the date of birth.
pub fn resolve_relative_dates(story: &HealthStory) -> Result<HealthStory, UnresolvableRelativeDate> {
    let Some(dob) = story.date_of_birth else {
        let event_ids: Vec<String> = story
            .events
            .iter()
            .filter(|e| e.ends().iter().any(|(_, v)| is_relative(v)))
            .map(|e| e.id.clone())
            .collect();
        return if event_ids.is_empty() {
            Ok(story.clone())
        } else {
            Err(UnresolvableRelativeDate { event_ids })
        };
    };

    let mut resolved = story.clone();
    for event in &mut resolved.events {
        for value in [&mut event.start, &mut event.end] {
            if let TimeValue::Date(d) = value {
                if let DateOrigin::RelativeAge { stated_age } = d.origin {
                    d.date = anniversary(dob, stated_age);
                    d.precision = Precision::Year;
                }
            }
        }
    }
    Ok(resolved)
}

fn is_relative(value: &TimeValue) -> bool {
    matches!(value, TimeValue::Date(d) if matches!(d.origin, DateOrigin::RelativeAge { .. }))
}
