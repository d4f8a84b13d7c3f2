//! Canonical JSON encoding of stories and events.
//!
//! Output is byte-deterministic: keys follow struct declaration order, lists
//! keep story order, and every document ends with a single newline.

use chrono::NaiveDate;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::{
    DateOrigin, DateValue, Designation, Event, HealthStory, Precision, SpecificConcern, TimeValue,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocumentError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for DocumentError {
    fn from(err: serde_json::Error) -> Self {
        let (line, column) = (err.line(), err.column());
        let message = err.to_string();
        match err.classify() {
            serde_json::error::Category::Data => DocumentError::Schema {
                line,
                column,
                message,
            },
            _ => DocumentError::Parse {
                line,
                column,
                message,
            },
        }
    }
}

pub fn serialize_story(story: &HealthStory) -> String {
    to_canonical_json(story)
}

pub fn deserialize_story(document: &str) -> Result<HealthStory, DocumentError> {
    Ok(serde_json::from_str(document)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("in-memory values always serialize");
    out.push('\n');
    out
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
enum OriginDoc {
    Absolute,
    RelativeAge,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
enum TimeDoc {
    Unspecified,
    Early,
    Current,
    Date {
        date: Option<NaiveDate>,
        precision: Precision,
        origin: OriginDoc,
        #[serde(rename = "statedAge", default, skip_serializing_if = "Option::is_none")]
        stated_age: Option<u32>,
    },
}

impl From<TimeValue> for TimeDoc {
    fn from(value: TimeValue) -> Self {
        match value {
            TimeValue::Unspecified => TimeDoc::Unspecified,
            TimeValue::Early => TimeDoc::Early,
            TimeValue::Current => TimeDoc::Current,
            TimeValue::Date(d) => TimeDoc::Date {
                date: d.date,
                precision: d.precision,
                origin: match d.origin {
                    DateOrigin::Absolute => OriginDoc::Absolute,
                    DateOrigin::RelativeAge { .. } => OriginDoc::RelativeAge,
                },
                stated_age: d.origin.stated_age(),
            },
        }
    }
}

impl TryFrom<TimeDoc> for TimeValue {
    type Error = String;

    fn try_from(doc: TimeDoc) -> Result<Self, Self::Error> {
        Ok(match doc {
            TimeDoc::Unspecified => TimeValue::Unspecified,
            TimeDoc::Early => TimeValue::Early,
            TimeDoc::Current => TimeValue::Current,
            TimeDoc::Date {
                date,
                precision,
                origin,
                stated_age,
            } => {
                let origin = match (origin, stated_age) {
                    (OriginDoc::Absolute, None) => DateOrigin::Absolute,
                    (OriginDoc::RelativeAge, Some(stated_age)) => DateOrigin::RelativeAge { stated_age },
                    (OriginDoc::Absolute, Some(_)) => {
                        return Err("statedAge is only allowed with origin relativeAge".into())
                    }
                    (OriginDoc::RelativeAge, None) => {
                        return Err("origin relativeAge requires statedAge".into())
                    }
                };
                if date.is_none() && origin == DateOrigin::Absolute {
                    return Err("absolute date requires `date`".into());
                }
                TimeValue::Date(DateValue {
                    date,
                    precision,
                    origin,
                })
            }
        })
    }
}

impl Serialize for TimeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TimeDoc::from(*self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        TimeDoc::deserialize(deserializer)?
            .try_into()
            .map_err(D::Error::custom)
    }
}

impl Serialize for SpecificConcern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for SpecificConcern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(SpecificConcern::parse(&s))
    }
}

/// Wire form of an event.
///
/// `id` and `narrativeIndex` are optional on input so that new events and
/// remote parser payloads can omit them; both are always written on output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EventDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub title: String,
    #[serde(default)]
    pub notes: String,
    pub designation: Designation,
    pub specific_concern: SpecificConcern,
    #[serde(default)]
    pub broad_concern: Option<String>,
    #[serde(default)]
    pub start: TimeValue,
    #[serde(default)]
    pub end: TimeValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrative_index: Option<u32>,
}

impl EventDoc {
    pub fn into_event(self, id: String, narrative_index: u32) -> Event {
        Event {
            id,
            title: self.title,
            notes: self.notes,
            designation: self.designation,
            specific_concern: self.specific_concern,
            broad_concern: self.broad_concern,
            start: self.start,
            end: self.end,
            narrative_index: self.narrative_index.unwrap_or(narrative_index),
        }
    }
}

impl From<&Event> for EventDoc {
    fn from(e: &Event) -> Self {
        EventDoc {
            id: Some(e.id.clone()),
            title: e.title.clone(),
            notes: e.notes.clone(),
            designation: e.designation,
            specific_concern: e.specific_concern.clone(),
            broad_concern: e.broad_concern.clone(),
            start: e.start,
            end: e.end,
            narrative_index: Some(e.narrative_index),
        }
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EventDoc::from(self).serialize(serializer)
    }
}

/// Converts wire events, assigning missing narrative indices after the
/// preceding event.
pub fn events_from_docs(docs: Vec<EventDoc>) -> Result<Vec<Event>, String> {
    let mut next = 0u32;
    docs.into_iter()
        .enumerate()
        .map(|(i, doc)| {
            let id = doc
                .id
                .clone()
                .ok_or_else(|| format!("event {i} is missing `id`"))?;
            let event = doc.into_event(id, next);
            next = event.narrative_index.saturating_add(1);
            Ok(event)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StoryDoc {
    name: String,
    date_of_birth: Option<NaiveDate>,
    #[serde(default)]
    source_narrative: Option<String>,
    events: Vec<EventDoc>,
}

impl Serialize for HealthStory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StoryDoc {
            name: self.name.clone(),
            date_of_birth: self.date_of_birth,
            source_narrative: self.source_narrative.clone(),
            events: self.events.iter().map(EventDoc::from).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HealthStory {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = StoryDoc::deserialize(deserializer)?;
        Ok(HealthStory {
            name: doc.name,
            date_of_birth: doc.date_of_birth,
            source_narrative: doc.source_narrative,
            events: events_from_docs(doc.events).map_err(D::Error::custom)?,
        })
    }
}
