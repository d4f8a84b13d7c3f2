use std::collections::HashSet;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexicon::words;
use super::{is_stopword, Profile};
use crate::codec::EventDoc;
use crate::model::{resolve_relative_dates, validate_story, Event, HealthStory, Rule, Violation};

pub const PARSER_PROMPT: &str = include_str!("../../resources/parser_prompt_v1.txt");
pub const PROMPT_VERSION: &str = "1";
pub const PROMPT_VERSION_HEADER: &str = "X-Storyline-Prompt-Version";

pub const URL_VAR: &str = "STORYLINE_PARSER_URL";
pub const KEY_VAR: &str = "STORYLINE_PARSER_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemoteError {
    #[error("remote parser unavailable: {0}")]
    Unavailable(String),
    #[error("remote parser returned an invalid response: {0}")]
    Protocol(String),
}

/// Request body sent to the remote parser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RemoteRequest<'a> {
    pub narrative: &'a str,
    pub date_of_birth: Option<NaiveDate>,
}

/// Transport to a model-backed parser. Implementations return the raw
/// response body; validation happens in [`remote_parse`].
pub trait RemoteParser: Send + Sync {
    fn call(&self, request: &RemoteRequest<'_>) -> Result<String, RemoteError>;
}

/// JSON over HTTP POST with an optional bearer credential.
pub struct HttpRemoteParser {
    url: String,
    key: Option<String>,
    agent: ureq::Agent,
}

impl HttpRemoteParser {
    pub fn new(url: impl Into<String>, key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            url: url.into(),
            key,
            agent,
        }
    }

    /// Reads `STORYLINE_PARSER_URL` and `STORYLINE_PARSER_KEY`.
    pub fn from_env(timeout: Duration) -> Option<Self> {
        let url = std::env::var(URL_VAR).ok().filter(|u| !u.trim().is_empty())?;
        let key = std::env::var(KEY_VAR).ok().filter(|k| !k.is_empty());
        Some(Self::new(url, key, timeout))
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl std::fmt::Debug for HttpRemoteParser {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpRemoteParser")
            .field("url", &self.url)
            .field("key", &self.key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl RemoteParser for HttpRemoteParser {
    fn call(&self, request: &RemoteRequest<'_>) -> Result<String, RemoteError> {
        let body = serde_json::to_string(request).map_err(|e| RemoteError::Protocol(e.to_string()))?;
        let mut req = self
            .agent
            .post(&self.url)
            .header("Content-Type", "application/json")
            .header(PROMPT_VERSION_HEADER, PROMPT_VERSION);
        if let Some(key) = &self.key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        match req.send(body) {
            Ok(mut response) => response
                .body_mut()
                .read_to_string()
                .map_err(|e| RemoteError::Unavailable(e.to_string())),
            Err(ureq::Error::StatusCode(code)) if code >= 500 || code == 429 => {
                Err(RemoteError::Unavailable(format!("status {code}")))
            }
            Err(ureq::Error::StatusCode(code)) => Err(RemoteError::Protocol(format!("status {code}"))),
            Err(e) => Err(RemoteError::Unavailable(e.to_string())),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseDoc {
    events: Vec<EventDoc>,
}

/// Events accepted from a remote response and what was set aside.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RemoteOutcome {
    #[serde(skip)]
    pub events: Vec<Event>,
    /// Violations of events that were dropped.
    pub dropped: Vec<Violation>,
    /// Kept events whose title uses words absent from the narrative.
    pub not_grounded: Vec<String>,
}

/// True when every content word of `title` occurs in `source`, ignoring case.
pub fn is_grounded(title: &str, source: &str) -> bool {
    let vocabulary: HashSet<String> = words(source).into_iter().map(|w| w.lower).collect();
    words(title)
        .into_iter()
        .filter(|w| !is_stopword(&w.lower))
        .all(|w| vocabulary.contains(&w.lower))
}

/// Sends the narrative to `client` and validates the response.
///
/// Events without an id get `e<n>` by position. Events that break a story
/// invariant are dropped and reported, except for relative ages that cannot
/// be resolved for lack of a date of birth.
pub fn remote_parse(
    text: &str,
    profile: &Profile,
    client: &dyn RemoteParser,
) -> Result<RemoteOutcome, RemoteError> {
    let body = client.call(&RemoteRequest {
        narrative: text,
        date_of_birth: profile.date_of_birth,
    })?;
    let doc: ResponseDoc = serde_json::from_str(&body).map_err(|e| RemoteError::Protocol(e.to_string()))?;

    let events = doc
        .events
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let id = d.id.clone().unwrap_or_else(|| format!("e{}", i + 1));
            let index = u32::try_from(i).unwrap_or(u32::MAX);
            d.into_event(id, index)
        })
        .collect();
    let mut story = HealthStory {
        name: profile.name.clone(),
        date_of_birth: profile.date_of_birth,
        source_narrative: Some(text.to_owned()),
        events,
    };
    if let Ok(resolved) = resolve_relative_dates(&story) {
        story = resolved;
    }

    let dropped: Vec<Violation> = validate_story(&story)
        .into_iter()
        .filter(|v| v.rule != Rule::UnresolvedRelativeDate)
        .collect();
    let bad: HashSet<&str> = dropped.iter().map(|v| v.event_id.as_str()).collect();
    let events: Vec<Event> = story
        .events
        .iter()
        .filter(|e| !bad.contains(e.id.as_str()))
        .cloned()
        .collect();
    let not_grounded = events
        .iter()
        .filter(|e| !is_grounded(&e.title, text))
        .map(|e| e.id.clone())
        .collect();
    Ok(RemoteOutcome {
        events,
        dropped,
        not_grounded,
    })
}
