//! HTTP routes over a [`Store`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use storyline_core::codec::{events_from_docs, EventDoc};
use storyline_core::narrative::ParserConfig;
use storyline_core::{
    parse_narrative, resolve_relative_dates, to_canonical_json, validate_story, Designation, HealthStory,
    ParseReport, ParserMode, Profile, RemoteError, RemoteParser, Rule, SpecificConcern, TimeValue, Violation,
};

use crate::error::ServiceError;
use crate::store::{Store, StoryRecord};

/// Shared handler state.
#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub parser: Arc<ParserConfig>,
    pub remote: Option<Arc<dyn RemoteParser>>,
}

impl AppState {
    pub fn new(store: Store, parser: ParserConfig, remote: Option<Arc<dyn RemoteParser>>) -> Self {
        Self {
            store: Arc::new(store),
            parser: Arc::new(parser),
            remote,
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/stories", axum::routing::post(create_story))
        .route("/stories/{id}", get(get_story))
        .route("/stories/{id}/events", axum::routing::post(add_event))
        .route(
            "/stories/{id}/events/{eid}",
            get(get_event).patch(patch_event).delete(delete_event),
        )
        .route("/stories/{id}/layout", get(get_layout))
        .route("/stories/{id}/artifact.svg", get(get_artifact))
        .with_state(state)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

fn expected_revision(headers: &HeaderMap) -> Result<Option<u64>, ServiceError> {
    let Some(value) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    let text = value
        .to_str()
        .map_err(|_| ServiceError::BadRequest("If-Match is not ASCII".into()))?;
    let text = text.trim().trim_start_matches("W/").trim_matches('"');
    text.parse()
        .map(Some)
        .map_err(|_| ServiceError::BadRequest(format!("If-Match {text:?} is not a revision")))
}

fn etag(revision: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are a valid header")
}

fn json_response<T: Serialize>(status: StatusCode, revision: u64, body: &T) -> Response {
    (
        status,
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
            (header::ETAG, etag(revision)),
        ],
        to_canonical_json(body),
    )
        .into_response()
}

/// Record as returned by the API, with the current validation report.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RecordBody<'a> {
    #[serde(flatten)]
    record: &'a StoryRecord,
    violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parse: Option<&'a ParseReport>,
}

fn record_response(status: StatusCode, record: &StoryRecord, parse: Option<&ParseReport>) -> Response {
    let body = RecordBody {
        record,
        violations: validate_story(&record.story),
        parse,
    };
    json_response(status, record.revision, &body)
}

async fn blocking<T, F>(f: F) -> Result<T, ServiceError>
where
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

async fn healthz(State(state): State<AppState>) -> Response {
    let body = serde_json::json!({ "status": "ok", "stories": state.store.len() });
    axum::Json(body).into_response()
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateRequest {
    name: String,
    #[serde(default)]
    date_of_birth: Option<NaiveDate>,
    #[serde(default)]
    narrative: Option<String>,
    #[serde(default)]
    events: Option<Vec<EventDoc>>,
    #[serde(default)]
    parser: Option<String>,
}

fn build_story(
    req: CreateRequest,
    state: &AppState,
) -> Result<(HealthStory, Option<ParseReport>), ServiceError> {
    if req.name.trim().is_empty() {
        return Err(ServiceError::BadRequest("profile name is empty".into()));
    }
    let profile = Profile {
        name: req.name.trim().to_owned(),
        date_of_birth: req.date_of_birth,
    };
    let mut story = HealthStory::new(profile.name.clone(), profile.date_of_birth);
    story.source_narrative = req.narrative.clone();

    let report = match (req.events, req.narrative) {
        (Some(_), Some(_)) => {
            return Err(ServiceError::BadRequest(
                "give either `narrative` or `events`, not both".into(),
            ))
        }
        (Some(docs), None) => {
            let docs = docs
                .into_iter()
                .enumerate()
                .map(|(i, mut d)| {
                    d.id.get_or_insert_with(|| format!("e{}", i + 1));
                    d
                })
                .collect();
            story.events = events_from_docs(docs).map_err(ServiceError::BadRequest)?;
            None
        }
        (None, narrative) => {
            let mode = match req.parser.as_deref() {
                Some(m) => m.parse::<ParserMode>().map_err(ServiceError::BadRequest)?,
                None => state.parser.mode,
            };
            let mut config = (*state.parser).clone().with_mode(mode);
            config.reference_date = chrono::Utc::now().date_naive();
            let text = narrative.unwrap_or_default();
            let (events, report) = parse_narrative(&text, &profile, &config, state.remote.as_deref())
                .map_err(|e| match e {
                    RemoteError::Unavailable(m) | RemoteError::Protocol(m) => ServiceError::Upstream(m),
                })?;
            story.events = events;
            Some(report)
        }
    };
    if let Ok(resolved) = resolve_relative_dates(&story) {
        story = resolved;
    }
    let blocking: Vec<Violation> = validate_story(&story)
        .into_iter()
        .filter(|v| v.rule != Rule::UnresolvedRelativeDate)
        .collect();
    if !blocking.is_empty() {
        return Err(ServiceError::Invalid(blocking));
    }
    Ok((story, report))
}

async fn create_story(State(state): State<AppState>, body: Bytes) -> Result<Response, ServiceError> {
    let req: CreateRequest = parse_body(&body)?;
    let (record, report) = blocking(move || {
        let (story, report) = build_story(req, &state)?;
        Ok((state.store.create(story)?, report))
    })
    .await?;
    tracing::info!(id = %record.id, events = record.story.events.len(), "story created");
    Ok(record_response(StatusCode::CREATED, &record, report.as_ref()))
}

async fn get_story(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let record = state.store.get(&id)?;
    Ok(record_response(StatusCode::OK, &record, None))
}

async fn get_event(
    State(state): State<AppState>,
    Path((id, eid)): Path<(String, String)>,
) -> Result<Response, ServiceError> {
    let record = state.store.get(&id)?;
    let event = record
        .story
        .event(&eid)
        .ok_or_else(|| ServiceError::NotFound(format!("event {eid:?}")))?;
    Ok(json_response(StatusCode::OK, record.revision, event))
}

fn double_option<'de, T: Deserialize<'de>, D: Deserializer<'de>>(
    d: D,
) -> Result<Option<Option<T>>, D::Error> {
    Option::<T>::deserialize(d).map(Some)
}

/// Fields to overwrite on one event; absent fields are kept.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EventPatch {
    pub title: Option<String>,
    pub notes: Option<String>,
    pub designation: Option<Designation>,
    pub specific_concern: Option<SpecificConcern>,
    #[serde(default, deserialize_with = "double_option")]
    pub broad_concern: Option<Option<String>>,
    pub start: Option<TimeValue>,
    pub end: Option<TimeValue>,
    pub narrative_index: Option<u32>,
}

impl EventPatch {
    fn apply(self, story: &mut HealthStory, eid: &str) -> Result<(), ServiceError> {
        let dob = story.date_of_birth;
        let event = story
            .event_mut(eid)
            .ok_or_else(|| ServiceError::NotFound(format!("event {eid:?}")))?;
        if let Some(v) = self.title {
            event.title = v;
        }
        if let Some(v) = self.notes {
            event.notes = v;
        }
        if let Some(v) = self.designation {
            event.designation = v;
        }
        if let Some(v) = self.specific_concern {
            event.specific_concern = v;
        }
        if let Some(v) = self.broad_concern {
            event.broad_concern = v;
        }
        if let Some(v) = self.start {
            event.start = v;
        }
        if let Some(v) = self.end {
            event.end = v;
        }
        if let Some(v) = self.narrative_index {
            event.narrative_index = v;
        }
        if dob.is_some() {
            if let Ok(resolved) = resolve_relative_dates(story) {
                *story = resolved;
            }
        }
        Ok(())
    }
}

async fn patch_event(
    State(state): State<AppState>,
    Path((id, eid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let expected = expected_revision(&headers)?;
    let patch: EventPatch = parse_body(&body)?;
    let record = blocking(move || {
        state
            .store
            .update(&id, expected, |story| patch.apply(story, &eid))
    })
    .await?;
    Ok(record_response(StatusCode::OK, &record, None))
}

async fn add_event(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let expected = expected_revision(&headers)?;
    let doc: EventDoc = parse_body(&body)?;
    let record = blocking(move || {
        state.store.update(&id, expected, |story| {
            let id = match doc.id.clone() {
                Some(id) => id,
                None => (story.events.len() + 1..)
                    .map(|n| format!("e{n}"))
                    .find(|c| story.event(c).is_none())
                    .expect("unbounded candidates"),
            };
            let index = story.next_narrative_index();
            story.events.push(doc.into_event(id, index));
            if let Ok(resolved) = resolve_relative_dates(story) {
                *story = resolved;
            }
            Ok(())
        })
    })
    .await?;
    Ok(record_response(StatusCode::CREATED, &record, None))
}

async fn delete_event(
    State(state): State<AppState>,
    Path((id, eid)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ServiceError> {
    let expected = expected_revision(&headers)?;
    let record = blocking(move || {
        state.store.update(&id, expected, |story| {
            let before = story.events.len();
            story.events.retain(|e| e.id != eid);
            if story.events.len() == before {
                return Err(ServiceError::NotFound(format!("event {eid:?}")));
            }
            Ok(())
        })
    })
    .await?;
    Ok(record_response(StatusCode::OK, &record, None))
}

async fn get_layout(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let (record, artifacts) = blocking(move || state.store.artifacts(&id)).await?;
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
            (header::ETAG, etag(record.revision)),
        ],
        artifacts.layout.clone(),
    )
        .into_response())
}

async fn get_artifact(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let (record, artifacts) = blocking(move || state.store.artifacts(&id)).await?;
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("image/svg+xml")),
            (header::ETAG, etag(record.revision)),
        ],
        artifacts.svg.clone(),
    )
        .into_response())
}
