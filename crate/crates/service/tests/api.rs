use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use storyline_core::narrative::ParserConfig;
use storyline_core::{
    extract_events, layout_document, render_story, LayoutConfig, ParserMode, Profile, RemoteError,
    RemoteParser, StyleConfig,
};
use storyline_service::{router, AppState, Store};

const NARRATIVE: &str = "I had asthma as a child. In March 2019 I was diagnosed with hypothyroidism. \
                         My doctor prescribed levothyroxine in April 2019.";

fn state_in(dir: &std::path::Path) -> AppState {
    let store = Store::open(dir, LayoutConfig::default(), StyleConfig::default()).unwrap();
    let parser = ParserConfig::new(chrono::NaiveDate::from_ymd_opt(2025, 1, 1).unwrap());
    AppState::new(store, parser, None)
}

async fn send(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
    if_match: Option<u64>,
) -> (StatusCode, Vec<u8>, Option<String>) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(rev) = if_match {
        req = req.header(header::IF_MATCH, format!("\"{rev}\""));
    }
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = tower::ServiceExt::oneshot(app.clone(), req).await.unwrap();
    let status = resp.status();
    let etag = resp
        .headers()
        .get(header::ETAG)
        .map(|v| v.to_str().unwrap().to_owned());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes, etag)
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

async fn create(app: &Router, body: Value) -> Value {
    let (status, bytes, _) = send(app, Method::POST, "/stories", Some(body), None).await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&bytes));
    json_of(&bytes)
}

fn profile() -> Value {
    json!({"name": "Ada", "dateOfBirth": "1990-06-15", "narrative": NARRATIVE})
}

#[tokio::test]
async fn create_parses_with_the_rule_based_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state_in(dir.path()));
    let record = create(&app, profile()).await;
    assert_eq!(record["revision"], 1);
    assert_eq!(record["parse"]["source"], "rule-based");

    let profile = Profile {
        name: "Ada".into(),
        date_of_birth: chrono::NaiveDate::from_ymd_opt(1990, 6, 15),
    };
    let expected = extract_events(
        NARRATIVE,
        &profile,
        &ParserConfig::new(chrono::Utc::now().date_naive()),
    );
    let expected = serde_json::to_value(&expected).unwrap();
    assert_eq!(record["story"]["events"], expected);
}

#[tokio::test]
async fn empty_narrative_and_bad_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state_in(dir.path()));
    let record = create(
        &app,
        json!({"name": "Ada", "dateOfBirth": "1990-06-15", "narrative": ""}),
    )
    .await;
    assert_eq!(record["story"]["events"], json!([]));

    for bad in [
        json!({"name": "", "narrative": "x"}),
        json!({"name": "Ada", "dateOfBirth": "1990-13-40"}),
        json!({"name": "Ada", "unknown": 1}),
        json!({"name": "Ada", "narrative": "x", "parser": "magic"}),
    ] {
        let (status, _, _) = send(&app, Method::POST, "/stories", Some(bad), None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
    }
}

#[tokio::test]
async fn missing_birth_date_keeps_unresolved_ages() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state_in(dir.path()));
    let record = create(
        &app,
        json!({"name": "Ada", "narrative": "I broke my arm when I was 7."}),
    )
    .await;
    let start = &record["story"]["events"][0]["start"];
    assert_eq!(start["origin"], "relativeAge");
    assert_eq!(start["date"], Value::Null);
    assert_eq!(record["violations"][0]["rule"], "unresolved-relative-date");
}

struct Down;

impl RemoteParser for Down {
    fn call(&self, _: &storyline_core::narrative::RemoteRequest<'_>) -> Result<String, RemoteError> {
        Err(RemoteError::Unavailable("connection refused".into()))
    }
}

#[tokio::test]
async fn remote_failure_is_a_gateway_error_unless_falling_back() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path(), LayoutConfig::default(), StyleConfig::default()).unwrap();
    let parser =
        ParserConfig::new(chrono::NaiveDate::from_ymd_opt(2025, 1, 1).unwrap()).with_mode(ParserMode::Remote);
    let app = router(AppState::new(store, parser, Some(Arc::new(Down))));

    let (status, _, _) = send(&app, Method::POST, "/stories", Some(profile()), None).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);

    let mut body = profile();
    body["parser"] = json!("remote-with-fallback");
    let record = create(&app, body).await;
    assert_eq!(record["parse"]["source"], "rule-based");
    assert!(record["parse"]["fallbackReason"]
        .as_str()
        .unwrap()
        .contains("refused"));
}

#[tokio::test]
async fn create_from_events_and_fetch_layout() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state_in(dir.path()));
    let story = include_str!("../../core/tests/fixtures/stories/fig2.json");
    let mut body: Value = serde_json::from_str(story).unwrap();
    body.as_object_mut().unwrap().remove("sourceNarrative");
    let record = create(&app, body).await;
    let id = record["id"].as_str().unwrap();

    let (status, layout, etag) = send(&app, Method::GET, &format!("/stories/{id}/layout"), None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(etag.as_deref(), Some("\"1\""));
    let parsed = storyline_core::deserialize_story(story).unwrap();
    let (expected_layout, expected_svg) =
        render_story(&parsed, &LayoutConfig::default(), &StyleConfig::default()).unwrap();
    assert_eq!(
        String::from_utf8(layout.clone()).unwrap(),
        layout_document(&expected_layout)
    );

    let (_, again, _) = send(&app, Method::GET, &format!("/stories/{id}/layout"), None, None).await;
    assert_eq!(layout, again);

    let (status, svg, _) = send(
        &app,
        Method::GET,
        &format!("/stories/{id}/artifact.svg"),
        None,
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(String::from_utf8(svg).unwrap(), expected_svg);
}

#[tokio::test]
async fn patch_add_delete_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state_in(dir.path()));
    let record = create(&app, profile()).await;
    let id = record["id"].as_str().unwrap().to_owned();
    let eid = record["story"]["events"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["designation"] == "Diagnosis")
        .unwrap()["id"]
        .as_str()
        .unwrap()
        .to_owned();
    let event_uri = format!("/stories/{id}/events/{eid}");

    let (_, before, _) = send(&app, Method::GET, &format!("/stories/{id}/layout"), None, None).await;
    let (status, bytes, etag) = send(
        &app,
        Method::PATCH,
        &event_uri,
        Some(json!({"designation": "Symptom", "title": "Tired all the time"})),
        Some(1),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
    assert_eq!(etag.as_deref(), Some("\"2\""));
    let patched = json_of(&bytes);
    assert_eq!(patched["revision"], 2);
    let (_, after, _) = send(&app, Method::GET, &format!("/stories/{id}/layout"), None, None).await;
    assert_ne!(before, after);
    assert!(String::from_utf8(after).unwrap().contains("Tired all the time"));

    let (status, bytes, _) = send(
        &app,
        Method::PATCH,
        &event_uri,
        Some(json!({"title": "x"})),
        Some(1),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(json_of(&bytes)["revision"], 2);

    let (status, bytes, _) = send(
        &app,
        Method::PATCH,
        &event_uri,
        Some(json!({"designation": "LifeEvent"})),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json_of(&bytes)["violations"][0]["rule"], "life-concern-coupling");

    let (status, _, _) = send(
        &app,
        Method::PATCH,
        &event_uri,
        Some(json!({"designation": "Surgery"})),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, bytes, _) = send(
        &app,
        Method::POST,
        &format!("/stories/{id}/events"),
        Some(json!({
            "title": "Started running",
            "designation": "LifeEvent",
            "specificConcern": "LifeConcern",
            "start": {"kind": "date", "date": "2022-05-01", "precision": "month", "origin": "absolute"},
            "end": {"kind": "current"}
        })),
        Some(2),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&bytes));
    let added = json_of(&bytes);
    assert_eq!(added["revision"], 3);
    let new_id = added["story"]["events"].as_array().unwrap().last().unwrap()["id"]
        .as_str()
        .unwrap()
        .to_owned();
    let (_, svg, _) = send(
        &app,
        Method::GET,
        &format!("/stories/{id}/artifact.svg"),
        None,
        None,
    )
    .await;
    assert!(String::from_utf8(svg)
        .unwrap()
        .contains(&format!("id=\"event-{new_id}\"")));

    let (status, bytes, _) = send(&app, Method::DELETE, &event_uri, None, Some(3)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&bytes)["revision"], 4);
    let (status, _, _) = send(&app, Method::GET, &event_uri, None, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _, _) = send(&app, Method::DELETE, &event_uri, None, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unknown_ids_are_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state_in(dir.path()));
    for uri in [
        "/stories/nope",
        "/stories/nope/layout",
        "/stories/nope/artifact.svg",
        "/stories/nope/events/e1",
    ] {
        let (status, _, _) = send(&app, Method::GET, uri, None, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
    }
    let (status, _, _) = send(
        &app,
        Method::PATCH,
        "/stories/nope/events/e1",
        Some(json!({})),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, bytes, _) = send(&app, Method::GET, "/healthz", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&bytes)["status"], "ok");
}

#[tokio::test]
async fn records_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, story) = {
        let app = router(state_in(dir.path()));
        let record = create(&app, profile()).await;
        let id = record["id"].as_str().unwrap().to_owned();
        let eid = record["story"]["events"][0]["id"].as_str().unwrap().to_owned();
        send(
            &app,
            Method::PATCH,
            &format!("/stories/{id}/events/{eid}"),
            Some(json!({"notes": "edited"})),
            None,
        )
        .await;
        let (_, bytes, _) = send(&app, Method::GET, &format!("/stories/{id}"), None, None).await;
        (id, bytes)
    };
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(leftovers, [format!("{id}.json")]);

    let app = router(state_in(dir.path()));
    let (status, bytes, _) = send(&app, Method::GET, &format!("/stories/{id}"), None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, story);
    assert_eq!(json_of(&bytes)["revision"], 2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 8)]
async fn concurrent_appends_are_not_lost() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state_in(dir.path()));
    let record = create(&app, profile()).await;
    let id = record["id"].as_str().unwrap().to_owned();
    let eid = record["story"]["events"][0]["id"].as_str().unwrap().to_owned();
    let uri = format!("/stories/{id}/events/{eid}");

    let tasks: Vec<_> = (0..20)
        .map(|i| {
            let (app, uri) = (app.clone(), uri.clone());
            tokio::spawn(async move {
                let mut conflicts = 0;
                loop {
                    let (_, bytes, etag) = send(&app, Method::GET, &uri, None, None).await;
                    let rev: u64 = etag.unwrap().trim_matches('"').parse().unwrap();
                    let notes = format!("{} [{i}]", json_of(&bytes)["notes"].as_str().unwrap());
                    let (status, _, _) = send(
                        &app,
                        Method::PATCH,
                        &uri,
                        Some(json!({"notes": notes})),
                        Some(rev),
                    )
                    .await;
                    match status {
                        StatusCode::OK => return conflicts,
                        StatusCode::CONFLICT => conflicts += 1,
                        s => panic!("unexpected {s}"),
                    }
                }
            })
        })
        .collect();
    for t in tasks {
        t.await.unwrap();
    }
    let (_, bytes, etag) = send(&app, Method::GET, &uri, None, None).await;
    assert_eq!(etag.as_deref(), Some("\"21\""));
    let notes = json_of(&bytes)["notes"].as_str().unwrap().to_owned();
    for i in 0..20 {
        assert!(notes.contains(&format!("[{i}]")), "lost {i}: {notes}");
    }
}
