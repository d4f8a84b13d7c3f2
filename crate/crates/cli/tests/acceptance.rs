//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use storyline_core::cluster::{cluster_dates, compute_eps, DatedValue};
use storyline_core::layout::{pack_track, single_timescale_layout, timeline_layout};
use storyline_core::narrative::ParserConfig;
use storyline_core::temporal::{Corpus, Lexicon};
use storyline_core::{
    deserialize_story, group_events, layout_story, render_story, render_svg, serialize_story, HealthStory,
    LayoutConfig, StyleConfig,
};
use storyline_service::{router, AppState, Store};
use support::{
    concern_partition_holds, exhaustive_min_height, random_dated_values, random_items, random_story,
    reference_dbscan, reference_first_fit, time_partition_holds,
};

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn fixture(name: &str) -> HealthStory {
    let text = std::fs::read_to_string(fixtures().join(format!("stories/{name}.json"))).unwrap();
    deserialize_story(&text).unwrap()
}

fn check(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn eps_values() -> Outcome {
    let t = Instant::now();
    for (span, want) in [(2.5, 30.0), (10.0, 25.0), (50.0, 5.0)] {
        let got = compute_eps(span);
        check(got == want, || {
            format!("compute_eps({span}) = {got}, want {want}")
        })?;
    }
    let mut rng = StdRng::seed_from_u64(1);
    let mut spans: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..120.0)).collect();
    spans.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in spans.windows(2) {
        let (a, b) = (compute_eps(w[0]), compute_eps(w[1]));
        check(b <= a, || {
            format!("eps rises from {a} at {} to {b} at {}", w[0], w[1])
        })?;
    }
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "exact at 2.5/10/50 years, monotone over 1000 spans, {:.2?}",
        t.elapsed()
    ))
}

fn as_index_sets(values: &[DatedValue]) -> Vec<BTreeSet<usize>> {
    cluster_dates::<f64>(values)
        .iter()
        .map(|c| {
            c.members
                .iter()
                .map(|m| values.iter().position(|v| v == m).unwrap())
                .collect()
        })
        .collect()
}

fn dbscan_reference() -> Outcome {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    for case in 0..500 {
        let values = random_dated_values(&mut rng, 15);
        let dates: Vec<_> = values.iter().map(|v| v.date).collect();
        let (got, want) = (as_index_sets(&values), reference_dbscan(&dates));
        check(got == want, || {
            format!("case {case}: {got:?} vs reference {want:?} for {dates:?}")
        })?;
    }
    within(t.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "500 inputs match brute-force DBSCAN, {:.2?}",
        t.elapsed()
    ))
}

fn ratio_search() -> Outcome {
    let t = Instant::now();
    let config = LayoutConfig::default();
    let mut rng = StdRng::seed_from_u64(3);
    for case in 0..100 {
        let story = random_story(&mut rng, 40);
        let groups = group_events::<f64>(&story.events);
        let got = timeline_layout(&story, &groups, &config);
        let (best, ratio) = exhaustive_min_height(&story, &config);
        check(got.total_height == best && got.split_ratio == ratio, || {
            format!(
                "case {case}: height {} at r={}, minimum {best} at r={ratio}",
                got.total_height, got.split_ratio
            )
        })?;
    }
    within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "100 stories at the minimum over 9 ratios, {:.2?}",
        t.elapsed()
    ))
}

fn multi_vs_single() -> Outcome {
    let config = LayoutConfig::default();
    let heights = |story: &HealthStory| {
        let groups = group_events::<f64>(&story.events);
        (
            timeline_layout(story, &groups, &config).total_height,
            single_timescale_layout(story, &groups, &config).total_height,
        )
    };
    let (multi, single) = heights(&fixture("two_periods"));
    check(multi < single, || {
        format!("two periods: multi {multi} is not below single {single}")
    })?;
    let (m1, s1) = heights(&fixture("single_period"));
    check(m1 == s1, || {
        format!("single period: multi {m1} differs from single {s1}")
    })?;
    Ok(format!(
        "two periods {multi} < {single}; single period {m1} = {s1}"
    ))
}

fn packing() -> Outcome {
    let t = Instant::now();
    let padding = 8.0;
    let mut rng = StdRng::seed_from_u64(5);
    for case in 0..500 {
        let items = random_items(&mut rng, 30);
        let lanes = pack_track(&items, padding);
        for lane in &lanes {
            let mut spans: Vec<(f64, f64)> = lane.iter().map(|&i| (items[i].left, items[i].right)).collect();
            spans.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in spans.windows(2) {
                check(w[1].0 - w[0].1 >= padding, || {
                    format!("case {case}: {:?} and {:?} overlap", w[0], w[1])
                })?;
            }
        }
        let want = reference_first_fit(&items, padding);
        check(lanes == want, || {
            format!("case {case}: {lanes:?} vs reference {want:?}")
        })?;
    }
    within(t.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "500 tracks, no overlap, equal to brute-force first fit, {:.2?}",
        t.elapsed()
    ))
}

fn partitions() -> Outcome {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(6);
    for case in 0..500 {
        let story = random_story(&mut rng, 40);
        time_partition_holds(&story).map_err(|e| format!("case {case}: time partition: {e}"))?;
        concern_partition_holds(&story).map_err(|e| format!("case {case}: concern partition: {e}"))?;
    }
    within(t.elapsed(), Duration::from_secs(5))?;
    Ok(format!("500 stories, both partitions hold, {:.2?}", t.elapsed()))
}

fn temporal_corpus() -> Outcome {
    let t = Instant::now();
    let text = std::fs::read_to_string(fixtures().join("temporal_corpus.tsv")).unwrap();
    let corpus = Corpus::parse(&text)?;
    check(corpus.cases.len() >= 40, || {
        format!("only {} expressions", corpus.cases.len())
    })?;
    let misses = corpus.misses(Lexicon::bundled());
    check(misses.is_empty(), || {
        let first = &misses[0];
        format!(
            "{} of {} wrong, first {:?}: {} vs {}",
            misses.len(),
            corpus.cases.len(),
            first.expression,
            first.actual,
            first.expected
        )
    })?;
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "{}/{} expressions, {:.2?}",
        corpus.cases.len(),
        corpus.cases.len(),
        t.elapsed()
    ))
}

fn determinism() -> Outcome {
    let config = LayoutConfig::default();
    let style = StyleConfig::default();
    let mut rng = StdRng::seed_from_u64(8);
    for case in 0..500 {
        let story = random_story(&mut rng, 40);
        let doc = serialize_story(&story);
        let back = deserialize_story(&doc).map_err(|e| format!("case {case}: {e}"))?;
        check(back == story, || {
            format!("case {case}: story changed in a round trip")
        })?;
        check(serialize_story(&back) == doc, || {
            format!("case {case}: document bytes changed")
        })?;
        if case % 5 == 0 {
            let layout = layout_story(&story, &config);
            let a = render_svg(&layout, &story, &style).map_err(|e| e.to_string())?;
            let b = render_svg(&layout_story(&story, &config), &story, &style).map_err(|e| e.to_string())?;
            check(a == b, || format!("case {case}: two renders differ"))?;
        }
    }
    for name in ["fig2", "two_periods", "single_period"] {
        let (_, svg) = render_story(&fixture(name), &config, &style).map_err(|e| e.to_string())?;
        let golden = std::fs::read_to_string(fixtures().join(format!("golden/{name}.svg"))).unwrap();
        check(svg == golden, || format!("{name} differs from its golden SVG"))?;
    }
    Ok("500 round trips, 100 double renders, 3 goldens".into())
}

async fn send(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
    if_match: Option<u64>,
) -> (StatusCode, Value, u64) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(rev) = if_match {
        req = req.header(header::IF_MATCH, format!("\"{rev}\""));
    }
    let req = req
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = tower::ServiceExt::oneshot(app.clone(), req).await.unwrap();
    let status = resp.status();
    let rev = resp
        .headers()
        .get(header::ETAG)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim_matches('"').parse().ok())
        .unwrap_or(0);
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value =
        serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value, rev)
}

fn app_in(dir: &std::path::Path) -> Router {
    let store = Store::open(dir, LayoutConfig::default(), StyleConfig::default()).unwrap();
    let parser = ParserConfig::new(chrono::NaiveDate::from_ymd_opt(2025, 1, 1).unwrap());
    router(AppState::new(store, parser, None))
}

async fn service_flow() -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let app = app_in(dir.path());
    let narrative = std::fs::read_to_string(fixtures().join("narrative_12.txt")).unwrap();
    let (status, record, _) = send(
        &app,
        Method::POST,
        "/stories",
        Some(json!({"name": "Ada", "dateOfBirth": "1990-06-15", "narrative": narrative})),
        None,
    )
    .await;
    check(status == StatusCode::CREATED, || {
        format!("create returned {status}: {record}")
    })?;
    let id = record["id"].as_str().unwrap().to_owned();
    check(record["revision"] == 1, || {
        "new record is not at revision 1".into()
    })?;
    let eid = record["story"]["events"][0]["id"].as_str().unwrap().to_owned();
    let event_uri = format!("/stories/{id}/events/{eid}");
    let layout_uri = format!("/stories/{id}/layout");

    let (_, before, _) = send(&app, Method::GET, &layout_uri, None, None).await;
    let (status, patched, rev) = send(
        &app,
        Method::PATCH,
        &event_uri,
        Some(json!({"title": "Wheezing every winter"})),
        Some(1),
    )
    .await;
    check(status == StatusCode::OK && rev == 2, || {
        format!("patch returned {status} at revision {rev}")
    })?;
    check(patched["revision"] == 2, || {
        "patched record is not at revision 2".into()
    })?;
    let (_, after, _) = send(&app, Method::GET, &layout_uri, None, None).await;
    check(
        before != after && after.to_string().contains("Wheezing every winter"),
        || "layout does not reflect the patch".into(),
    )?;

    let (_, story_before, _) = send(&app, Method::GET, &format!("/stories/{id}"), None, None).await;
    drop(app);
    let app = app_in(dir.path());
    let (status, story_after, _) = send(&app, Method::GET, &format!("/stories/{id}"), None, None).await;
    check(status == StatusCode::OK && story_before == story_after, || {
        "record changed across a restart".into()
    })?;

    let (_, _, base) = send(&app, Method::GET, &event_uri, None, None).await;
    let racers: Vec<_> = (0..50)
        .map(|i| {
            let (app, uri) = (app.clone(), event_uri.clone());
            tokio::spawn(async move {
                send(
                    &app,
                    Method::PATCH,
                    &uri,
                    Some(json!({"notes": format!("racer {i}")})),
                    Some(base),
                )
                .await
                .0
            })
        })
        .collect();
    let mut wins = 0;
    for r in racers {
        match r.await.map_err(|e| e.to_string())? {
            StatusCode::OK => wins += 1,
            StatusCode::CONFLICT => {}
            s => return Err(format!("racing patch returned {s}")),
        }
    }
    check(wins == 1, || {
        format!("{wins} of 50 patches against revision {base} succeeded")
    })?;

    let appenders: Vec<_> = (0..50)
        .map(|i| {
            let (app, uri) = (app.clone(), event_uri.clone());
            tokio::spawn(async move {
                let mut conflicts = 0u32;
                loop {
                    let (_, event, rev) = send(&app, Method::GET, &uri, None, None).await;
                    let notes = format!("{} <{i}>", event["notes"].as_str().unwrap_or_default());
                    match send(
                        &app,
                        Method::PATCH,
                        &uri,
                        Some(json!({"notes": notes})),
                        Some(rev),
                    )
                    .await
                    .0
                    {
                        StatusCode::OK => return Ok(conflicts),
                        StatusCode::CONFLICT => conflicts += 1,
                        s => return Err(format!("append returned {s}")),
                    }
                }
            })
        })
        .collect();
    let mut conflicts = 0;
    for a in appenders {
        conflicts += a.await.map_err(|e| e.to_string())??;
    }
    let (_, event, rev) = send(&app, Method::GET, &event_uri, None, None).await;
    let notes = event["notes"].as_str().unwrap_or_default();
    let lost: Vec<usize> = (0..50).filter(|i| !notes.contains(&format!("<{i}>"))).collect();
    check(lost.is_empty(), || format!("lost updates {lost:?}"))?;
    check(rev == base + 1 + 50, || {
        format!("revision {rev}, expected {}", base + 51)
    })?;
    within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "revision 1 -> 2 with patched layout, restart keeps record, 1/50 racers win, 50 appends kept after {conflicts} conflicts, {:.2?}",
        t.elapsed()
    ))
}

fn hundred_events() -> HealthStory {
    let mut rng = StdRng::seed_from_u64(10);
    loop {
        let story = random_story(&mut rng, 100);
        if story.events.len() == 100 {
            return story;
        }
    }
}

fn render_speed() -> Outcome {
    let story = hundred_events();
    let config = LayoutConfig::default();
    let style = StyleConfig::default();
    render_story(&story, &config, &style).map_err(|e| e.to_string())?;
    let mut worst = Duration::ZERO;
    for _ in 0..5 {
        let t = Instant::now();
        render_story(&story, &config, &style).map_err(|e| e.to_string())?;
        worst = worst.max(t.elapsed());
    }
    within(worst, Duration::from_millis(100))?;
    Ok(format!("100 events, slowest of 5 runs {worst:.2?}"))
}

fn run(number: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    match &outcome {
        Ok(detail) => println!("PASS [{number:>2}] {name}: {detail}"),
        Err(reason) => println!("FAIL [{number:>2}] {name}: {reason}"),
    }
    outcome.is_ok()
}

fn main() {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(8)
        .enable_all()
        .build()
        .unwrap();
    let results = [
        run(1, "eps schedule", eps_values),
        run(2, "clustering vs brute-force DBSCAN", dbscan_reference),
        run(3, "split-ratio search is optimal", ratio_search),
        run(4, "multi- vs single-timescale height", multi_vs_single),
        run(5, "lane packing", packing),
        run(6, "time and concern partitions", partitions),
        run(7, "temporal expression corpus", temporal_corpus),
        run(8, "codec identity and render determinism", determinism),
        run(9, "service create/patch/restart/concurrency", || {
            runtime.block_on(service_flow())
        }),
        run(10, "layout and render of 100 events", render_speed),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
