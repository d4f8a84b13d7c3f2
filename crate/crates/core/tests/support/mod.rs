//! Random inputs and brute-force reference implementations shared by the
//! core tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use chrono::{Datelike, Duration, NaiveDate};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use storyline_core::cluster::DatedValue;
use storyline_core::layout::{draft_layout, split_ratio_candidates, LayoutConfig, PackItem};
use storyline_core::{
    group_events, DateOrigin, DateValue, Designation, Event, EventEnd, HealthStory, Precision,
    SpecificConcern, TimeValue,
};

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

const WORDS: [&str; 16] = [
    "visit",
    "pain",
    "scan",
    "clinic",
    "flare",
    "dose",
    "follow-up",
    "results",
    "rest",
    "therapy",
    "doctor",
    "review",
    "x-ray",
    "relief",
    "night",
    "checkup",
];

const CONCERNS: [(&str, Option<&str>); 6] = [
    ("Asthma", Some("Respiratory")),
    ("Diabetes", Some("Metabolic")),
    ("Thyroid", Some("Metabolic")),
    ("Migraines", Some("Neurological")),
    ("Knee injury", None),
    ("Depression", None),
];

fn words(rng: &mut StdRng, lo: usize, hi: usize) -> String {
    let n = rng.gen_range(lo..=hi);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_date(rng: &mut StdRng, anchors: &[NaiveDate], dob: NaiveDate) -> TimeValue {
    let anchor = *anchors.choose(rng).unwrap();
    let day = anchor + Duration::days(rng.gen_range(-400..=400));
    let day = day.max(dob + Duration::days(1)).min(ymd(2025, 1, 1));
    if rng.gen_bool(0.1) {
        let age = u32::try_from(day.year() - dob.year()).unwrap().max(1);
        return TimeValue::Date(DateValue::at_age(age, Some(dob)));
    }
    TimeValue::Date(match rng.gen_range(0..3) {
        0 => DateValue::day(day),
        1 => DateValue::month(day.year(), day.month()).unwrap(),
        _ => DateValue::year(day.year()).unwrap(),
    })
}

fn later_date(rng: &mut StdRng, start: NaiveDate) -> TimeValue {
    let d = (start + Duration::days(rng.gen_range(0..=1200)))
        .min(ymd(2025, 1, 1))
        .max(start);
    TimeValue::Date(DateValue::day(d))
}

/// A valid story with up to `max_events` events. Dates gather around one to
/// three anchor years so that stories have both dense periods and gaps.
pub fn random_story(rng: &mut StdRng, max_events: usize) -> HealthStory {
    let dob = ymd(
        rng.gen_range(1950..=1995),
        rng.gen_range(1..=12),
        rng.gen_range(1..=28),
    );
    let anchors: Vec<NaiveDate> = (0..rng.gen_range(1..=3))
        .map(|_| ymd(rng.gen_range(dob.year() + 3..=2024), rng.gen_range(1..=12), 1))
        .collect();
    let n = rng.gen_range(0..=max_events);
    let mut story = HealthStory::new(words(rng, 1, 2), Some(dob));
    let mut index = 0u32;
    for i in 0..n {
        index += rng.gen_range(1..=3);
        let designation = *Designation::ALL.choose(rng).unwrap();
        let (specific, broad) = if designation == Designation::LifeEvent {
            (SpecificConcern::LifeConcern, None)
        } else if rng.gen_bool(0.2) {
            (SpecificConcern::Other, None)
        } else {
            let (s, b) = *CONCERNS.choose(rng).unwrap();
            (SpecificConcern::Named(s.into()), b.map(str::to_owned))
        };
        let start = match rng.gen_range(0..100) {
            0..=14 => TimeValue::Unspecified,
            15..=24 => TimeValue::Early,
            25..=32 => TimeValue::Current,
            _ => random_date(rng, &anchors, dob),
        };
        let end = match start {
            TimeValue::Current => {
                if rng.gen_bool(0.5) {
                    TimeValue::Current
                } else {
                    TimeValue::Unspecified
                }
            }
            TimeValue::Date(d) => match rng.gen_range(0..10) {
                0..=4 => TimeValue::Unspecified,
                5..=6 => TimeValue::Current,
                7 => start,
                _ => later_date(rng, d.date.unwrap()),
            },
            _ => match rng.gen_range(0..10) {
                0..=5 => TimeValue::Unspecified,
                6..=7 => TimeValue::Current,
                _ => random_date(rng, &anchors, dob),
            },
        };
        story.events.push(Event {
            id: format!("e{}", i + 1),
            title: words(rng, 1, 6),
            notes: words(rng, 0, 30),
            designation,
            specific_concern: specific,
            broad_concern: broad,
            start,
            end,
            narrative_index: index,
        });
    }
    story
}

/// Up to `max` dated values spread over a random span, duplicates included.
pub fn random_dated_values(rng: &mut StdRng, max: usize) -> Vec<DatedValue> {
    let n = rng.gen_range(0..=max);
    let base = ymd(2000, 1, 1);
    let span_days = *[0, 30, 400, 900, 3650, 9000, 20000].choose(rng).unwrap();
    let mut out = Vec::new();
    for i in 0..n {
        let date = if i > 0 && rng.gen_bool(0.15) {
            out.iter().map(|d: &DatedValue| d.date).collect::<Vec<_>>()[rng.gen_range(0..i)]
        } else {
            base + Duration::days(rng.gen_range(0..=span_days))
        };
        out.push(DatedValue {
            event_id: format!("e{i}"),
            which: if rng.gen_bool(0.5) {
                EventEnd::Start
            } else {
                EventEnd::End
            },
            date,
        });
    }
    out
}

/// Textbook DBSCAN over all pairs: normalized axis `[0, 100]`,
/// `eps = min(30, 250 / span_years)`, `minPts = 1`. Returns clusters as sets
/// of input indices, ordered by earliest date.
pub fn reference_dbscan(dates: &[NaiveDate]) -> Vec<BTreeSet<usize>> {
    if dates.is_empty() {
        return Vec::new();
    }
    let days: Vec<f64> = dates.iter().map(|d| f64::from(d.num_days_from_ce())).collect();
    let lo = days.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = days.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let pos: Vec<f64> = days
        .iter()
        .map(|d| if span == 0.0 { 0.0 } else { (d - lo) / span * 100.0 })
        .collect();
    let span_years = span / 365.25;
    let eps = if span_years > 0.0 {
        f64::min(30.0, 250.0 / span_years)
    } else {
        30.0
    };

    let n = pos.len();
    let pos = &pos;
    let neighbours = |i: usize| (0..n).filter(move |&j| (pos[i] - pos[j]).abs() <= eps);
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<BTreeSet<usize>> = Vec::new();
    for i in 0..n {
        if label[i].is_some() {
            continue;
        }
        let c = clusters.len();
        let mut set = BTreeSet::new();
        let mut stack = vec![i];
        label[i] = Some(c);
        while let Some(p) = stack.pop() {
            set.insert(p);
            for q in neighbours(p) {
                if label[q].is_none() {
                    label[q] = Some(c);
                    stack.push(q);
                }
            }
        }
        clusters.push(set);
    }
    clusters.sort_by_key(|s| s.iter().map(|&i| dates[i]).min());
    clusters
}

/// First fit, checking every placed item pairwise instead of tracking the
/// rightmost edge per lane.
pub fn reference_first_fit(items: &[PackItem<f64>], padding: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[a]
            .left
            .partial_cmp(&items[b].left)
            .unwrap()
            .then(items[a].narrative_index.cmp(&items[b].narrative_index))
            .then(a.cmp(&b))
    });
    let mut lanes: Vec<Vec<usize>> = Vec::new();
    for i in order {
        let it = &items[i];
        let fits = |lane: &Vec<usize>| {
            lane.iter().all(|&j| {
                let o = &items[j];
                it.left >= o.right + padding || o.left >= it.right + padding
            })
        };
        match lanes.iter().position(fits) {
            Some(k) => lanes[k].push(i),
            None => lanes.push(vec![i]),
        }
    }
    lanes
}

pub fn random_items(rng: &mut StdRng, max: usize) -> Vec<PackItem<f64>> {
    let n = rng.gen_range(0..=max);
    (0..n)
        .map(|i| {
            let left = f64::from(rng.gen_range(0..200)) * 5.0;
            let width = f64::from(rng.gen_range(0..40)) * 5.0;
            PackItem {
                left,
                right: left + width,
                narrative_index: if rng.gen_bool(0.2) {
                    0
                } else {
                    u32::try_from(i).unwrap()
                },
            }
        })
        .collect()
}

/// Lowest total height over the candidate ratios, re-evaluated one by one.
pub fn exhaustive_min_height(story: &HealthStory, config: &LayoutConfig<f64>) -> (f64, f64) {
    let groups = group_events::<f64>(&story.events);
    let mut best = (f64::INFINITY, f64::NAN);
    for r in split_ratio_candidates::<f64>() {
        let h = draft_layout(&story.events, &groups, config, r).total_height;
        if h < best.0 {
            best = (h, r);
        }
    }
    best
}

/// Number of start/end values per time group must add up to twice the event
/// count, and every value must sit in exactly one group.
pub fn time_partition_holds(story: &HealthStory) -> Result<(), String> {
    let g = group_events::<f64>(&story.events).time;
    let total = g.value_count();
    if total != 2 * story.events.len() {
        return Err(format!("{total} values for {} events", story.events.len()));
    }
    let mut seen: HashMap<(String, EventEnd), usize> = HashMap::new();
    let all = g
        .unspecified
        .iter()
        .chain(&g.early)
        .chain(&g.current)
        .map(|v| (v.event_id.clone(), v.which))
        .chain(
            g.clusters
                .iter()
                .flat_map(|c| c.members.iter().map(|m| (m.event_id.clone(), m.which))),
        );
    for key in all {
        *seen.entry(key).or_default() += 1;
    }
    for e in &story.events {
        for which in [EventEnd::Start, EventEnd::End] {
            if seen.get(&(e.id.clone(), which)) != Some(&1) {
                return Err(format!("{} {which:?} is not in exactly one group", e.id));
            }
        }
    }
    Ok(())
}

/// Every event sits in exactly one specific group; Other and LifeConcern
/// events only in their own groups.
pub fn concern_partition_holds(story: &HealthStory) -> Result<(), String> {
    let groups = group_events::<f64>(&story.events).concerns;
    let mut count: HashMap<&str, usize> = HashMap::new();
    for track in groups.tracks() {
        for id in &track.event_ids {
            let e = story.event(id).ok_or_else(|| format!("unknown id {id}"))?;
            let ok = match (&track.kind, &e.specific_concern) {
                (storyline_core::TrackKind::Other, SpecificConcern::Other) => true,
                (storyline_core::TrackKind::Life, SpecificConcern::LifeConcern) => true,
                (
                    storyline_core::TrackKind::Broad | storyline_core::TrackKind::Standalone,
                    SpecificConcern::Named(n),
                ) => *n == track.label,
                _ => false,
            };
            if !ok {
                return Err(format!("{id} is in track {:?}", track.label));
            }
            *count.entry(e.id.as_str()).or_default() += 1;
        }
    }
    for e in &story.events {
        if count.get(e.id.as_str()) != Some(&1) {
            return Err(format!("{} is not in exactly one track", e.id));
        }
    }
    Ok(())
}

pub fn relative_age_count(story: &HealthStory) -> usize {
    story
        .events
        .iter()
        .flat_map(|e| [e.start, e.end])
        .filter(|v| matches!(v, TimeValue::Date(d) if matches!(d.origin, DateOrigin::RelativeAge { .. })))
        .count()
}

pub fn precision_of(v: &TimeValue) -> Option<Precision> {
    v.date_value().map(|d| d.precision)
}
