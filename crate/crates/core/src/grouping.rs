//! Concern Groups and Time Groups derived from an event list.

use std::collections::HashMap;

use serde::Serialize;

use crate::cluster::{cluster_dates, DatedValue, TemporalCluster};
use crate::model::{Event, EventEnd, SpecificConcern, TimeValue};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpecificGroup {
    pub name: String,
    pub event_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BroadGroup {
    pub name: String,
    pub specifics: Vec<SpecificGroup>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConcernGroups {
    pub broad: Vec<BroadGroup>,
    pub standalone: Vec<SpecificGroup>,
    pub other: Option<Vec<String>>,
    pub life: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TrackKind {
    Broad,
    Standalone,
    Other,
    Life,
}

/// One horizontal track: a specific group, or the Other / LifeConcern group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrackSpec {
    pub kind: TrackKind,
    pub label: String,
    pub broad: Option<String>,
    pub event_ids: Vec<String>,
}

impl ConcernGroups {
    /// Tracks top to bottom: broad groups, standalone groups, Other, LifeConcern.
    pub fn tracks(&self) -> Vec<TrackSpec> {
        let mut out = Vec::new();
        for b in &self.broad {
            for s in &b.specifics {
                out.push(TrackSpec {
                    kind: TrackKind::Broad,
                    label: s.name.clone(),
                    broad: Some(b.name.clone()),
                    event_ids: s.event_ids.clone(),
                });
            }
        }
        for s in &self.standalone {
            out.push(TrackSpec {
                kind: TrackKind::Standalone,
                label: s.name.clone(),
                broad: None,
                event_ids: s.event_ids.clone(),
            });
        }
        if let Some(ids) = &self.other {
            out.push(TrackSpec {
                kind: TrackKind::Other,
                label: SpecificConcern::OTHER.into(),
                broad: None,
                event_ids: ids.clone(),
            });
        }
        if let Some(ids) = &self.life {
            out.push(TrackSpec {
                kind: TrackKind::Life,
                label: SpecificConcern::LIFE_CONCERN.into(),
                broad: None,
                event_ids: ids.clone(),
            });
        }
        out
    }

    pub fn event_count(&self) -> usize {
        self.tracks().iter().map(|t| t.event_ids.len()).sum()
    }
}

fn narrative_order(events: &[Event]) -> Vec<&Event> {
    let mut sorted: Vec<&Event> = events.iter().collect();
    sorted.sort_by_key(|e| e.narrative_index);
    sorted
}

/// Groups events by specific concern, nesting specific groups under a shared
/// broad concern.
///
/// A specific group takes the broad concern of its earliest event that has
/// one. Groups at each level are ordered by their earliest narrative index.
pub fn build_concern_groups(events: &[Event]) -> ConcernGroups {
    struct Acc {
        first: u32,
        broad: Option<String>,
        ids: Vec<String>,
    }

    let mut other = Vec::new();
    let mut life = Vec::new();
    let mut specifics: Vec<(String, Acc)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for e in narrative_order(events) {
        let name = match &e.specific_concern {
            SpecificConcern::Other => {
                other.push(e.id.clone());
                continue;
            }
            SpecificConcern::LifeConcern => {
                life.push(e.id.clone());
                continue;
            }
            SpecificConcern::Named(name) => name,
        };
        let slot = *index.entry(name.clone()).or_insert_with(|| {
            specifics.push((
                name.clone(),
                Acc {
                    first: e.narrative_index,
                    broad: None,
                    ids: Vec::new(),
                },
            ));
            specifics.len() - 1
        });
        let acc = &mut specifics[slot].1;
        acc.ids.push(e.id.clone());
        if acc.broad.is_none() {
            acc.broad = e
                .broad_concern
                .as_ref()
                .map(|b| b.trim())
                .filter(|b| !b.is_empty())
                .map(str::to_string);
        }
    }

    let mut broad: Vec<(u32, BroadGroup)> = Vec::new();
    let mut standalone = Vec::new();
    for (name, acc) in specifics {
        let group = SpecificGroup {
            name,
            event_ids: acc.ids,
        };
        match acc.broad {
            None => standalone.push(group),
            Some(b) => match broad.iter_mut().find(|(_, g)| g.name == b) {
                Some((_, g)) => g.specifics.push(group),
                None => broad.push((
                    acc.first,
                    BroadGroup {
                        name: b,
                        specifics: vec![group],
                    },
                )),
            },
        }
    }
    // Specific groups were created in narrative order, so the first one seen
    // for each broad group carries its earliest index.
    broad.sort_by_key(|(first, _)| *first);

    ConcernGroups {
        broad: broad.into_iter().map(|(_, g)| g).collect(),
        standalone,
        other: (!other.is_empty()).then_some(other),
        life: (!life.is_empty()).then_some(life),
    }
}

/// Reference to one start or end value of an event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValueRef {
    pub event_id: String,
    pub which: EventEnd,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TimeGroups {
    pub unspecified: Vec<ValueRef>,
    pub early: Vec<ValueRef>,
    pub current: Vec<ValueRef>,
    pub clusters: Vec<TemporalCluster>,
}

/// Which time group a single value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeSlot {
    Unspecified,
    Early,
    Cluster(usize),
    Current,
}

impl TimeGroups {
    pub fn value_count(&self) -> usize {
        self.unspecified.len()
            + self.early.len()
            + self.current.len()
            + self.clusters.iter().map(|c| c.members.len()).sum::<usize>()
    }

    /// Lookup table from value to its group.
    pub fn slots(&self) -> HashMap<ValueRef, TimeSlot> {
        let mut map = HashMap::new();
        for (list, slot) in [
            (&self.unspecified, TimeSlot::Unspecified),
            (&self.early, TimeSlot::Early),
            (&self.current, TimeSlot::Current),
        ] {
            for v in list {
                map.insert(v.clone(), slot);
            }
        }
        for (k, c) in self.clusters.iter().enumerate() {
            for m in &c.members {
                map.insert(
                    ValueRef {
                        event_id: m.event_id.clone(),
                        which: m.which,
                    },
                    TimeSlot::Cluster(k),
                );
            }
        }
        map
    }
}

/// Every dated value in narrative order; unresolved relative ages are skipped.
pub fn dated_values(events: &[Event]) -> Vec<DatedValue> {
    narrative_order(events)
        .into_iter()
        .flat_map(|e| {
            e.ends().into_iter().filter_map(|(which, v)| {
                v.resolved_date().map(|date| DatedValue {
                    event_id: e.id.clone(),
                    which,
                    date,
                })
            })
        })
        .collect()
}

/// Routes each start and end value to its time group, clustering the dated
/// ones.
///
/// Relative ages that could not be resolved carry no calendar position and go
/// to the unspecified group.
pub fn assign_time_groups<S: Scalar>(events: &[Event]) -> TimeGroups {
    let mut groups = TimeGroups::default();
    for e in narrative_order(events) {
        for (which, value) in e.ends() {
            let r = ValueRef {
                event_id: e.id.clone(),
                which,
            };
            match value {
                TimeValue::Unspecified => groups.unspecified.push(r),
                TimeValue::Early => groups.early.push(r),
                TimeValue::Current => groups.current.push(r),
                TimeValue::Date(d) if d.date.is_none() => groups.unspecified.push(r),
                TimeValue::Date(_) => {}
            }
        }
    }
    groups.clusters = cluster_dates::<S>(&dated_values(events));
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupedStory {
    pub concerns: ConcernGroups,
    pub time: TimeGroups,
}

pub fn group_events<S: Scalar>(events: &[Event]) -> GroupedStory {
    GroupedStory {
        concerns: build_concern_groups(events),
        time: assign_time_groups::<S>(events),
    }
}
