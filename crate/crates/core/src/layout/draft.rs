use std::collections::HashMap;

use super::pack::{pack_track, PackItem};
use super::text::{char_count, wrap};
use super::{
    InfoBoxGeometry, LaneGeometry, LayoutConfig, LayoutGeometry, LayoutMode, LinearScale, Marker, Segment,
    SegmentKind, TrackGeometry,
};
use crate::grouping::{GroupedStory, TimeSlot, ValueRef};
use crate::model::{Event, EventEnd, TimeValue};
use crate::scalar::{self, Scalar};

/// Widths of the temporal segments for split ratio `ratio`.
///
/// Each non-empty segment gets its share of the value count, raised to
/// `min_segment_width`, and the result is rescaled to fill `width * (1 - ratio)`.
/// Empty segments get width zero and are not drawn. All-zero counts give all
/// zero widths.
pub fn allocate_segment_widths<S: Scalar>(
    counts: &[usize],
    width: S,
    ratio: S,
    min_segment_width: S,
) -> Vec<S> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![S::zero(); counts.len()];
    }
    let temporal = width * (S::one() - ratio);
    let total_s = S::from_count(total);
    let raw: Vec<S> = counts
        .iter()
        .map(|&c| {
            if c == 0 {
                S::zero()
            } else {
                scalar::max(min_segment_width, S::from_count(c) / total_s * temporal)
            }
        })
        .collect();
    let sum = raw.iter().fold(S::zero(), |a, &b| a + b);
    raw.into_iter().map(|w| w / sum * temporal).collect()
}

/// Position of one start/end value.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ValuePos<S> {
    /// On a Timescale, at a scaled x.
    Scaled { segment: usize, x: S },
    /// In a segment without an axis (No Time, Past, Present).
    Unscaled { segment: usize },
}

impl<S: Scalar> ValuePos<S> {
    fn segment(&self) -> usize {
        match *self {
            ValuePos::Scaled { segment, .. } | ValuePos::Unscaled { segment } => segment,
        }
    }
}

enum Placement<S> {
    Point(ValuePos<S>),
    Range(ValuePos<S>, ValuePos<S>),
}

struct SegmentIndex {
    no_time: Option<usize>,
    past: Option<usize>,
    clusters: Vec<Option<usize>>,
    present: Option<usize>,
}

impl SegmentIndex {
    fn of(&self, slot: TimeSlot) -> Option<usize> {
        match slot {
            TimeSlot::Unspecified => None,
            TimeSlot::Early => self.past,
            TimeSlot::Cluster(k) => self.clusters.get(k).copied().flatten(),
            TimeSlot::Current => self.present,
        }
    }
}

/// Lays out all tracks for one split ratio.
pub fn draft_layout<S: Scalar>(
    events: &[Event],
    groups: &GroupedStory,
    config: &LayoutConfig<S>,
    ratio: S,
) -> LayoutGeometry<S> {
    let width = config.width;
    let slots = groups.time.slots();
    let slot_of = |id: &str, which: EventEnd| {
        slots
            .get(&ValueRef {
                event_id: id.to_string(),
                which,
            })
            .copied()
            .unwrap_or(TimeSlot::Unspecified)
    };
    let undated = events.iter().any(|e| {
        slot_of(&e.id, EventEnd::Start) == TimeSlot::Unspecified
            && slot_of(&e.id, EventEnd::End) == TimeSlot::Unspecified
    });

    // Width by value count.
    let clusters = &groups.time.clusters;
    let mut counts = Vec::with_capacity(clusters.len() + 2);
    counts.push(groups.time.early.len());
    counts.extend(clusters.iter().map(|c| c.members.len()));
    counts.push(groups.time.current.len());
    let widths = allocate_segment_widths(&counts, width, ratio, config.min_segment_width);
    let any_temporal = counts.iter().any(|&c| c > 0);

    // Segment bounds.
    let mut segments: Vec<Segment<S>> = Vec::new();
    let mut index = SegmentIndex {
        no_time: None,
        past: None,
        clusters: vec![None; clusters.len()],
        present: None,
    };
    if !events.is_empty() && !any_temporal {
        index.no_time = Some(0);
        segments.push(Segment {
            kind: SegmentKind::NoTime,
            left: S::zero(),
            right: width,
            count: groups.time.unspecified.len(),
            scale: None,
        });
    } else if any_temporal {
        let start = width * ratio;
        if undated {
            index.no_time = Some(segments.len());
            segments.push(Segment {
                kind: SegmentKind::NoTime,
                left: S::zero(),
                right: start,
                count: groups.time.unspecified.len(),
                scale: None,
            });
        }
        let mut x = start;
        let last = counts.len() - 1;
        for (i, (&count, &w)) in counts.iter().zip(&widths).enumerate() {
            if count == 0 {
                continue;
            }
            let (left, right) = (x, x + w);
            x = right;
            let (kind, scale) = if i == 0 {
                index.past = Some(segments.len());
                (SegmentKind::Past, None)
            } else if i == last {
                index.present = Some(segments.len());
                (SegmentKind::Present, None)
            } else {
                let cluster = i - 1;
                index.clusters[cluster] = Some(segments.len());
                let inset = scalar::min(config.timescale_inset, w / S::lit(4.0));
                let c = &clusters[cluster];
                (
                    SegmentKind::Timescale { cluster },
                    Some(LinearScale {
                        domain_start: c.min_date,
                        domain_end: c.max_date,
                        range_start: left + inset,
                        range_end: right - inset,
                    }),
                )
            };
            segments.push(Segment {
                kind,
                left,
                right,
                count,
                scale,
            });
        }
    }

    let value_pos = |e: &Event, which: EventEnd, value: &TimeValue| -> Option<ValuePos<S>> {
        let segment = index.of(slot_of(&e.id, which))?;
        Some(match (&segments[segment].scale, value.resolved_date()) {
            (Some(scale), Some(date)) => ValuePos::Scaled {
                segment,
                x: scale.map(date),
            },
            _ => ValuePos::Unscaled { segment },
        })
    };

    let by_id: HashMap<&str, &Event> = events.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut tracks = Vec::new();
    let mut y = config.header_height;

    for group in groups.concerns.tracks() {
        let members: Vec<&Event> = group
            .event_ids
            .iter()
            .filter_map(|id| by_id.get(id.as_str()).copied())
            .collect();

        let placements: Vec<Placement<S>> = members
            .iter()
            .map(|e| {
                let a = value_pos(e, EventEnd::Start, &e.start);
                let b = value_pos(e, EventEnd::End, &e.end);
                match (a, b) {
                    (None, None) => Placement::Point(ValuePos::Unscaled {
                        segment: index.no_time.expect("undated events have a No Time segment"),
                    }),
                    (Some(p), None) | (None, Some(p)) => Placement::Point(p),
                    (Some(p), Some(_)) if e.start == e.end => Placement::Point(p),
                    (Some(p), Some(q)) => Placement::Range(p, q),
                }
            })
            .collect();

        // Unscaled points are spread evenly across their segment, per track.
        let mut per_segment: HashMap<usize, usize> = HashMap::new();
        let mut slot_rank = vec![0usize; placements.len()];
        for (i, p) in placements.iter().enumerate() {
            if let Placement::Point(ValuePos::Unscaled { segment }) = p {
                let n = per_segment.entry(*segment).or_default();
                slot_rank[i] = *n;
                *n += 1;
            }
        }

        let mut drafts = Vec::with_capacity(members.len());
        for (i, (e, placement)) in members.iter().zip(&placements).enumerate() {
            let (marker, spans) = match *placement {
                Placement::Point(pos) => {
                    let x = match pos {
                        ValuePos::Scaled { x, .. } => x,
                        ValuePos::Unscaled { segment } => {
                            let s = &segments[segment];
                            let n = S::from_count(per_segment[&segment]);
                            s.left + (S::from_count(slot_rank[i]) + S::lit(0.5)) * s.width() / n
                        }
                    };
                    (Marker::Circle { x, y: S::zero() }, vec![pos.segment()])
                }
                Placement::Range(p, q) => {
                    let x_of = |pos: ValuePos<S>| match pos {
                        ValuePos::Scaled { x, .. } => x,
                        ValuePos::Unscaled { segment } => segments[segment].mid(),
                    };
                    let (xa, xb) = (x_of(p), x_of(q));
                    let (sa, sb) = (p.segment().min(q.segment()), p.segment().max(q.segment()));
                    (
                        Marker::Line {
                            x1: scalar::min(xa, xb),
                            x2: scalar::max(xa, xb),
                            y: S::zero(),
                        },
                        (sa..=sb).collect(),
                    )
                }
            };
            drafts.push(size_box(e, marker, spans, config));
        }

        let items: Vec<PackItem<S>> = drafts
            .iter()
            .zip(&members)
            .map(|(d, e)| {
                let (left, right) = d.geometry.extent();
                PackItem {
                    left,
                    right,
                    narrative_index: e.narrative_index,
                }
            })
            .collect();
        let lane_members = pack_track(&items, config.padding);

        let track_top = y;
        let mut lanes = Vec::with_capacity(lane_members.len());
        for lane in lane_members {
            let tallest = lane
                .iter()
                .map(|&i| drafts[i].body_height + config.marker_band)
                .fold(S::zero(), scalar::max);
            let height = scalar::max(config.lane_height, tallest + config.lane_gap);
            let boxes = lane
                .into_iter()
                .map(|i| {
                    let d = &drafts[i];
                    let mut g = d.geometry.clone();
                    g.top = y + config.lane_gap / S::lit(2.0);
                    g.bottom = g.top + d.body_height;
                    let marker_y = g.bottom + config.marker_band * S::lit(0.625);
                    g.marker = match g.marker {
                        Marker::Circle { x, .. } => Marker::Circle { x, y: marker_y },
                        Marker::Line { x1, x2, .. } => Marker::Line { x1, x2, y: marker_y },
                    };
                    g
                })
                .collect();
            lanes.push(LaneGeometry {
                top: y,
                height,
                boxes,
            });
            y = y + height;
        }
        tracks.push(TrackGeometry {
            kind: group.kind,
            label: group.label,
            broad: group.broad,
            top: track_top,
            bottom: y,
            lanes,
        });
    }

    LayoutGeometry {
        mode: LayoutMode::MultiTimescale,
        width,
        total_height: y + config.axis_height,
        split_ratio: ratio,
        header_height: config.header_height,
        axis_height: config.axis_height,
        metrics: config.box_metrics(),
        segments,
        tracks,
    }
}

struct BoxDraft<S> {
    geometry: InfoBoxGeometry<S>,
    body_height: S,
}

fn floor_count<S: Scalar>(x: S) -> usize {
    x.floor().to_usize().unwrap_or(0).max(1)
}

fn size_box<S: Scalar>(
    event: &Event,
    marker: Marker<S>,
    spans: Vec<usize>,
    config: &LayoutConfig<S>,
) -> BoxDraft<S> {
    let chrome = config.box_padding * S::lit(2.0) + config.badge_width;
    let desired = S::from_count(char_count(&event.title)) * config.char_width + chrome;
    let max_width = scalar::min(config.max_box_width, config.width);
    let box_width = scalar::min(scalar::max(desired, config.min_box_width), max_width);

    let title_lines = wrap(
        &event.title,
        floor_count((box_width - chrome) / config.char_width),
    );
    let note_lines = wrap(
        &event.notes,
        floor_count((box_width - config.box_padding * S::lit(2.0)) / config.char_width),
    );
    let body_height = config.box_padding * S::lit(2.0)
        + S::from_count(title_lines.len().max(1)) * config.title_line_height
        + S::from_count(note_lines.len()) * config.note_line_height;

    let anchor = marker.anchor();
    let left = scalar::max(
        S::zero(),
        scalar::min(anchor - box_width / S::lit(2.0), config.width - box_width),
    );

    BoxDraft {
        geometry: InfoBoxGeometry {
            event_id: event.id.clone(),
            left,
            right: left + box_width,
            top: S::zero(),
            bottom: S::zero(),
            marker,
            spans_segments: spans,
            title_lines,
            note_lines,
        },
        body_height,
    }
}
