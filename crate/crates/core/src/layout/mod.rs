//! Multi-timescale timeline layout.
//!
//! Dated values are clustered into Timescale segments whose widths follow
//! the number of values they hold. Undated events sit in a left-hand No Time
//! region whose share `r` of the canvas is chosen from a fixed candidate list
//! to minimize the total height after first-fit lane packing.

mod draft;
mod pack;
mod text;

use chrono::NaiveDate;
use serde::Serialize;

pub use draft::{allocate_segment_widths, draft_layout};
pub use pack::{pack_track, PackItem};
pub use text::wrap;

use crate::cluster::{day_number, TemporalCluster};
use crate::grouping::{group_events, GroupedStory, TrackKind};
use crate::model::HealthStory;
use crate::scalar::Scalar;

/// Candidate No Time shares, in percent of the canvas width.
pub const SPLIT_RATIO_PERCENT: [u32; 9] = [10, 15, 20, 25, 30, 35, 40, 45, 50];

pub fn split_ratio_candidates<S: Scalar>() -> [S; 9] {
    SPLIT_RATIO_PERCENT.map(|p| S::lit(f64::from(p)) / S::lit(100.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutConfig<S> {
    /// Canvas width in pixels.
    pub width: S,
    /// Minimum lane height.
    pub lane_height: S,
    /// Minimum horizontal gap between two boxes in one lane.
    pub padding: S,
    /// Advance of one character of box text.
    pub char_width: S,
    pub min_segment_width: S,
    pub min_box_width: S,
    pub max_box_width: S,
    pub title_line_height: S,
    pub note_line_height: S,
    /// Inner padding of an InfoBox.
    pub box_padding: S,
    /// Space reserved for the designation badge left of the title.
    pub badge_width: S,
    /// Pointer and marker area below each box.
    pub marker_band: S,
    pub lane_gap: S,
    pub header_height: S,
    pub axis_height: S,
    /// Distance between a Timescale's edge and its first/last date.
    pub timescale_inset: S,
}

impl<S: Scalar> LayoutConfig<S> {
    pub fn with_width(width: S) -> Self {
        Self {
            width,
            ..Self::default()
        }
    }

    pub fn chrome_height(&self) -> S {
        self.header_height + self.axis_height
    }
}

impl<S: Scalar> Default for LayoutConfig<S> {
    fn default() -> Self {
        Self {
            width: S::lit(1600.0),
            lane_height: S::lit(48.0),
            padding: S::lit(8.0),
            char_width: S::lit(6.5),
            min_segment_width: S::lit(40.0),
            min_box_width: S::lit(80.0),
            max_box_width: S::lit(200.0),
            title_line_height: S::lit(15.0),
            note_line_height: S::lit(13.0),
            box_padding: S::lit(6.0),
            badge_width: S::lit(22.0),
            marker_band: S::lit(16.0),
            lane_gap: S::lit(8.0),
            header_height: S::lit(28.0),
            axis_height: S::lit(44.0),
            timescale_inset: S::lit(12.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SegmentKind {
    NoTime,
    Past,
    Timescale { cluster: usize },
    Present,
}

/// Linear map from calendar dates onto a pixel interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LinearScale<S> {
    pub domain_start: NaiveDate,
    pub domain_end: NaiveDate,
    pub range_start: S,
    pub range_end: S,
}

impl<S: Scalar> LinearScale<S> {
    pub fn map(&self, date: NaiveDate) -> S {
        let d0 = day_number(self.domain_start);
        let d1 = day_number(self.domain_end);
        if d1 == d0 {
            return (self.range_start + self.range_end) / S::lit(2.0);
        }
        let t = S::from_i64(day_number(date) - d0).expect("day offset fits")
            / S::from_i64(d1 - d0).expect("day span fits");
        self.range_start + t * (self.range_end - self.range_start)
    }

    /// Calendar days covered by one pixel.
    pub fn days_per_pixel(&self) -> S {
        let days =
            S::from_i64(day_number(self.domain_end) - day_number(self.domain_start)).expect("day span fits");
        let px = self.range_end - self.range_start;
        if px > S::zero() {
            days / px
        } else {
            S::zero()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Segment<S> {
    #[serde(flatten)]
    pub kind: SegmentKind,
    pub left: S,
    pub right: S,
    /// Number of start/end values the segment holds.
    pub count: usize,
    pub scale: Option<LinearScale<S>>,
}

impl<S: Scalar> Segment<S> {
    pub fn width(&self) -> S {
        self.right - self.left
    }

    pub fn mid(&self) -> S {
        (self.left + self.right) / S::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Marker<S> {
    Circle { x: S, y: S },
    Line { x1: S, x2: S, y: S },
}

impl<S: Scalar> Marker<S> {
    pub fn x_range(&self) -> (S, S) {
        match *self {
            Marker::Circle { x, .. } => (x, x),
            Marker::Line { x1, x2, .. } => (x1, x2),
        }
    }

    pub fn anchor(&self) -> S {
        let (a, b) = self.x_range();
        (a + b) / S::lit(2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InfoBoxGeometry<S> {
    pub event_id: String,
    pub left: S,
    pub right: S,
    pub top: S,
    pub bottom: S,
    pub marker: Marker<S>,
    pub spans_segments: Vec<usize>,
    pub title_lines: Vec<String>,
    pub note_lines: Vec<String>,
}

impl<S: Scalar> InfoBoxGeometry<S> {
    /// Horizontal extent of box and marker together.
    pub fn extent(&self) -> (S, S) {
        let (a, b) = self.marker.x_range();
        (
            crate::scalar::min(self.left, a),
            crate::scalar::max(self.right, b),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LaneGeometry<S> {
    pub top: S,
    pub height: S,
    pub boxes: Vec<InfoBoxGeometry<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrackGeometry<S> {
    pub kind: TrackKind,
    pub label: String,
    pub broad: Option<String>,
    pub top: S,
    pub bottom: S,
    pub lanes: Vec<LaneGeometry<S>>,
}

impl<S: Scalar> TrackGeometry<S> {
    pub fn height(&self) -> S {
        self.bottom - self.top
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum LayoutMode {
    MultiTimescale,
    SingleTimescale,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutGeometry<S> {
    pub mode: LayoutMode,
    pub width: S,
    pub total_height: S,
    pub split_ratio: S,
    pub header_height: S,
    pub axis_height: S,
    pub metrics: BoxMetrics<S>,
    pub segments: Vec<Segment<S>>,
    pub tracks: Vec<TrackGeometry<S>>,
}

/// Box text metrics the geometry was computed with, so a renderer can place
/// text lines without the full config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoxMetrics<S> {
    pub box_padding: S,
    pub badge_width: S,
    pub title_line_height: S,
    pub note_line_height: S,
    pub marker_band: S,
}

impl<S: Scalar> LayoutConfig<S> {
    pub fn box_metrics(&self) -> BoxMetrics<S> {
        BoxMetrics {
            box_padding: self.box_padding,
            badge_width: self.badge_width,
            title_line_height: self.title_line_height,
            note_line_height: self.note_line_height,
            marker_band: self.marker_band,
        }
    }
}

impl<S: Scalar> LayoutGeometry<S> {
    pub fn boxes(&self) -> impl Iterator<Item = &InfoBoxGeometry<S>> {
        self.tracks
            .iter()
            .flat_map(|t| t.lanes.iter().flat_map(|l| l.boxes.iter()))
    }

    /// Top of the axis band, i.e. the bottom of the last track.
    pub fn axis_top(&self) -> S {
        self.total_height - self.axis_height
    }
}

/// Evaluates every candidate split ratio and keeps the lowest layout; the
/// first (smallest) ratio wins ties.
pub fn timeline_layout<S: Scalar>(
    story: &HealthStory,
    groups: &GroupedStory,
    config: &LayoutConfig<S>,
) -> LayoutGeometry<S> {
    let mut best: Option<LayoutGeometry<S>> = None;
    for r in split_ratio_candidates::<S>() {
        let draft = draft_layout(&story.events, groups, config, r);
        if best.as_ref().is_none_or(|b| draft.total_height < b.total_height) {
            best = Some(draft);
        }
    }
    best.expect("candidate list is non-empty")
}

/// Collapses all temporal clusters into a single one spanning every date.
pub fn merge_clusters(groups: &GroupedStory) -> GroupedStory {
    let mut merged = groups.clone();
    let clusters = std::mem::take(&mut merged.time.clusters);
    if let (Some(first), Some(last)) = (clusters.first(), clusters.last()) {
        let (min_date, max_date) = (first.min_date, last.max_date);
        let mut members: Vec<_> = clusters.into_iter().flat_map(|c| c.members).collect();
        members.sort_by_key(|m| m.date);
        merged.time.clusters = vec![TemporalCluster {
            min_date,
            max_date,
            members,
        }];
    }
    merged
}

/// Baseline: the same optimization, but all dates share one linear scale.
pub fn single_timescale_layout<S: Scalar>(
    story: &HealthStory,
    groups: &GroupedStory,
    config: &LayoutConfig<S>,
) -> LayoutGeometry<S> {
    let mut geometry = timeline_layout(story, &merge_clusters(groups), config);
    geometry.mode = LayoutMode::SingleTimescale;
    geometry
}

/// Groups the story's events and lays them out.
pub fn layout_story<S: Scalar>(story: &HealthStory, config: &LayoutConfig<S>) -> LayoutGeometry<S> {
    timeline_layout(story, &group_events::<S>(&story.events), config)
}

/// Heights of both layout modes for every candidate ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutComparison<S> {
    pub clusters: usize,
    pub rows: Vec<ComparisonRow<S>>,
    pub multi: S,
    pub single: S,
    pub multi_ratio: S,
    pub single_ratio: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRow<S> {
    pub split_ratio: S,
    pub multi_height: S,
    pub single_height: S,
}

pub fn compare_layouts<S: Scalar>(story: &HealthStory, config: &LayoutConfig<S>) -> LayoutComparison<S> {
    let groups = group_events::<S>(&story.events);
    let single_groups = merge_clusters(&groups);
    let rows = split_ratio_candidates::<S>()
        .into_iter()
        .map(|r| ComparisonRow {
            split_ratio: r,
            multi_height: draft_layout(&story.events, &groups, config, r).total_height,
            single_height: draft_layout(&story.events, &single_groups, config, r).total_height,
        })
        .collect();
    let multi = timeline_layout(story, &groups, config);
    let single = single_timescale_layout(story, &groups, config);
    LayoutComparison {
        clusters: groups.time.clusters.len(),
        rows,
        multi: multi.total_height,
        single: single.total_height,
        multi_ratio: multi.split_ratio,
        single_ratio: single.split_ratio,
    }
}
