//! Health stories as multi-timescale timelines.
//!
//! A story is a list of [`Event`]s with loosely specified times. The crate
//! parses narratives into events, groups them by concern and by temporal
//! density, lays them out on a timeline whose dense periods get their own
//! linear scale, and renders the result as a static SVG.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.
//!
//! ```
//! use storyline_core::{deserialize_story, layout_story, render_svg, LayoutConfig, StyleConfig};
//!
//! let story = deserialize_story(r#"{"name": "Ada", "dateOfBirth": "1990-06-15", "events": []}"#).unwrap();
//! let layout = layout_story(&story, &LayoutConfig::default());
//! let svg = render_svg(&layout, &story, &StyleConfig::default()).unwrap();
//! assert!(svg.contains("<svg"));
//! ```

pub mod cluster;
pub mod codec;
pub mod grouping;
pub mod layout;
pub mod model;
pub mod narrative;
pub mod render;
pub mod scalar;
pub mod temporal;

pub use cluster::{cluster_dates, compute_eps, dbscan_1d, DatedValue, TemporalCluster};
pub use codec::{deserialize_story, serialize_story, to_canonical_json, DocumentError, EventDoc};
pub use grouping::{
    assign_time_groups, build_concern_groups, group_events, ConcernGroups, GroupedStory, TimeGroups,
    TimeSlot, TrackKind, ValueRef,
};
pub use layout::{
    compare_layouts, layout_story, single_timescale_layout, timeline_layout, LayoutMode, SegmentKind,
    SPLIT_RATIO_PERCENT,
};
pub use model::{
    resolve_relative_dates, validate_story, DateOrigin, DateValue, Designation, Event, EventEnd, HealthStory,
    Precision, Rule, SpecificConcern, TimeValue, Violation,
};
pub use narrative::{
    classify_designation, extract_events, parse_narrative, remote_parse, segment_narrative, HttpRemoteParser,
    ParseReport, ParserConfig, ParserMode, Profile, RemoteError, RemoteParser,
};
pub use render::{compute_grid_ticks, render_svg, RenderError, StyleConfig};
pub use scalar::Scalar;
pub use temporal::{parse_time_expression, TemporalMention};

pub type LayoutConfig = layout::LayoutConfig<f64>;
pub type Layout = layout::LayoutGeometry<f64>;
pub type Segment = layout::Segment<f64>;
pub type Track = layout::TrackGeometry<f64>;
pub type Lane = layout::LaneGeometry<f64>;
pub type InfoBox = layout::InfoBoxGeometry<f64>;
pub type Marker = layout::Marker<f64>;
pub type LinearScale = layout::LinearScale<f64>;
pub type LayoutComparison = layout::LayoutComparison<f64>;
pub type GridTicks = render::GridTicks<f64>;

/// Geometry document as served and written by the tools.
pub fn layout_document(layout: &Layout) -> String {
    to_canonical_json(layout)
}

/// Lays out and renders a story in one step.
pub fn render_story(
    story: &HealthStory,
    config: &LayoutConfig,
    style: &StyleConfig,
) -> Result<(Layout, String), RenderError> {
    let layout = layout_story(story, config);
    let svg = render_svg(&layout, story, style)?;
    Ok((layout, svg))
}
