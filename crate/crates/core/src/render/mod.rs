//! Static SVG artifact for a laid-out story.

mod style;
mod ticks;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use chrono::Datelike;
use thiserror::Error;

pub use style::{badge, StyleConfig, Swatch};
pub use ticks::{choose_unit, compute_grid_ticks, GridTick, GridTicks, TickUnit};

use crate::layout::{InfoBoxGeometry, LayoutGeometry, Marker, Segment, SegmentKind};
use crate::model::{age_on, Designation, Event, HealthStory};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("geometry places event {event_id:?} which is not in the story")]
    DanglingEvent { event_id: String },
    #[error("geometry places event {event_id:?} more than once")]
    DuplicateEvent { event_id: String },
    #[error("story event {event_id:?} has no box in the geometry")]
    MissingEvent { event_id: String },
}

/// Formats a coordinate with at most two decimals.
fn num<S: Scalar>(x: S) -> String {
    fmt_f64(x.to_f64_lossy())
}

fn fmt_f64(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if c.is_control() && c != '\t' && c != '\n' => {}
            c => out.push(c),
        }
    }
    out
}

fn segment_label<S: Scalar>(segment: &Segment<S>) -> String {
    match segment.kind {
        SegmentKind::NoTime => "No Time".into(),
        SegmentKind::Past => "Past".into(),
        SegmentKind::Present => "Present".into(),
        SegmentKind::Timescale { .. } => match &segment.scale {
            Some(s) if s.domain_start.year() == s.domain_end.year() => s.domain_start.year().to_string(),
            Some(s) => format!("{}-{}", s.domain_start.year(), s.domain_end.year()),
            None => String::new(),
        },
    }
}

fn segment_class(kind: SegmentKind) -> &'static str {
    match kind {
        SegmentKind::NoTime => "no-time",
        SegmentKind::Past => "past",
        SegmentKind::Timescale { .. } => "timescale",
        SegmentKind::Present => "present",
    }
}

/// Centre for an axis label of `chars` characters, kept inside the segment.
fn label_x<S: Scalar>(x: S, chars: usize, font_size: f64, segment: &Segment<S>) -> S {
    let half = S::from_count(chars) * S::lit(font_size * 0.3);
    let lo = segment.left + half;
    let hi = segment.right - half;
    if lo > hi {
        segment.mid()
    } else {
        x.max(lo).min(hi)
    }
}

fn check_consistency<S: Scalar>(
    geometry: &LayoutGeometry<S>,
    story: &HealthStory,
) -> Result<HashMap<String, Event>, RenderError> {
    let by_id: HashMap<String, Event> = story.events.iter().map(|e| (e.id.clone(), e.clone())).collect();
    let mut seen = HashSet::new();
    for b in geometry.boxes() {
        if !by_id.contains_key(&b.event_id) {
            return Err(RenderError::DanglingEvent {
                event_id: b.event_id.clone(),
            });
        }
        if !seen.insert(b.event_id.as_str()) {
            return Err(RenderError::DuplicateEvent {
                event_id: b.event_id.clone(),
            });
        }
    }
    if let Some(e) = story.events.iter().find(|e| !seen.contains(e.id.as_str())) {
        return Err(RenderError::MissingEvent {
            event_id: e.id.clone(),
        });
    }
    Ok(by_id)
}

/// Renders the geometry as an SVG 1.1 document. Output depends only on the
/// inputs, so equal inputs give byte-identical documents.
pub fn render_svg<S: Scalar>(
    geometry: &LayoutGeometry<S>,
    story: &HealthStory,
    style: &StyleConfig,
) -> Result<String, RenderError> {
    let events = check_consistency(geometry, story)?;
    let mut svg = String::new();
    let w = num(geometry.width);
    let h = num(geometry.total_height);
    let header = geometry.header_height;
    let axis_top = geometry.axis_top();

    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="{}">"#,
        style.font_family
    );
    let _ = writeln!(
        svg,
        "<title>{}</title>",
        escape(&format!("Health story of {}", story.name))
    );
    let _ = writeln!(
        svg,
        r#"<rect class="canvas" x="0" y="0" width="{w}" height="{h}" fill="{}"/>"#,
        style.background
    );

    // Segments: header label, grid, boundary, dual axis.
    svg.push_str("<g id=\"segments\">\n");
    for (k, segment) in geometry.segments.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<g id="segment-{k}" class="segment {}">"#,
            segment_class(segment.kind)
        );
        let _ = writeln!(
            svg,
            r#"<text class="segment-label" x="{}" y="{}" font-size="{}" text-anchor="middle" fill="{}">{}</text>"#,
            num(segment.mid()),
            num(header * S::lit(0.65)),
            fmt_f64(style.header_font_size),
            style.muted_text_color,
            escape(&segment_label(segment))
        );
        let grid = compute_grid_ticks(segment, S::lit(style.grid_base_spacing));
        for tick in &grid.ticks {
            let x = num(tick.x);
            let _ = writeln!(
                svg,
                r#"<line class="grid" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{}" stroke-width="1"/>"#,
                num(header),
                num(axis_top),
                style.grid_color
            );
            let label = grid.unit.unwrap_or(TickUnit::MONTH).label(tick.date);
            let lx = num(label_x(
                tick.x,
                label.chars().count(),
                style.axis_font_size,
                segment,
            ));
            let _ = writeln!(
                svg,
                r#"<text class="axis-absolute" x="{lx}" y="{}" font-size="{}" text-anchor="middle" fill="{}">{}</text>"#,
                num(axis_top + S::lit(16.0)),
                fmt_f64(style.axis_font_size),
                style.absolute_label_color,
                escape(&label)
            );
            if let Some(dob) = story.date_of_birth {
                let _ = writeln!(
                    svg,
                    r#"<text class="axis-age" x="{lx}" y="{}" font-size="{}" text-anchor="middle" fill="{}">age {}</text>"#,
                    num(axis_top + S::lit(33.0)),
                    fmt_f64(style.axis_font_size),
                    style.relative_label_color,
                    age_on(dob, tick.date)
                );
            }
        }
        if segment.left > S::zero() {
            let x = num(segment.left);
            let _ = writeln!(
                svg,
                r#"<line class="boundary" x1="{x}" y1="0" x2="{x}" y2="{}" stroke="{}" stroke-width="1.5"/>"#,
                num(geometry.total_height),
                style.boundary_color
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</g>\n");

    // Band edges.
    let _ = writeln!(
        svg,
        r#"<line class="header-rule" x1="0" y1="{y}" x2="{w}" y2="{y}" stroke="{}" stroke-width="1"/>"#,
        style.boundary_color,
        y = num(header)
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis-rule" x1="0" y1="{y}" x2="{w}" y2="{y}" stroke="{}" stroke-width="1"/>"#,
        style.boundary_color,
        y = num(axis_top)
    );

    // Tracks.
    svg.push_str("<g id=\"tracks\">\n");
    for (k, track) in geometry.tracks.iter().enumerate() {
        let label = match &track.broad {
            Some(b) => format!("{b} / {}", track.label),
            None => track.label.clone(),
        };
        let _ = writeln!(svg, r#"<g id="track-{k}" class="track">"#);
        let _ = writeln!(
            svg,
            r#"<text class="track-label" x="4" y="{}" font-size="{}" fill="{}">{}</text>"#,
            num(track.top + S::lit(10.0)),
            fmt_f64(style.note_font_size),
            style.muted_text_color,
            escape(&label)
        );
        let _ = writeln!(
            svg,
            r#"<line class="track-separator" x1="0" y1="{y}" x2="{w}" y2="{y}" stroke="{}" stroke-width="1"/>"#,
            style.separator_color,
            y = num(track.bottom)
        );
        svg.push_str("</g>\n");
    }
    svg.push_str("</g>\n");

    // Life events cut across every track.
    svg.push_str("<g id=\"life-lines\">\n");
    for b in geometry.boxes() {
        if events[&b.event_id].designation == Designation::LifeEvent {
            let x = num(b.marker.anchor());
            let _ = writeln!(
                svg,
                r#"<line class="life-line" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{}" stroke-width="2" stroke-dasharray="6 4"/>"#,
                num(header),
                num(axis_top),
                style.life_line_color
            );
        }
    }
    svg.push_str("</g>\n");

    svg.push_str("<g id=\"events\">\n");
    for b in geometry.boxes() {
        write_event(&mut svg, geometry, b, &events[&b.event_id], style);
    }
    svg.push_str("</g>\n");
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn write_event<S: Scalar>(
    svg: &mut String,
    geometry: &LayoutGeometry<S>,
    b: &InfoBoxGeometry<S>,
    event: &Event,
    style: &StyleConfig,
) {
    let m = &geometry.metrics;
    let swatch = style.swatch(event.designation);
    let two = S::lit(2.0);
    let tip_half = S::lit(5.0);
    let anchor = b.marker.anchor();
    let lo = b.left + tip_half + two;
    let hi = b.right - tip_half - two;
    let tip_x = if lo <= hi {
        anchor.max(lo).min(hi)
    } else {
        (b.left + b.right) / two
    };
    let tip_y = b.bottom + S::lit(6.0);

    let _ = writeln!(
        svg,
        r#"<g id="event-{}" class="event {}">"#,
        escape(&event.id),
        event.designation.name().to_lowercase()
    );
    let _ = writeln!(
        svg,
        r#"<path class="bubble" d="M{l} {t} H{r} V{bt} H{a} L{tx} {ty} L{c} {bt} H{l} Z" fill="{}" stroke="{}" stroke-width="1.2"/>"#,
        swatch.fill,
        swatch.stroke,
        l = num(b.left),
        t = num(b.top),
        r = num(b.right),
        bt = num(b.bottom),
        a = num(tip_x + tip_half),
        tx = num(tip_x),
        ty = num(tip_y),
        c = num(tip_x - tip_half),
    );

    let bx = b.left + m.box_padding;
    let by = b.top + m.box_padding;
    let _ = writeln!(
        svg,
        r#"<rect class="badge" x="{}" y="{}" width="{}" height="13" rx="2" fill="{}"/>"#,
        num(bx),
        num(by),
        num(m.badge_width - S::lit(4.0)),
        swatch.stroke
    );
    let _ = writeln!(
        svg,
        r##"<text class="badge-text" x="{}" y="{}" font-size="{}" text-anchor="middle" fill="#FFFFFF">{}</text>"##,
        num(bx + (m.badge_width - S::lit(4.0)) / two),
        num(by + S::lit(9.5)),
        fmt_f64(style.badge_font_size),
        badge(event.designation)
    );

    let title_x = num(bx + m.badge_width);
    for (i, line) in b.title_lines.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="title" x="{title_x}" y="{}" font-size="{}" font-weight="bold" fill="{}">{}</text>"#,
            num(by + S::from_count(i + 1) * m.title_line_height - S::lit(3.0)),
            fmt_f64(style.title_font_size),
            style.text_color,
            escape(line)
        );
    }
    let notes_top = by + S::from_count(b.title_lines.len().max(1)) * m.title_line_height;
    for (j, line) in b.note_lines.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="notes" x="{}" y="{}" font-size="{}" fill="{}">{}</text>"#,
            num(bx),
            num(notes_top + S::from_count(j + 1) * m.note_line_height - S::lit(3.0)),
            fmt_f64(style.note_font_size),
            style.text_color,
            escape(line)
        );
    }

    match b.marker {
        Marker::Circle { x, y } => {
            let _ = writeln!(
                svg,
                r#"<circle class="marker" cx="{}" cy="{}" r="{}" fill="{}"/>"#,
                num(x),
                num(y),
                fmt_f64(style.marker_radius),
                swatch.stroke
            );
        }
        Marker::Line { x1, x2, y } => {
            let _ = writeln!(
                svg,
                r#"<line class="marker" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="{}" stroke-linecap="round"/>"#,
                num(x1),
                num(x2),
                swatch.stroke,
                fmt_f64(style.line_width),
                y = num(y)
            );
        }
    }
    svg.push_str("</g>\n");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_compact() {
        assert_eq!(fmt_f64(12.0), "12");
        assert_eq!(fmt_f64(12.3456), "12.35");
        assert_eq!(fmt_f64(-0.001), "0");
    }

    #[test]
    fn text_is_escaped() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
