//! Density-based clustering of event dates on a normalized time axis.
//!
//! Dates are mapped linearly onto `[0, 100]` from the earliest to the latest
//! value, and DBSCAN runs on that axis with a radius that shrinks as the
//! story covers more years.

use std::collections::VecDeque;

use chrono::NaiveDate;
use serde::Serialize;

use crate::model::EventEnd;
use crate::scalar::{self, Scalar};

/// Length of the normalized axis.
pub const AXIS_EXTENT: f64 = 100.0;
/// Upper bound on the clustering radius, in normalized axis units.
pub const BASE_EPS: f64 = 30.0;
/// Gap, in years, that maps to a radius of one full axis before capping.
pub const REFERENCE_GAP_YEARS: f64 = 2.5;
pub const DAYS_PER_YEAR: f64 = 365.25;
/// Every point is its own core point, so nothing is noise.
pub const MIN_POINTS: usize = 1;

/// Clustering radius for a story spanning `span_years`.
///
/// `min(30, 2.5 / span * 100)`; a zero (or otherwise degenerate) span gets
/// the base radius.
pub fn compute_eps<S: Scalar>(span_years: S) -> S {
    let base = S::lit(BASE_EPS);
    if span_years <= S::zero() || !span_years.is_finite() {
        return base;
    }
    scalar::min(base, S::lit(REFERENCE_GAP_YEARS * AXIS_EXTENT) / span_years)
}

/// One start or end date of an event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DatedValue {
    pub event_id: String,
    pub which: EventEnd,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TemporalCluster {
    pub min_date: NaiveDate,
    pub max_date: NaiveDate,
    pub members: Vec<DatedValue>,
}

pub(crate) fn day_number(date: NaiveDate) -> i64 {
    use chrono::Datelike;
    i64::from(date.num_days_from_ce())
}

/// Position of every date on the normalized axis plus the story span in years.
pub fn normalize<S: Scalar>(dates: &[NaiveDate]) -> (Vec<S>, S) {
    let days: Vec<i64> = dates.iter().copied().map(day_number).collect();
    let (Some(&lo), Some(&hi)) = (days.iter().min(), days.iter().max()) else {
        return (Vec::new(), S::zero());
    };
    let span = hi - lo;
    let span_s = S::from_i64(span).expect("day span fits");
    let positions = days
        .iter()
        .map(|&d| {
            if span == 0 {
                S::zero()
            } else {
                S::from_i64(d - lo).expect("day offset fits") / span_s * S::lit(AXIS_EXTENT)
            }
        })
        .collect();
    (positions, span_s / S::lit(DAYS_PER_YEAR))
}

/// DBSCAN over points on a line. Returns a cluster label per point, `None`
/// for noise. Labels are numbered left to right.
pub fn dbscan_1d<S: Scalar>(points: &[S], eps: S, min_points: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .expect("finite positions")
            .then(a.cmp(&b))
    });
    let sorted: Vec<S> = order.iter().map(|&i| points[i]).collect();

    // Neighbours of a point on a sorted line form one contiguous run.
    let region = |k: usize| -> (usize, usize) {
        let x = sorted[k];
        let lo = sorted.partition_point(|&v| x - v > eps);
        let hi = sorted.partition_point(|&v| v - x <= eps);
        (lo, hi)
    };

    let mut labels: Vec<Option<usize>> = vec![None; sorted.len()];
    let mut visited = vec![false; sorted.len()];
    let mut next_label = 0;
    for k in 0..sorted.len() {
        if visited[k] {
            continue;
        }
        visited[k] = true;
        let (lo, hi) = region(k);
        if hi - lo < min_points {
            continue;
        }
        let label = next_label;
        next_label += 1;
        labels[k] = Some(label);
        let mut queue: VecDeque<usize> = (lo..hi).collect();
        while let Some(j) = queue.pop_front() {
            if labels[j].is_none() {
                labels[j] = Some(label);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let (jlo, jhi) = region(j);
            if jhi - jlo >= min_points {
                queue.extend(jlo..jhi);
            }
        }
    }

    let mut out = vec![None; points.len()];
    for (k, &i) in order.iter().enumerate() {
        out[i] = labels[k];
    }
    out
}

/// Clusters dates with the adaptive radius; clusters are chronological and
/// partition the input.
pub fn cluster_dates<S: Scalar>(dated: &[DatedValue]) -> Vec<TemporalCluster> {
    if dated.is_empty() {
        return Vec::new();
    }
    let dates: Vec<NaiveDate> = dated.iter().map(|d| d.date).collect();
    let (positions, span_years) = normalize::<S>(&dates);
    let eps = compute_eps(span_years);
    let labels = dbscan_1d(&positions, eps, MIN_POINTS);

    let count = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<&DatedValue>> = vec![Vec::new(); count];
    for (value, label) in dated.iter().zip(&labels) {
        let label = label.expect("min_points = 1 leaves no noise");
        members[label].push(value);
    }
    let mut clusters: Vec<TemporalCluster> = members
        .into_iter()
        .map(|mut m| {
            m.sort_by_key(|v| v.date);
            TemporalCluster {
                min_date: m.first().expect("non-empty").date,
                max_date: m.last().expect("non-empty").date,
                members: m.into_iter().cloned().collect(),
            }
        })
        .collect();
    clusters.sort_by_key(|c| c.min_date);
    clusters
}
