use chrono::{Datelike, NaiveDate};
use serde::Serialize;

use crate::layout::Segment;
use crate::scalar::Scalar;

const DAYS_PER_MONTH: f64 = 365.25 / 12.0;

/// Grid step in whole months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TickUnit(pub u32);

impl TickUnit {
    pub const MONTH: TickUnit = TickUnit(1);
    pub const QUARTER: TickUnit = TickUnit(3);
    pub const YEAR: TickUnit = TickUnit(12);

    /// Candidates from finest to coarsest.
    pub const LADDER: [TickUnit; 8] = [
        TickUnit(1),
        TickUnit(3),
        TickUnit(12),
        TickUnit(24),
        TickUnit(60),
        TickUnit(120),
        TickUnit(240),
        TickUnit(600),
    ];

    pub fn months(self) -> u32 {
        self.0
    }

    pub fn label(self, date: NaiveDate) -> String {
        if self.0 >= 12 {
            date.format("%Y").to_string()
        } else {
            date.format("%b %Y").to_string()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridTick<S> {
    pub date: NaiveDate,
    pub x: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridTicks<S> {
    /// `None` for a zero-span segment.
    pub unit: Option<TickUnit>,
    pub ticks: Vec<GridTick<S>>,
}

/// Finest unit whose average on-screen spacing is at least `min_spacing` pixels.
pub fn choose_unit<S: Scalar>(days_per_pixel: S, min_spacing: S) -> TickUnit {
    let dpp = days_per_pixel.to_f64_lossy();
    let min = min_spacing.to_f64_lossy();
    TickUnit::LADDER
        .into_iter()
        .find(|u| f64::from(u.months()) * DAYS_PER_MONTH >= min * dpp)
        .unwrap_or(TickUnit::LADDER[TickUnit::LADDER.len() - 1])
}

fn month_index(date: NaiveDate) -> i64 {
    i64::from(date.year()) * 12 + i64::from(date.month0())
}

fn from_month_index(i: i64) -> Option<NaiveDate> {
    let year = i32::try_from(i.div_euclid(12)).ok()?;
    NaiveDate::from_ymd_opt(year, u32::try_from(i.rem_euclid(12)).ok()? + 1, 1)
}

/// Grid lines for a Timescale segment, at calendar boundaries of the chosen
/// unit. Segments without a scale get no ticks; a zero-span scale gets one
/// tick in the middle. When no boundary falls inside the span the two ends
/// are used instead.
pub fn compute_grid_ticks<S: Scalar>(segment: &Segment<S>, min_spacing: S) -> GridTicks<S> {
    let Some(scale) = &segment.scale else {
        return GridTicks {
            unit: None,
            ticks: Vec::new(),
        };
    };
    if scale.domain_start == scale.domain_end {
        return GridTicks {
            unit: None,
            ticks: vec![GridTick {
                date: scale.domain_start,
                x: scale.map(scale.domain_start),
            }],
        };
    }
    let unit = choose_unit(scale.days_per_pixel(), min_spacing);
    let step = i64::from(unit.months());
    let mut i = month_index(scale.domain_start);
    if scale.domain_start.day() != 1 {
        i += 1;
    }
    i += (step - i.rem_euclid(step)) % step;
    let mut ticks = Vec::new();
    while let Some(date) = from_month_index(i) {
        if date > scale.domain_end {
            break;
        }
        ticks.push(GridTick {
            date,
            x: scale.map(date),
        });
        i += step;
    }
    if ticks.is_empty() {
        ticks = [scale.domain_start, scale.domain_end]
            .into_iter()
            .map(|date| GridTick {
                date,
                x: scale.map(date),
            })
            .collect();
    }
    GridTicks {
        unit: Some(unit),
        ticks,
    }
}
