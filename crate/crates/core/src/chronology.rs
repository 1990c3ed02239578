//! Horizontal timeline layout.
//!
//! A chronology is quantitative when every phase is dated and the dates span
//! more than one year; ticks are then placed proportionally to the year. Any
//! other chronology is qualitative and its ticks are spaced evenly by ordinal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChronologyMode {
    Qualitative,
    Quantitative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub ordinal: u32,
    /// In `[0, 1]` along the horizontal axis.
    pub position: f64,
    pub tick_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineLayout {
    pub mode: ChronologyMode,
    pub ticks: Vec<Tick>,
}

/// Year span `(min, max)` when the chronology is quantitative.
fn year_span(phases: &[Phase]) -> Option<(i32, i32)> {
    let mut years = phases.iter().map(|p| p.year);
    let first = years.next()??;
    let (mut lo, mut hi) = (first, first);
    for y in years {
        let y = y?;
        lo = lo.min(y);
        hi = hi.max(y);
    }
    (lo < hi).then_some((lo, hi))
}

pub fn classify(phases: &[Phase]) -> Result<ChronologyMode> {
    if phases.is_empty() {
        return Err(Error::EmptyChronology);
    }
    Ok(match year_span(phases) {
        Some(_) => ChronologyMode::Quantitative,
        None => ChronologyMode::Qualitative,
    })
}

pub fn layout(phases: &[Phase]) -> Result<TimelineLayout> {
    if phases.is_empty() {
        return Err(Error::EmptyChronology);
    }
    let n = phases.len();
    let (mode, ticks) = match year_span(phases) {
        Some((lo, hi)) => {
            let span = f64::from(hi - lo);
            let ticks = phases
                .iter()
                .map(|p| {
                    // year_span guarantees every phase is dated
                    let y = p.year.unwrap_or(lo);
                    Tick {
                        ordinal: p.ordinal,
                        position: f64::from(y - lo) / span,
                        tick_label: y.to_string(),
                    }
                })
                .collect();
            (ChronologyMode::Quantitative, ticks)
        }
        None => {
            let ticks = phases
                .iter()
                .enumerate()
                .map(|(i, p)| Tick {
                    ordinal: p.ordinal,
                    position: if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 },
                    tick_label: p.label.clone(),
                })
                .collect();
            (ChronologyMode::Qualitative, ticks)
        }
    };
    Ok(TimelineLayout { mode, ticks })
}
