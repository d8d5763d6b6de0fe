//! Front arrest detection on the burned-volume series.

use super::period::interpolate;

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_HOLD_TIME: f64 = 0.5;
/// Width of the centered secant used for `A'(t)`.
pub const SECANT_WIDTH: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuenchReport {
    pub quenched: bool,
    pub quench_time: Option<f64>,
}

impl QuenchReport {
    pub const NONE: QuenchReport = QuenchReport { quenched: false, quench_time: None };
}

/// Secant rate `(C(t + w/2) − C(t − w/2)) / w` at every sample with a full window.
pub fn secant_rate(times: &[f64], cumulative: &[f64], width: f64) -> Vec<(f64, f64)> {
    if times.len() < 2 {
        return Vec::new();
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let half = 0.5 * width;
    times
        .iter()
        .filter(|&&t| t - half >= t0 && t + half <= t1)
        .map(|&t| {
            let r = (interpolate(times, cumulative, t + half) - interpolate(times, cumulative, t - half)) / width;
            (t, r)
        })
        .collect()
}

/// Quenched when `|rate|` of `cumulative` stays below `threshold · s_l` for at
/// least `hold_time`; the report carries the start of the earliest such run.
///
/// A front that retreats is still moving, so a negative rate only counts once
/// it has come to rest.
pub fn detect_quench_in(
    times: &[f64],
    cumulative: &[f64],
    s_l: f64,
    threshold: f64,
    hold_time: f64,
) -> QuenchReport {
    let limit = threshold * s_l;
    let mut start: Option<f64> = None;
    for (t, r) in secant_rate(times, cumulative, SECANT_WIDTH) {
        if r.abs() < limit {
            let s = *start.get_or_insert(t);
            if t - s >= hold_time {
                return QuenchReport { quenched: true, quench_time: Some(s) };
            }
        } else {
            start = None;
        }
    }
    QuenchReport::NONE
}
