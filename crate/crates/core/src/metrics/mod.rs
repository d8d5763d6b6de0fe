//! Turbulent flame speed estimation from time series of a running front.
//!
//! The burned volume is `A(t) = −floor_integral(G)`; its large-time growth rate
//! is the turbulent flame speed. The same windowed average is applied to `−G` at
//! a probe node for the pointwise estimate.

pub mod contour;
pub mod period;
pub mod quench;

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{floor_integral, AffineField};
use crate::snapshot::fmt17;

pub use contour::{contour_csv, extract_zero_level, Polyline};
pub use quench::{detect_quench_in, QuenchReport, DEFAULT_HOLD_TIME, DEFAULT_THRESHOLD};

use period::{binned_rate, detect_period_uniform, integral_to, interpolate, prefix_integral};

/// Portion of the simulated time discarded as transient.
pub const TRANSIENT_FRACTION: f64 = 0.25;
/// Trailing portion of the record searched for a period.
pub const DETECTION_FRACTION: f64 = 0.6;
pub const MAX_BINS: usize = 4096;
pub const MIN_SAMPLES: usize = 8;

/// Time series recorded once per step.
///
/// `g_pde` follows `G` at the probe node but skips the jumps introduced by
/// reinitialization, so its rate is the PDE-driven `G'`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsSeries {
    pub probe: (usize, usize),
    pub times: Vec<f64>,
    pub burned_volume: Vec<f64>,
    pub g_probe: Vec<f64>,
    pub g_pde: Vec<f64>,
    pending_jump: f64,
}

impl DiagnosticsSeries {
    pub fn new(probe: (usize, usize)) -> Self {
        DiagnosticsSeries {
            probe,
            times: Vec::new(),
            burned_volume: Vec::new(),
            g_probe: Vec::new(),
            g_pde: Vec::new(),
            pending_jump: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, time: f64, burned: f64, g_probe: f64, g_pde: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(time > last) {
                return Err(Error::Domain(format!("diagnostic time {time} does not follow {last}")));
            }
        }
        self.times.push(time);
        self.burned_volume.push(burned);
        self.g_probe.push(g_probe);
        self.g_pde.push(g_pde);
        Ok(())
    }

    /// Append `t`, `−floor_integral(G)` and `G` at the probe node.
    pub fn record(&mut self, time: f64, field: &AffineField) -> Result<()> {
        let g = self.probe_value(field);
        let pde = match (self.g_probe.last(), self.g_pde.last()) {
            (Some(&prev), Some(&prev_pde)) => prev_pde + (g - prev) - self.pending_jump,
            _ => g,
        };
        self.push(time, -floor_integral(field), g, pde)?;
        self.pending_jump = 0.0;
        Ok(())
    }

    /// Register a reinitialization between two records.
    pub fn note_reinit(&mut self, before: &AffineField, after: &AffineField) {
        self.pending_jump += self.probe_value(after) - self.probe_value(before);
    }

    fn probe_value(&self, field: &AffineField) -> f64 {
        field.g(self.probe.0 as isize, self.probe.1 as isize)
    }

    /// Centered-difference `A'(t)`.
    pub fn burned_rate(&self) -> Vec<f64> {
        centered_rate(&self.times, &self.burned_volume)
    }

    /// Centered-difference `G'` at the probe, reinitialization jumps removed.
    pub fn probe_rate(&self) -> Vec<f64> {
        centered_rate(&self.times, &self.g_pde)
    }

    pub fn to_csv(&self) -> String {
        let rate = self.burned_rate();
        let dg = self.probe_rate();
        let mut s = String::from("t,burned_volume,burned_rate,G_probe,dG_probe,G_probe_pde\n");
        for k in 0..self.len() {
            let row = [self.times[k], self.burned_volume[k], rate[k], self.g_probe[k], dg[k], self.g_pde[k]];
            let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
            s += &cells.join(",");
            s.push('\n');
        }
        s
    }

    /// Inverse of [`to_csv`](Self::to_csv); the rate columns are recomputed.
    pub fn from_csv(text: &str, probe: (usize, usize)) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty series".into()))?;
        if !header.starts_with("t,burned_volume,") {
            return Err(Error::Parse(format!("bad series header: {header:?}")));
        }
        let mut out = DiagnosticsSeries::new(probe);
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cells = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse(format!("series row {}: {e}", n + 2)))?;
            if cells.len() != 6 {
                return Err(Error::Parse(format!("series row {} has {} columns", n + 2, cells.len())));
            }
            out.push(cells[0], cells[1], cells[3], cells[5])?;
        }
        Ok(out)
    }
}

/// Centered differences in the interior, one-sided at the ends.
pub fn centered_rate(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    WindowAverage,
    Pointwise,
    Corrector,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::WindowAverage => "window_average",
            Method::Pointwise => "pointwise",
            Method::Corrector => "corrector",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateFlag {
    NoPeriodDetected,
    NegativeSpeed,
}

impl EstimateFlag {
    pub fn name(self) -> &'static str {
        match self {
            EstimateFlag::NoPeriodDetected => "no_period_detected",
            EstimateFlag::NegativeSpeed => "negative_speed",
        }
    }
}

/// Slow trends of a rate signal across consecutive periods of the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingTrend {
    /// Slope of the per-period mean rate, relative to the overall mean, per unit time.
    pub mean_drift: f64,
    /// Exponential decay rate of the per-period oscillation amplitude.
    pub amplitude_decay: f64,
    pub periods: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedEstimate {
    pub s_t: f64,
    pub method: Method,
    pub window: (f64, f64),
    pub samples: usize,
    pub quenched: bool,
    pub quench_time: Option<f64>,
    pub period: Option<f64>,
    pub damping: Option<DampingTrend>,
    pub flags: Vec<EstimateFlag>,
}

impl SpeedEstimate {
    pub fn has_flag(&self, flag: EstimateFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn with_quench(mut self, q: QuenchReport) -> Self {
        self.quenched = q.quenched;
        self.quench_time = q.quench_time;
        self
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt17);
        let flags: Vec<&str> = self.flags.iter().map(|f| f.name()).collect();
        let mut s = format!(
            "method = {}\ns_T = {}\nT1 = {}\nT2 = {}\nsamples = {}\nquenched = {}\nquench_time = {}\nperiod = {}\nflags = {}\n",
            self.method,
            fmt17(self.s_t),
            fmt17(self.window.0),
            fmt17(self.window.1),
            self.samples,
            self.quenched,
            opt(self.quench_time),
            opt(self.period),
            if flags.is_empty() { "none".to_string() } else { flags.join(",") },
        );
        if let Some(d) = self.damping {
            s += &format!(
                "mean_drift = {}\namplitude_decay = {}\n",
                fmt17(d.mean_drift),
                fmt17(d.amplitude_decay)
            );
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Window {
    t1: f64,
    t2: f64,
    period: Option<f64>,
}

/// Averaging window ending at the last sample: an integer number (≥ 2) of
/// detected periods of the rate of `detect` after the transient, else the
/// trailing half of the record.
fn select_window(times: &[f64], detect: &[f64]) -> Result<Window> {
    let n = times.len();
    if n < MIN_SAMPLES {
        return Err(Error::Estimation(format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    let (t0, t_end) = (times[0], times[n - 1]);
    let span = t_end - t0;
    if !(span > 0.0) {
        return Err(Error::Estimation("series spans no time".into()));
    }
    let t_cut = t0 + TRANSIENT_FRACTION * span;
    let d0 = t_end - DETECTION_FRACTION * span;
    let in_range = times.iter().filter(|&&t| t >= d0).count();
    let m = in_range.clamp(MIN_SAMPLES, MAX_BINS);
    let rate = binned_rate(times, detect, d0, t_end, m);
    if let Some(p) = detect_period_uniform(&rate, (t_end - d0) / m as f64) {
        let k = ((t_end - t_cut) / p).floor();
        if k >= 2.0 {
            return Ok(Window { t1: t_end - k * p, t2: t_end, period: Some(p) });
        }
    }
    Ok(Window { t1: t_end - 0.5 * span, t2: t_end, period: None })
}

fn window_estimate(
    times: &[f64],
    value: &[f64],
    detect: &[f64],
    method: Method,
) -> Result<SpeedEstimate> {
    let w = select_window(times, detect)?;
    let s_t = match w.period {
        // one-period means at both ends of the window: insensitive to where a
        // staircase jump falls relative to T1 and T2
        Some(p) => {
            let pre = prefix_integral(times, value);
            let mean = |a: f64| (integral_to(times, value, &pre, a + p) - integral_to(times, value, &pre, a)) / p;
            (mean(w.t2 - p) - mean(w.t1)) / (w.t2 - p - w.t1)
        }
        None => (interpolate(times, value, w.t2) - interpolate(times, value, w.t1)) / (w.t2 - w.t1),
    };
    let mut flags = Vec::new();
    if w.period.is_none() {
        flags.push(EstimateFlag::NoPeriodDetected);
    }
    if s_t < 0.0 {
        flags.push(EstimateFlag::NegativeSpeed);
    }
    Ok(SpeedEstimate {
        s_t,
        method,
        window: (w.t1, w.t2),
        samples: times.iter().filter(|&&t| t >= w.t1 && t <= w.t2).count(),
        quenched: false,
        quench_time: None,
        period: w.period,
        damping: None,
        flags,
    })
}

/// Average growth rate of the burned volume over a periodic window.
pub fn estimate_window_average(series: &DiagnosticsSeries) -> Result<SpeedEstimate> {
    window_estimate(&series.times, &series.burned_volume, &series.burned_volume, Method::WindowAverage)
}

/// Average growth rate of `−G` at the probe, with the damping trend of `G'`.
///
/// The value uses the recorded `G`, which reinitialization cannot shift across
/// the integer level sets; the period and the trend use the PDE-only record.
pub fn estimate_pointwise(series: &DiagnosticsSeries) -> Result<SpeedEstimate> {
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<f64>>();
    let value = neg(&series.g_probe);
    let pde = neg(&series.g_pde);
    let mut est = window_estimate(&series.times, &value, &pde, Method::Pointwise)?;
    est.damping = damping_trend(&series.times, &pde, est.window.0, est.window.1, est.period);
    Ok(est)
}

/// Burned-volume quench check with the given threshold and hold time.
pub fn detect_quench(series: &DiagnosticsSeries, s_l: f64, threshold: f64, hold_time: f64) -> QuenchReport {
    detect_quench_in(&series.times, &series.burned_volume, s_l, threshold, hold_time)
}

/// Per-period mean and oscillation amplitude of the rate of `cumulative` over
/// `[t1, t2]`. Without a period the window is split into four pieces.
pub fn damping_trend(
    times: &[f64],
    cumulative: &[f64],
    t1: f64,
    t2: f64,
    period: Option<f64>,
) -> Option<DampingTrend> {
    let len = period.unwrap_or((t2 - t1) / 4.0);
    let count = ((t2 - t1) / len + 1e-9).floor() as usize;
    if count < 2 || !(len > 0.0) {
        return None;
    }
    const BINS: usize = 32;
    let mut mids = Vec::with_capacity(count);
    let mut means = Vec::with_capacity(count);
    let mut log_amps = Vec::with_capacity(count);
    for k in 0..count {
        let a = t2 - (count - k) as f64 * len;
        let b = a + len;
        let rate = binned_rate(times, cumulative, a, b, BINS);
        let (lo, hi) = rate.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
        mids.push(0.5 * (a + b));
        means.push((interpolate(times, cumulative, b) - interpolate(times, cumulative, a)) / len);
        log_amps.push((hi - lo).max(1e-300).ln());
    }
    let overall = means.iter().sum::<f64>() / count as f64;
    let mean_slope = ls_slope(&mids, &means);
    Some(DampingTrend {
        mean_drift: if overall != 0.0 { mean_slope / overall.abs() } else { mean_slope },
        amplitude_decay: -ls_slope(&mids, &log_amps),
        periods: count,
    })
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}
