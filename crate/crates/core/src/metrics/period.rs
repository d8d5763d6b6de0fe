//! Uniform resampling and autocorrelation period detection.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Linear interpolation of `(times, values)` at `t`, clamped to the ends.
pub fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t <= times[0] {
        return values[0];
    }
    if t >= times[n - 1] {
        return values[n - 1];
    }
    let hi = times.partition_point(|&s| s < t);
    let lo = hi - 1;
    let w = (t - times[lo]) / (times[hi] - times[lo]);
    values[lo] + w * (values[hi] - values[lo])
}

/// Bin-averaged rate of a cumulative series on `m` uniform bins over `[t0, t1]`.
pub fn binned_rate(times: &[f64], cumulative: &[f64], t0: f64, t1: f64, m: usize) -> Vec<f64> {
    let dt = (t1 - t0) / m as f64;
    let mut prev = interpolate(times, cumulative, t0);
    (1..=m)
        .map(|b| {
            let c = interpolate(times, cumulative, t0 + b as f64 * dt);
            let r = (c - prev) / dt;
            prev = c;
            r
        })
        .collect()
}

/// Normalized autocorrelation of `x` (mean removed, each lag divided by its
/// overlap length); `None` for a flat signal.
pub fn autocorrelation(x: &[f64]) -> Option<Vec<f64>> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let scale = x.iter().fold(mean.abs(), |m, v| m.max(v.abs())).max(1e-300);
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if var <= (1e-12 * scale).powi(2) * n as f64 {
        return None;
    }
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let zero = buf[0].re / n as f64;
    Some(buf[..n].iter().enumerate().map(|(lag, c)| c.re / (n - lag) as f64 / zero).collect())
}

/// Minimum normalized autocorrelation accepted as a periodic peak.
pub const PEAK_THRESHOLD: f64 = 0.3;

/// Period of a uniformly sampled signal with spacing `dt`: the first
/// autocorrelation peak after the first zero crossing that comes within 10% of
/// the highest one, searching lags below half the record.
pub fn detect_period_uniform(x: &[f64], dt: f64) -> Option<f64> {
    let half = x.len() / 2;
    if half < 3 {
        return None;
    }
    let acf = autocorrelation(x)?;
    let first_neg = acf.iter().take(half).position(|&v| v < 0.0)?;
    let top = acf[first_neg..half].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top < PEAK_THRESHOLD {
        return None;
    }
    let lag = (first_neg.max(1)..half - 1)
        .find(|&k| acf[k] >= 0.9 * top && acf[k] >= acf[k - 1] && acf[k] >= acf[k + 1])?;
    let base = refine_peak(&acf, lag);
    // the peak at the largest whole multiple of the lag pins the period more tightly
    for mult in (2..=(half - 2) / lag.max(1)).rev() {
        let guess = (base * mult as f64).round() as usize;
        let reach = mult / 2 + 1;
        let (lo, hi) = (guess.saturating_sub(reach).max(1), (guess + reach).min(half - 2));
        if lo > hi {
            continue;
        }
        let k = (lo..=hi).max_by(|&a, &b| acf[a].total_cmp(&acf[b])).unwrap_or(lo);
        if acf[k] >= PEAK_THRESHOLD && acf[k] >= acf[k - 1] && acf[k] >= acf[k + 1] {
            return Some(refine_peak(&acf, k) / mult as f64 * dt);
        }
    }
    Some(base * dt)
}

/// Parabolic refinement of a discrete peak position.
fn refine_peak(acf: &[f64], lag: usize) -> f64 {
    let (a, b, c) = (acf[lag - 1], acf[lag], acf[lag + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 1e-300 { 0.5 * (a - c) / denom } else { 0.0 };
    lag as f64 + shift.clamp(-0.5, 0.5)
}

/// Running trapezoid integral of a piecewise-linear series.
pub fn prefix_integral(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..times.len() {
        acc += 0.5 * (values[k] + values[k - 1]) * (times[k] - times[k - 1]);
        out.push(acc);
    }
    out
}

/// Integral of the linear interpolant from `times[0]` to `t` (clamped to the record).
pub fn integral_to(times: &[f64], values: &[f64], prefix: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t <= times[0] {
        return 0.0;
    }
    if t >= times[n - 1] {
        return prefix[n - 1];
    }
    let hi = times.partition_point(|&s| s < t);
    let lo = hi - 1;
    let v = interpolate(times, values, t);
    prefix[lo] + 0.5 * (values[lo] + v) * (t - times[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interpolation_is_linear_and_clamped() {
        let t = [0.0, 1.0, 3.0];
        let v = [0.0, 2.0, 6.0];
        assert_eq!(interpolate(&t, &v, 2.0), 4.0);
        assert_eq!(interpolate(&t, &v, -1.0), 0.0);
        assert_eq!(interpolate(&t, &v, 5.0), 6.0);
        assert_eq!(interpolate(&t, &v, 1.0), 2.0);
    }

    #[test]
    fn finds_a_sine_period() {
        let dt = 0.01;
        let x: Vec<f64> = (0..1000).map(|i| 1.0 + 0.3 * (2.0 * PI * i as f64 * dt / 0.7).sin()).collect();
        let p = detect_period_uniform(&x, dt).unwrap();
        assert!((p - 0.7).abs() < 2e-3, "{p}");
    }

    #[test]
    fn spike_train_period() {
        // one spike every 4.1 samples on average
        let x: Vec<f64> = (0..2000).map(|i| if ((i as f64) / 4.1).fract() < 1.0 / 4.1 { 1.0 } else { 0.0 }).collect();
        // a whole multiple of the period is an acceptable answer
        let p = detect_period_uniform(&x, 1.0).unwrap();
        let m = (p / 4.1).round();
        assert!(m >= 1.0 && (p - 4.1 * m).abs() < 5e-3 * m, "{p}");
    }

    #[test]
    fn integral_of_a_line() {
        let t = [0.0, 1.0, 2.5];
        let v = [1.0, 3.0, 6.0];
        let pre = prefix_integral(&t, &v);
        assert_eq!(integral_to(&t, &v, &pre, 1.0), 2.0);
        assert!((integral_to(&t, &v, &pre, 2.0) - (2.0 + 4.0)).abs() < 1e-15);
    }

    #[test]
    fn flat_signal_has_no_period() {
        assert!(detect_period_uniform(&[2.0; 500], 0.01).is_none());
    }

    #[test]
    fn binned_rate_of_a_line() {
        let t: Vec<f64> = (0..101).map(|i| i as f64 * 0.1).collect();
        let c: Vec<f64> = t.iter().map(|s| 3.0 * s).collect();
        assert!(binned_rate(&t, &c, 1.0, 9.0, 16).iter().all(|r| (r - 3.0).abs() < 1e-12));
    }
}
