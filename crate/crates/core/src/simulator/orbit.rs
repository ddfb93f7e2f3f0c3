use serde::{Deserialize, Serialize};

use super::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOptions {
    /// Leading fraction of the run discarded as transient.
    pub transient_fraction: f64,
    /// Largest coefficient of variation of peak intervals accepted as periodic.
    pub max_interval_cv: f64,
    /// Smallest peak-to-trough range of the signal accepted as an oscillation.
    pub min_amplitude: f64,
    /// Required ratio of the late-half range to the early-half range.
    pub min_persistence: f64,
    /// Fewest peaks needed for a period estimate.
    pub min_peaks: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            transient_fraction: 0.5,
            max_interval_cv: 0.02,
            min_amplitude: 1e-5,
            min_persistence: 0.9,
            min_peaks: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    pub is_periodic: bool,
    pub period: Option<f64>,
    pub peaks: usize,
    pub interval_cv: Option<f64>,
    /// Peak-to-trough range after the transient.
    pub range: f64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub is_periodic: bool,
    pub period: Option<f64>,
    pub amplitude_m: (f64, f64),
    pub amplitude_a: (f64, f64),
    /// Largest spatial `std/mean` over the post-transient window.
    pub spatial_inhomogeneity: f64,
    pub peaks: usize,
    pub interval_cv: Option<f64>,
    pub diagnostic: Option<String>,
}

/// Refined abscissa of the vertex of the parabola through three equally spaced samples.
fn parabolic_peak(t: &[f64], y: &[f64], i: usize) -> f64 {
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let den = y0 - 2.0 * y1 + y2;
    if den == 0.0 {
        return t[i];
    }
    let shift = 0.5 * (y0 - y2) / den;
    t[i] + shift.clamp(-1.0, 1.0) * 0.5 * (t[i + 1] - t[i - 1])
}

/// Period of `signal` from intervals between successive maxima above the midline.
///
/// Each excursion above the midline contributes one peak (hysteresis against
/// ripples); a run is periodic when the intervals agree to `max_interval_cv`,
/// the range exceeds `min_amplitude` and the oscillation is not decaying.
pub fn estimate_period(times: &[f64], signal: &[f64], opts: &OrbitOptions) -> PeriodEstimate {
    let fail = |range: f64, peaks: usize, cv: Option<f64>, why: String| PeriodEstimate {
        is_periodic: false,
        period: None,
        peaks,
        interval_cv: cv,
        range,
        diagnostic: Some(why),
    };
    assert_eq!(times.len(), signal.len());
    let start = ((times.len() as f64) * opts.transient_fraction).floor() as usize;
    let (t, y) = (&times[start..], &signal[start..]);
    if y.len() < 5 {
        return fail(0.0, 0, None, "signal too short after the transient".into());
    }
    let range_of = |s: &[f64]| {
        let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        (lo, hi)
    };
    let (lo, hi) = range_of(y);
    let range = hi - lo;
    if !(range > opts.min_amplitude) {
        return fail(
            range,
            0,
            None,
            format!("range {range:e} below detection threshold"),
        );
    }
    let half = y.len() / 2;
    let early = range_of(&y[..half]);
    let late = range_of(&y[half..]);
    let persistence = (late.1 - late.0) / (early.1 - early.0);
    let mid = 0.5 * (lo + hi);

    let mut peaks = Vec::new();
    let mut best: Option<usize> = None;
    // Excursions cut by either end of the window are incomplete and skipped.
    let first_below = y.iter().position(|&v| v <= mid).unwrap_or(y.len());
    for i in first_below.max(1)..y.len() - 1 {
        if y[i] > mid {
            if best.map_or(true, |b| y[i] > y[b]) {
                best = Some(i);
            }
        } else if let Some(b) = best.take() {
            peaks.push(parabolic_peak(t, y, b));
        }
    }
    if peaks.len() < opts.min_peaks {
        return fail(
            range,
            peaks.len(),
            None,
            format!("only {} peaks detected", peaks.len()),
        );
    }
    let intervals: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    let n = intervals.len() as f64;
    let mean = intervals.iter().sum::<f64>() / n;
    let sd = (intervals.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    let cv = sd / mean;
    if cv >= opts.max_interval_cv {
        return fail(
            range,
            peaks.len(),
            Some(cv),
            format!("irregular peak intervals (cv {cv:.3e})"),
        );
    }
    if persistence < opts.min_persistence {
        return fail(
            range,
            peaks.len(),
            Some(cv),
            format!("oscillation decaying (late/early range {persistence:.3})"),
        );
    }
    PeriodEstimate {
        is_periodic: true,
        period: Some(mean),
        peaks: peaks.len(),
        interval_cv: Some(cv),
        range,
        diagnostic: None,
    }
}

pub fn detect_orbit<S>(traj: &Trajectory<S>, transient_fraction: f64) -> OrbitSummary {
    detect_orbit_with(
        traj,
        &OrbitOptions {
            transient_fraction,
            ..OrbitOptions::default()
        },
    )
}

/// Orbit summary from the spatial mean of `m`, with extrema over all nodes.
pub fn detect_orbit_with<S>(traj: &Trajectory<S>, opts: &OrbitOptions) -> OrbitSummary {
    let mon = &traj.monitor;
    let est = estimate_period(&mon.times, &mon.mean_m, opts);
    let start = ((mon.times.len() as f64) * opts.transient_fraction).floor() as usize;
    let start = start.min(mon.times.len().saturating_sub(1));
    let lo = |v: &[f64]| v[start..].iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v[start..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    OrbitSummary {
        is_periodic: est.is_periodic,
        period: est.period,
        amplitude_m: (lo(&mon.min_m), hi(&mon.max_m)),
        amplitude_a: (lo(&mon.min_a), hi(&mon.max_a)),
        spatial_inhomogeneity: hi(&mon.inhomogeneity),
        peaks: est.peaks,
        interval_cv: est.interval_cv,
        diagnostic: est.diagnostic,
    }
}
