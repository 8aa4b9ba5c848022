//! Ziegler–Nichols ultimate-cycle tuning.
//!
//! A [`TuningPlant`] runs a proportional-only closed loop at a given gain and returns the
//! error trace. The trace is classified by the amplitude ratio of successive positive peaks;
//! the ultimate gain is the smallest gain whose oscillation no longer decays, located by
//! bisection.

use serde::{Deserialize, Serialize};

use super::{ControlError, PidGains};

/// Peaks compared to decide the oscillation class; the first peak is treated as transient.
pub const MIN_SUSTAINED_PEAKS: usize = 4;
/// Accepted band of the successive-peak amplitude ratio for a sustained oscillation.
pub const SUSTAINED_RATIO_BAND: (f64, f64) = (0.9, 1.1);

/// Classic PID row of the Ziegler–Nichols table.
pub fn zn_classic_gains(ku: f64, tu_s: f64) -> Result<PidGains<f64>, ControlError> {
    if !(ku > 0.0) || !ku.is_finite() {
        return Err(ControlError::NonPositiveInput("ku"));
    }
    if !(tu_s > 0.0) || !tu_s.is_finite() {
        return Err(ControlError::NonPositiveInput("tu_s"));
    }
    Ok(PidGains::new(0.6 * ku, 1.2 * ku / tu_s, 0.075 * ku * tu_s))
}

/// Error samples of a proportional-only run, uniformly spaced by `dt_s`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorTrace {
    pub dt_s: f64,
    pub errors: Vec<f64>,
    /// Set by the plant when the run was cut short by divergence.
    pub diverged: bool,
}

/// Closed-loop evaluation used by [`find_ultimate_cycle`].
pub trait TuningPlant {
    fn run_proportional(&self, kp: f64) -> Result<ErrorTrace, ControlError>;
}

impl<F> TuningPlant for F
where
    F: Fn(f64) -> Result<ErrorTrace, ControlError>,
{
    fn run_proportional(&self, kp: f64) -> Result<ErrorTrace, ControlError> {
        self(kp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OscillationClass {
    Decaying,
    Sustained,
    Growing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oscillation {
    pub class: OscillationClass,
    /// Interpolated (time, amplitude) of positive peaks, transient peak excluded.
    pub peaks: Vec<(f64, f64)>,
    /// Geometric mean of successive peak ratios; 0 when fewer than two peaks.
    pub mean_ratio: f64,
    /// Mean peak-to-peak period, seconds; `None` with fewer than two peaks.
    pub period_s: Option<f64>,
}

/// Positive local maxima refined by a parabola through the neighbouring samples.
fn positive_peaks(trace: &ErrorTrace) -> Vec<(f64, f64)> {
    let e = &trace.errors;
    let floor = e.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 1e-9;
    let mut peaks = Vec::new();
    for i in 1..e.len().saturating_sub(1) {
        let (a, b, c) = (e[i - 1], e[i], e[i + 1]);
        if b > floor && b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let offset = if denom != 0.0 {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            let amp = b - 0.25 * (a - c) * offset;
            peaks.push(((i as f64 + offset) * trace.dt_s, amp));
        }
    }
    peaks
}

pub fn classify_oscillation(trace: &ErrorTrace) -> Oscillation {
    let all = positive_peaks(trace);
    let peaks: Vec<_> = all.into_iter().skip(1).collect();
    let (mean_ratio, period_s) = if peaks.len() >= 2 {
        let n = (peaks.len() - 1) as f64;
        let first = peaks[0];
        let last = peaks[peaks.len() - 1];
        ((last.1 / first.1).powf(1.0 / n), Some((last.0 - first.0) / n))
    } else {
        (0.0, None)
    };
    let diverged = trace.diverged || trace.errors.iter().any(|v| !v.is_finite());
    let (lo, hi) = SUSTAINED_RATIO_BAND;
    let class = if diverged {
        OscillationClass::Growing
    } else if peaks.len() < MIN_SUSTAINED_PEAKS || mean_ratio < lo {
        OscillationClass::Decaying
    } else if mean_ratio > hi {
        OscillationClass::Growing
    } else {
        OscillationClass::Sustained
    };
    Oscillation {
        class,
        peaks,
        mean_ratio,
        period_s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UltimateCycle {
    pub ku: f64,
    pub tu_s: f64,
    /// Plant evaluations spent.
    pub evaluations: usize,
}

/// Bisects `[kp_min, kp_max]` for the smallest gain whose P-only oscillation does not decay.
///
/// `tolerance` is the relative width of the final bracket.
pub fn find_ultimate_cycle<P: TuningPlant + ?Sized>(
    plant: &P,
    kp_min: f64,
    kp_max: f64,
    tolerance: f64,
) -> Result<UltimateCycle, ControlError> {
    if !(kp_min > 0.0) || !(kp_max > kp_min) || !kp_max.is_finite() {
        return Err(ControlError::NonPositiveInput("kp range"));
    }
    if !(tolerance > 0.0) {
        return Err(ControlError::NonPositiveInput("tolerance"));
    }
    let mut evaluations = 0;
    let mut eval = |kp: f64| -> Result<Oscillation, ControlError> {
        evaluations += 1;
        Ok(classify_oscillation(&plant.run_proportional(kp)?))
    };

    let mut upper = eval(kp_max)?;
    if upper.class == OscillationClass::Decaying {
        return Err(ControlError::NoSustainedOscillation { kp_max });
    }
    let lower = eval(kp_min)?;
    match lower.class {
        OscillationClass::Growing => return Err(ControlError::UnstableAtMinimum { kp_min }),
        OscillationClass::Sustained => {
            return finish(kp_min, &lower, evaluations);
        }
        OscillationClass::Decaying => {}
    }

    let (mut lo, mut hi) = (kp_min, kp_max);
    while hi - lo > tolerance * hi {
        let mid = 0.5 * (lo + hi);
        let osc = eval(mid)?;
        if osc.class == OscillationClass::Decaying {
            lo = mid;
        } else {
            hi = mid;
            upper = osc;
        }
    }
    finish(hi, &upper, evaluations)
}

fn finish(ku: f64, osc: &Oscillation, evaluations: usize) -> Result<UltimateCycle, ControlError> {
    let tu_s = osc
        .period_s
        .ok_or_else(|| ControlError::Plant(format!("no measurable period at kp = {ku}")))?;
    Ok(UltimateCycle {
        ku,
        tu_s,
        evaluations,
    })
}
