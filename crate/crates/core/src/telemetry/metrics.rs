//! Maximum deviation and response time read from a log.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FlightLog, LogRecord, TelemetryError};
use crate::fsm::FlightPhase;

/// Time the tilt must stay inside the band to count as corrected.
pub const RESPONSE_DWELL_S: f64 = 0.2;
/// Band floor and fraction of the peak.
pub const RESPONSE_BAND_FLOOR_DEG: f64 = 1.0;
pub const RESPONSE_BAND_FRACTION: f64 = 0.1;

/// Records the metrics are taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsWindow {
    /// Records logged in PoweredAscent.
    #[default]
    PoweredAscent,
    /// Records with non-zero thrust.
    Thrust,
}

impl MetricsWindow {
    pub fn contains(self, r: &LogRecord) -> bool {
        match self {
            MetricsWindow::PoweredAscent => r.phase == FlightPhase::PoweredAscent,
            MetricsWindow::Thrust => r.thrust_n > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightMetrics {
    pub max_deviation_deg: f64,
    pub max_deviation_t_s: f64,
    pub response_time_s: Option<f64>,
    /// First logged time of each visited phase.
    pub phase_times_s: BTreeMap<String, f64>,
}

pub fn phase_times(log: &FlightLog) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for r in &log.records {
        out.entry(r.phase.name().to_string()).or_insert(r.t_s);
    }
    out
}

/// Time from the tilt peak after `t_d` until the tilt enters the band for good.
///
/// The entry time is interpolated between the last sample outside and the first inside.
fn response_time(window: &[&LogRecord], t_d: f64) -> Option<f64> {
    let after: Vec<&LogRecord> = window.iter().copied().filter(|r| r.t_s >= t_d).collect();
    let (ip, peak) = after
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
            Some((_, m)) if m >= r.tilt_deg => best,
            _ => Some((i, r.tilt_deg)),
        })?;
    let band = RESPONSE_BAND_FLOOR_DEG.max(RESPONSE_BAND_FRACTION * peak);
    if !(peak > band) {
        return None;
    }
    let t_peak = after[ip].t_s;
    let mut k = ip + 1;
    while k < after.len() {
        if after[k].tilt_deg < band {
            let t_in = after[k].t_s;
            let held = after[k..]
                .iter()
                .take_while(|r| r.t_s <= t_in + RESPONSE_DWELL_S)
                .all(|r| r.tilt_deg < band);
            if held {
                let (a, b) = (after[k - 1], after[k]);
                let frac = (a.tilt_deg - band) / (a.tilt_deg - b.tilt_deg);
                let t_cross = a.t_s + frac * (b.t_s - a.t_s);
                return Some(t_cross - t_peak).filter(|v| *v > 0.0);
            }
        }
        k += 1;
    }
    None
}

/// Maximum tilt over the window, the time of its last occurrence, and the response time to
/// a disturbance at `disturbance_t_s`.
pub fn compute_metrics(
    log: &FlightLog,
    window: MetricsWindow,
    disturbance_t_s: Option<f64>,
) -> Result<FlightMetrics, TelemetryError> {
    let in_window: Vec<&LogRecord> = log.records.iter().filter(|r| window.contains(r)).collect();
    let (max_deviation_deg, max_deviation_t_s) = in_window
        .iter()
        .fold(None, |best: Option<(f64, f64)>, r| match best {
            Some((m, _)) if m > r.tilt_deg => best,
            _ => Some((r.tilt_deg, r.t_s)),
        })
        .ok_or(TelemetryError::EmptyWindow)?;
    let response_time_s = disturbance_t_s.and_then(|t| response_time(&in_window, t));
    Ok(FlightMetrics {
        max_deviation_deg,
        max_deviation_t_s,
        response_time_s,
        phase_times_s: phase_times(log),
    })
}
