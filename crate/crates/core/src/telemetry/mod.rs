//! Dual-rate flight logging, log and settings file formats, and flight metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod metrics;
pub mod record;
pub mod sidecar;

pub use metrics::{compute_metrics, FlightMetrics, MetricsWindow, RESPONSE_DWELL_S};
pub use sidecar::{SettingsSidecar, SIDECAR_SUFFIX};
pub use record::{check_header, format_record, header_line, parse_record, FlightLog, LogRecord, HEADER};

use crate::fsm::FlightPhase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TelemetryError {
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCountMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("header column {column} is {found:?}")]
    HeaderMismatch { column: usize, found: String },
    #[error("line {line}: cannot parse column {column}")]
    UnparsableField { line: usize, column: &'static str },
    #[error("line {line}: time {t_s} does not increase")]
    NonMonotonicTime { line: usize, t_s: f64 },
    #[error("log has no header line")]
    MissingHeader,
    #[error("no records in the evaluation window")]
    EmptyWindow,
}

/// Pad-side logging period.
pub const LOW_RATE_PERIOD_S: f64 = 1.0;
/// Flight logging period.
pub const HIGH_RATE_PERIOD_S: f64 = 1.0 / 60.0;

pub fn log_period_s(phase: FlightPhase) -> f64 {
    match phase {
        FlightPhase::PadIdle | FlightPhase::Armed | FlightPhase::Landed => LOW_RATE_PERIOD_S,
        FlightPhase::PoweredAscent
        | FlightPhase::Coast
        | FlightPhase::DescentRecovery
        | FlightPhase::Abort => HIGH_RATE_PERIOD_S,
    }
}

pub fn sample_due(phase: FlightPhase, last_sample_t_s: f64, now_t_s: f64) -> bool {
    now_t_s - last_sample_t_s >= log_period_s(phase) - 1e-9
}

/// Decides which control ticks are logged.
///
/// Samples are scheduled on a fixed grid so the rate does not drift when the loop period
/// does not divide the log period. A phase change always logs and restarts the grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogScheduler {
    mark: Option<(FlightPhase, f64)>,
}

impl LogScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn should_log(&mut self, phase: FlightPhase, now_t_s: f64) -> bool {
        let period = log_period_s(phase);
        match self.mark {
            Some((p, mark)) if p == phase => {
                if !sample_due(phase, mark, now_t_s) {
                    return false;
                }
                let next = mark + period;
                let mark = if now_t_s - next > 2.0 * period { now_t_s } else { next };
                self.mark = Some((phase, mark));
                true
            }
            _ => {
                self.mark = Some((phase, now_t_s));
                true
            }
        }
    }
}

/// The `summary.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max_deviation_deg: f64,
    pub max_deviation_t_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_time_s: Option<f64>,
    pub final_phase: FlightPhase,
    pub phase_times_s: BTreeMap<String, f64>,
}

impl Summary {
    pub fn new(metrics: &FlightMetrics, final_phase: FlightPhase) -> Self {
        Self {
            max_deviation_deg: metrics.max_deviation_deg,
            max_deviation_t_s: metrics.max_deviation_t_s,
            response_time_s: metrics.response_time_s,
            final_phase,
            phase_times_s: metrics.phase_times_s.clone(),
        }
    }
}
