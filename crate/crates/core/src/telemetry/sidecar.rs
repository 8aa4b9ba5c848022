//! Settings written next to each log.

use serde::{Deserialize, Serialize};

use super::MetricsWindow;
use crate::config::RunConfig;
use crate::dynamics::{ControlGains, SimMode, SimRun};
use crate::fsm::FsmConfig;
use crate::{GimbalGeometry, GyroBias};

/// Suffix of the sidecar file relative to the log stem.
pub const SIDECAR_SUFFIX: &str = ".settings.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsSidecar {
    pub gains: ControlGains,
    pub gyro_bias: GyroBias,
    pub geometry: GimbalGeometry,
    pub fsm: FsmConfig,
    pub seed: u64,
    pub mode: SimMode,
    pub window: MetricsWindow,
    /// Absolute start of the torque pulse.
    pub disturbance_t_s: Option<f64>,
    /// The configuration exactly as run; loading it reproduces the log.
    pub config: RunConfig,
}

impl SettingsSidecar {
    pub fn new(resolved: &RunConfig, run: &SimRun) -> Self {
        Self {
            gains: resolved
                .control
                .gains
                .explicit()
                .unwrap_or_else(ControlGains::zero),
            gyro_bias: run.gyro_bias,
            geometry: resolved.geometry,
            fsm: resolved.fsm,
            seed: resolved.disturbances.seed,
            mode: resolved.sim.mode,
            window: run.window,
            disturbance_t_s: run.disturbance_t_s,
            config: resolved.clone(),
        }
    }
}
