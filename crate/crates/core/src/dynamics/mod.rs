//! Rigid-body flight simulator, motor model and the ground-test stand.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod body;
pub mod motor;
pub mod sim;

pub use body::{
    gimbal_from_servo, specific_force, step_dynamics, thrust_direction, Airframe, Environment,
    Forcing, RigidBodyState, VehicleParams,
};
pub use motor::{format_eng, parse_eng, MotorError, MotorModel, ThrustCurve};
pub use sim::{
    run_flight_sim, run_ground_test, simulate, tune_plant, tune_vehicle, ControlGains,
    DisturbanceConfig, ReferencePlant, SimConfig, SimRun, SimSettings, TorquePulse, TuneResult,
    TuneSettings,
};

use crate::attitude::AttitudeError;
use crate::fsm::FsmConfig;
use crate::GimbalGeometry;
use crate::control::ControlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    #[default]
    Flight,
    /// Translation locked, one-third thrust.
    GroundTest,
}

impl SimMode {
    pub fn thrust_scale(self) -> f64 {
        match self {
            SimMode::Flight => 1.0,
            SimMode::GroundTest => 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("state became non-finite at t = {t_s} s")]
    NonFiniteState { t_s: f64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("gyro calibration failed: {0}")]
    Calibration(#[from] AttitudeError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Motor(#[from] MotorError),
}

/// The bundled E12-class reference curve, as shipped in `data/motors`.
pub const REFERENCE_ENG: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/motors/e12_reference.eng"));

pub fn reference_motor() -> MotorModel {
    parse_eng(REFERENCE_ENG).expect("bundled motor file parses")
}

impl SimConfig {
    /// Default vehicle on the reference motor with the given gains.
    pub fn reference(gains: ControlGains) -> Self {
        Self {
            vehicle: VehicleParams::default(),
            environment: Environment::default(),
            motor: reference_motor(),
            geometry: GimbalGeometry::default(),
            fsm: FsmConfig::default(),
            gains,
            disturbances: DisturbanceConfig::default(),
            sim: SimSettings::default(),
        }
    }
}
