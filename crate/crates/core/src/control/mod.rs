//! Pitch/yaw thrust-vector control: per-axis PID, gimbal-to-servo mixing and
//! Ziegler–Nichols tuning.
//!
//! Sign convention: a PID output `u` is a torque demand in the direction that increases the
//! controlled angle; the gimbal deflection is `-u`. The gimbal pitch axis rotates thrust about
//! body y and corrects Euler pitch; the gimbal yaw axis rotates thrust about body x and
//! corrects the other tilt component, which the Z-Y-X decomposition reports as roll. Spin
//! about the thrust axis (Euler yaw) cannot be actuated by a single nozzle and is left free.

mod pid;
pub mod tuning;

pub use pid::{pid_step, PidGains, PidState, PidTerms};
pub use tuning::{
    classify_oscillation, find_ultimate_cycle, zn_classic_gains, ErrorTrace, Oscillation,
    OscillationClass, TuningPlant, UltimateCycle,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attitude::EulerAngles;
use crate::real::Real;

/// Control authority from the gimbal requirement, degrees.
pub const DEFAULT_AUTHORITY_DEG: f64 = 10.0;
/// Mechanical range of the compliant gimbal, degrees.
pub const DEFAULT_MECHANICAL_RANGE_DEG: f64 = 15.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("{0} must be positive")]
    NonPositiveInput(&'static str),
    #[error("gains must be finite and non-negative")]
    InvalidGains,
    #[error("invalid gimbal geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("no sustained oscillation up to kp = {kp_max}; widen the kp range")]
    NoSustainedOscillation { kp_max: f64 },
    #[error("loop already unstable at kp = {kp_min}; lower kp_min")]
    UnstableAtMinimum { kp_min: f64 },
    #[error("tuning plant failed: {0}")]
    Plant(String),
}

/// Commanded thrust-vector deflection, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GimbalCommand<T> {
    pub pitch_deflect_deg: T,
    pub yaw_deflect_deg: T,
}

impl<T: Real> GimbalCommand<T> {
    pub fn new(pitch_deflect_deg: T, yaw_deflect_deg: T) -> Self {
        Self {
            pitch_deflect_deg,
            yaw_deflect_deg,
        }
    }

    pub fn neutral() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// Servo horn angles, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ServoCommand<T> {
    pub servo_pitch_deg: T,
    pub servo_yaw_deg: T,
}

impl<T: Real> ServoCommand<T> {
    pub fn new(servo_pitch_deg: T, servo_yaw_deg: T) -> Self {
        Self {
            servo_pitch_deg,
            servo_yaw_deg,
        }
    }
}

/// Pushrod linkage between servo horns and the engine mount.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GimbalGeometry<T> {
    /// Servo degrees per gimbal degree.
    pub linkage_ratio: T,
    pub authority_limit_deg: T,
    pub mechanical_range_deg: T,
    pub servo_rate_limit_dps: T,
    /// Servo trim added by the mixer, servo degrees, (pitch, yaw).
    pub servo_offset_deg: [T; 2],
    /// Transport delay between command and gimbal motion, seconds.
    pub actuator_delay_s: T,
}

impl<T: Real> Default for GimbalGeometry<T> {
    fn default() -> Self {
        Self {
            linkage_ratio: T::lit(2.0),
            authority_limit_deg: T::lit(DEFAULT_AUTHORITY_DEG),
            mechanical_range_deg: T::lit(DEFAULT_MECHANICAL_RANGE_DEG),
            servo_rate_limit_dps: T::lit(600.0),
            servo_offset_deg: [T::zero(), T::zero()],
            actuator_delay_s: T::lit(0.02),
        }
    }
}

impl<T: Real> GimbalGeometry<T> {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.linkage_ratio > T::zero()) {
            return Err(ControlError::InvalidGeometry("linkage_ratio must be > 0"));
        }
        if !(self.authority_limit_deg > T::zero()
            && self.authority_limit_deg <= self.mechanical_range_deg)
        {
            return Err(ControlError::InvalidGeometry(
                "need 0 < authority_limit_deg <= mechanical_range_deg",
            ));
        }
        if !(self.servo_rate_limit_dps > T::zero()) {
            return Err(ControlError::InvalidGeometry("servo_rate_limit_dps must be > 0"));
        }
        if !(self.actuator_delay_s >= T::zero()) || !self.actuator_delay_s.is_finite() {
            return Err(ControlError::InvalidGeometry("actuator_delay_s must be >= 0"));
        }
        Ok(())
    }

    /// Largest servo angle the linkage can reach.
    pub fn servo_limit_deg(&self) -> T {
        self.mechanical_range_deg * self.linkage_ratio
    }
}

/// Gains and memory for one controlled axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisController<T> {
    pub gains: PidGains<T>,
    pub state: PidState<T>,
}

impl<T: Real> AxisController<T> {
    /// Output limit equal to the authority limit; default integral limit.
    pub fn new(gains: PidGains<T>, authority_limit_deg: T) -> Self {
        Self {
            gains,
            state: PidState::for_gains(&gains, authority_limit_deg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerStep<T> {
    pub command: GimbalCommand<T>,
    pub pitch: AxisController<T>,
    pub yaw: AxisController<T>,
    pub pitch_terms: PidTerms<T>,
    pub yaw_terms: PidTerms<T>,
}

fn angle_error<T: Real>(setpoint: T, measured: T) -> T {
    let full = T::lit(360.0);
    let half = T::lit(180.0);
    let mut e = setpoint - measured;
    if e.abs() > half {
        e = e - full * ((e + half) / full).floor();
    }
    e
}

/// Runs both tilt channels once and returns the clamped gimbal deflection.
pub fn controller_step<T: Real>(
    attitude: &EulerAngles<T>,
    setpoint: &EulerAngles<T>,
    pitch: &AxisController<T>,
    yaw: &AxisController<T>,
    authority_limit_deg: T,
    dt_s: T,
) -> Result<ControllerStep<T>, ControlError> {
    let pitch_error = angle_error(setpoint.pitch_deg, attitude.pitch_deg);
    let lateral_error = angle_error(setpoint.roll_deg, attitude.roll_deg);
    let (u_pitch, pitch_state, pitch_terms) =
        pid_step(&pitch.state, &pitch.gains, pitch_error, dt_s)?;
    let (u_yaw, yaw_state, yaw_terms) = pid_step(&yaw.state, &yaw.gains, lateral_error, dt_s)?;
    let clamp = |d: T| d.max(-authority_limit_deg).min(authority_limit_deg);
    Ok(ControllerStep {
        command: GimbalCommand::new(clamp(-u_pitch), clamp(-u_yaw)),
        pitch: AxisController {
            state: pitch_state,
            ..*pitch
        },
        yaw: AxisController {
            state: yaw_state,
            ..*yaw
        },
        pitch_terms,
        yaw_terms,
    })
}

/// Converts a gimbal command to servo angles through the linkage.
///
/// Target is `cmd × ratio + trim`; motion from `prev` is limited by the servo slew rate and
/// the result is clamped to the mechanical range.
pub fn mix_to_servos<T: Real>(
    cmd: &GimbalCommand<T>,
    geom: &GimbalGeometry<T>,
    prev: &ServoCommand<T>,
    dt_s: T,
) -> ServoCommand<T> {
    let max_step = geom.servo_rate_limit_dps * dt_s;
    let limit = geom.servo_limit_deg();
    let axis = |deflect: T, trim: T, prev: T| {
        let target = deflect * geom.linkage_ratio + trim;
        let moved = prev + (target - prev).max(-max_step).min(max_step);
        moved.max(-limit).min(limit)
    };
    ServoCommand::new(
        axis(
            cmd.pitch_deflect_deg,
            geom.servo_offset_deg[0],
            prev.servo_pitch_deg,
        ),
        axis(cmd.yaw_deflect_deg, geom.servo_offset_deg[1], prev.servo_yaw_deg),
    )
}
