//! Gyro-only attitude estimation: bias calibration on the pad, exponential-map integration
//! of body rates, and conversion to Tait-Bryan angles and tilt from vertical.
//!
//! Frames: world is z-up; the vehicle's thrust axis is body +z. Euler angles use the
//! intrinsic Z-Y-X order, so for an upright vehicle "yaw" is spin about the thrust axis
//! while pitch and roll are the two tilt components.

mod quaternion;
mod vector;

pub use quaternion::Quaternion;
pub use vector::Vec3;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

/// Default per-axis variance bound used to decide the vehicle is stationary, (rad/s)².
pub const DEFAULT_MAX_BIAS_VARIANCE: f64 = 1e-4;
/// Default minimum calibration window.
pub const DEFAULT_MIN_BIAS_SAMPLES: usize = 256;

/// Pitch distance from ±90° (degrees) at which roll is folded into yaw.
const GIMBAL_LOCK_EPS_DEG: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttitudeError {
    #[error("too few calibration samples: {count} < {min}")]
    TooFewSamples { count: usize, min: usize },
    #[error("motion detected during calibration: axis {axis} variance {variance:e} > {max:e}")]
    MotionDetected {
        axis: char,
        variance: f64,
        max: f64,
    },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
}

/// Tait-Bryan orientation in degrees (intrinsic Z-Y-X).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles<T> {
    /// (−180, 180]
    pub yaw_deg: T,
    /// [−90, 90]
    pub pitch_deg: T,
    /// (−180, 180]
    pub roll_deg: T,
}

impl<T: Real> EulerAngles<T> {
    pub fn new(yaw_deg: T, pitch_deg: T, roll_deg: T) -> Self {
        Self {
            yaw_deg,
            pitch_deg,
            roll_deg,
        }
    }

    pub fn level() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample<T> {
    pub t_s: T,
    /// Body-frame angular rate, rad/s.
    pub gyro_rps: Vec3<T>,
    /// Body-frame specific force, m/s².
    pub accel_mps2: Vec3<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GyroBias<T> {
    pub bias_rps: Vec3<T>,
    pub sample_count: usize,
    pub variance: Vec3<T>,
}

impl<T: Real> GyroBias<T> {
    /// An uncalibrated (zero) bias.
    pub fn zero() -> Self {
        Self {
            bias_rps: Vec3::zero(),
            sample_count: 0,
            variance: Vec3::zero(),
        }
    }
}

/// Estimates the gyro bias as the per-axis mean of stationary samples.
///
/// Variance is the population variance of each axis; any axis above `max_variance` means the
/// vehicle moved during the window.
pub fn calibrate_bias<T: Real>(
    samples: &[ImuSample<T>],
    min_count: usize,
    max_variance: T,
) -> Result<GyroBias<T>, AttitudeError> {
    if samples.is_empty() || samples.len() < min_count {
        return Err(AttitudeError::TooFewSamples {
            count: samples.len(),
            min: min_count,
        });
    }
    if samples.iter().any(|s| !s.gyro_rps.is_finite()) {
        return Err(AttitudeError::NonFiniteInput);
    }
    let n = T::from_usize(samples.len()).ok_or(AttitudeError::NonFiniteInput)?;
    let mean = samples
        .iter()
        .fold(Vec3::zero(), |acc, s| acc + s.gyro_rps)
        .scale(T::one() / n);
    let variance = samples
        .iter()
        .map(|s| {
            let d = s.gyro_rps - mean;
            d.hadamard(&d)
        })
        .fold(Vec3::zero(), |acc, d| acc + d)
        .scale(T::one() / n);
    for (axis, v) in ['x', 'y', 'z'].into_iter().zip(variance.to_array()) {
        if v > max_variance {
            return Err(AttitudeError::MotionDetected {
                axis,
                variance: v.to_f64().unwrap_or(f64::NAN),
                max: max_variance.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(GyroBias {
        bias_rps: mean,
        sample_count: samples.len(),
        variance,
    })
}

/// Advances `q` by the bias-corrected body rate held constant over `dt_s`.
///
/// Uses the exponential map, so a constant rate is integrated exactly.
pub fn integrate_attitude<T: Real>(
    q: Quaternion<T>,
    omega_rps: Vec3<T>,
    bias: &GyroBias<T>,
    dt_s: T,
) -> Result<Quaternion<T>, AttitudeError> {
    if !q.is_finite() || !omega_rps.is_finite() || !bias.bias_rps.is_finite() || !dt_s.is_finite()
    {
        return Err(AttitudeError::NonFiniteInput);
    }
    if dt_s <= T::zero() {
        return Err(AttitudeError::NonPositiveStep(dt_s.to_f64().unwrap_or(f64::NAN)));
    }
    let rate = omega_rps - bias.bias_rps;
    let step = Quaternion::from_rotation_vector(rate.scale(dt_s));
    Ok((q * step).normalized())
}

fn wrap_half_open<T: Real>(deg: T) -> T {
    // maps atan2's −180 onto +180 so the range is (−180, 180]
    if deg <= T::lit(-180.0) {
        deg + T::lit(360.0)
    } else {
        deg
    }
}

/// Intrinsic Z-Y-X decomposition in degrees.
///
/// At gimbal lock (pitch within 1e-6° of ±90°) roll is reported as 0 and the remaining
/// rotation about the vertical is folded into yaw.
pub fn to_tait_bryan<T: Real>(q: &Quaternion<T>) -> EulerAngles<T> {
    let two = T::lit(2.0);
    let (w, x, y, z) = (q.w, q.x, q.y, q.z);
    let r00 = T::one() - two * (y * y + z * z);
    let r10 = two * (x * y + w * z);
    let r20 = two * (x * z - w * y);
    let r21 = two * (y * z + w * x);
    let r22 = T::one() - two * (x * x + y * y);

    let pitch = (-r20).atan2((r00 * r00 + r10 * r10).sqrt()).to_degrees();
    if T::lit(90.0) - pitch.abs() < T::lit(GIMBAL_LOCK_EPS_DEG) {
        let r01 = two * (x * y - w * z);
        let r11 = T::one() - two * (x * x + z * z);
        let yaw = (-r01).atan2(r11).to_degrees();
        let pitch = T::lit(90.0).copysign(pitch);
        return EulerAngles::new(wrap_half_open(yaw), pitch, T::zero());
    }
    let yaw = r10.atan2(r00).to_degrees();
    let roll = r21.atan2(r22).to_degrees();
    EulerAngles::new(wrap_half_open(yaw), pitch, wrap_half_open(roll))
}

/// Angle in degrees, in [0, 180], between the body thrust axis and world up.
pub fn tilt_angle_deg<T: Real>(q: &Quaternion<T>) -> T {
    // Same angle as acos(axis · up), evaluated with atan2 to keep precision near 0°.
    let a = q.body_axis();
    (a.x * a.x + a.y * a.y).sqrt().atan2(a.z).to_degrees()
}

/// Tilt-only attitude whose body frame sees `accel_body` (the pad specific force) as world up.
/// Heading is left at zero since gravity carries no yaw information.
pub fn align_to_gravity<T: Real>(accel_body: Vec3<T>) -> Result<Quaternion<T>, AttitudeError> {
    if !accel_body.is_finite() || accel_body.norm() == T::zero() {
        return Err(AttitudeError::NonFiniteInput);
    }
    Ok(Quaternion::between(accel_body, Vec3::unit_z()))
}

/// Running gyro-integration estimator as flown: calibrated bias plus current attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeEstimator<T> {
    pub attitude: Quaternion<T>,
    pub bias: GyroBias<T>,
}

impl<T: Real> AttitudeEstimator<T> {
    pub fn new(attitude: Quaternion<T>, bias: GyroBias<T>) -> Self {
        Self { attitude, bias }
    }

    pub fn update(&mut self, gyro_rps: Vec3<T>, dt_s: T) -> Result<Quaternion<T>, AttitudeError> {
        self.attitude = integrate_attitude(self.attitude, gyro_rps, &self.bias, dt_s)?;
        Ok(self.attitude)
    }
}
