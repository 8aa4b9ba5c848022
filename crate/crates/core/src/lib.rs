//! Flight software and software-in-the-loop simulator for a thrust-vector-controlled model
//! rocket.
//!
//! The estimator ([`attitude`]) and controller ([`control`]) are generic over the scalar
//! type (`f32` or `f64`). The simulator, state machine and telemetry run in `f64`; the
//! aliases below fix the generic types to that precision.

pub mod attitude;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod fsm;
pub mod real;
pub mod telemetry;

pub use real::Real;

pub type Vec3 = attitude::Vec3<f64>;
pub type Quaternion = attitude::Quaternion<f64>;
pub type EulerAngles = attitude::EulerAngles<f64>;
pub type ImuSample = attitude::ImuSample<f64>;
pub type GyroBias = attitude::GyroBias<f64>;
pub type PidGains = control::PidGains<f64>;
pub type PidState = control::PidState<f64>;
pub type PidTerms = control::PidTerms<f64>;
pub type GimbalCommand = control::GimbalCommand<f64>;
pub type GimbalGeometry = control::GimbalGeometry<f64>;
pub type ServoCommand = control::ServoCommand<f64>;
pub type AxisController = control::AxisController<f64>;
