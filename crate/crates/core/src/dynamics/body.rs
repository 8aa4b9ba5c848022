//! Rigid-body equations of motion and the RK4 step.

use serde::{Deserialize, Serialize};

use super::{MotorModel, SimError, SimMode};
use crate::{GimbalGeometry, Quaternion, ServoCommand, Vec3};

/// Truth state of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyState {
    pub position_m: Vec3,
    pub velocity_mps: Vec3,
    /// Body → world.
    pub attitude: Quaternion,
    /// Body frame.
    pub angular_velocity_rps: Vec3,
}

impl RigidBodyState {
    pub fn at_rest(attitude: Quaternion) -> Self {
        Self {
            position_m: Vec3::zero(),
            velocity_mps: Vec3::zero(),
            attitude,
            angular_velocity_rps: Vec3::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position_m.is_finite()
            && self.velocity_mps.is_finite()
            && self.attitude.is_finite()
            && self.angular_velocity_rps.is_finite()
    }

    /// World-frame angular momentum for a diagonal body inertia.
    pub fn angular_momentum(&self, inertia_kgm2: Vec3) -> Vec3 {
        self.attitude
            .rotate(inertia_kgm2.hadamard(&self.angular_velocity_rps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Airframe and avionics, without the motor.
    pub dry_mass_kg: f64,
    /// Principal moments at liftoff (motor loaded), body axes.
    pub inertia_kgm2: Vec3,
    pub nozzle_to_cg_m: f64,
    /// Drag coefficient times reference area.
    pub drag_area_m2: f64,
    /// Drag area added once the parachute is out.
    pub chute_drag_area_m2: f64,
    /// Viscous damping of the ground-test pivot, N·m·s/rad.
    pub stand_damping_nms: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            dry_mass_kg: 0.40,
            inertia_kgm2: Vec3::new(0.012, 0.012, 0.0008),
            nozzle_to_cg_m: 0.22,
            drag_area_m2: 0.0022,
            chute_drag_area_m2: 0.28,
            stand_damping_nms: 0.02,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("dry_mass_kg", self.dry_mass_kg),
            ("inertia_kgm2.x", self.inertia_kgm2.x),
            ("inertia_kgm2.y", self.inertia_kgm2.y),
            ("inertia_kgm2.z", self.inertia_kgm2.z),
            ("nozzle_to_cg_m", self.nozzle_to_cg_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::ConfigInvalid(format!("vehicle.{name} must be > 0")));
            }
        }
        let non_negative = [
            ("drag_area_m2", self.drag_area_m2),
            ("chute_drag_area_m2", self.chute_drag_area_m2),
            ("stand_damping_nms", self.stand_damping_nms),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SimError::ConfigInvalid(format!("vehicle.{name} must be >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Environment {
    pub gravity_mps2: f64,
    pub air_density_kgm3: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            gravity_mps2: 9.81,
            air_density_kgm3: 1.225,
        }
    }
}

/// Everything about the vehicle that stays fixed through a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Airframe {
    pub vehicle: VehicleParams,
    pub motor: MotorModel,
    pub geometry: GimbalGeometry,
    pub environment: Environment,
}

impl Airframe {
    pub fn mass_kg(&self, motor_t_s: Option<f64>) -> f64 {
        let motor = match motor_t_s {
            Some(t) => self.motor.mass_at(t),
            None => self.motor.total_mass_kg,
        };
        self.vehicle.dry_mass_kg + motor
    }

    /// Inertia scaled with mass as propellant burns.
    pub fn inertia_kgm2(&self, motor_t_s: Option<f64>) -> Vec3 {
        let ratio = self.mass_kg(motor_t_s) / self.mass_kg(None);
        self.vehicle.inertia_kgm2.scale(ratio)
    }

    pub fn thrust_n(&self, motor_t_s: Option<f64>, mode: SimMode) -> f64 {
        motor_t_s.map_or(0.0, |t| self.motor.thrust_at(t) * mode.thrust_scale())
    }
}

/// Physical gimbal deflection (pitch, yaw) in degrees produced by the servo horns.
///
/// `servo_error_deg` is the unknown neutral error of each servo, in servo degrees.
pub fn gimbal_from_servo(
    servo: &ServoCommand,
    geometry: &GimbalGeometry,
    servo_error_deg: [f64; 2],
) -> (f64, f64) {
    let limit = geometry.mechanical_range_deg;
    let axis = |s: f64, trim: f64, err: f64| {
        ((s - trim + err) / geometry.linkage_ratio).clamp(-limit, limit)
    };
    (
        axis(
            servo.servo_pitch_deg,
            geometry.servo_offset_deg[0],
            servo_error_deg[0],
        ),
        axis(
            servo.servo_yaw_deg,
            geometry.servo_offset_deg[1],
            servo_error_deg[1],
        ),
    )
}

/// Unit thrust direction in body axes for gimbal angles in degrees.
///
/// Positive pitch deflection swings thrust toward +x (negative torque about y); positive yaw
/// deflection swings it toward −y (negative torque about x).
pub fn thrust_direction(pitch_deg: f64, yaw_deg: f64) -> Vec3 {
    let (sp, cp) = pitch_deg.to_radians().sin_cos();
    let (sy, cy) = yaw_deg.to_radians().sin_cos();
    Vec3::new(cy * sp, -sy, cy * cp)
}

/// External inputs held constant over one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Forcing {
    /// Ignition time on the simulation clock, if lit.
    pub ignition_t_s: Option<f64>,
    pub servo: ServoCommand,
    pub servo_error_deg: [f64; 2],
    pub wind_mps: Vec3,
    /// Additional body-frame torque.
    pub torque_nm: Vec3,
    pub chute_deployed: bool,
}

#[derive(Clone, Copy)]
struct Derivative {
    dp: Vec3,
    dv: Vec3,
    dq: Quaternion,
    dw: Vec3,
}

/// Non-gravitational force on the vehicle in world axes, and body torque.
fn loads(
    s: &RigidBodyState,
    air: &Airframe,
    forcing: &Forcing,
    t_s: f64,
    mode: SimMode,
) -> (Vec3, Vec3) {
    let motor_t = forcing.ignition_t_s.map(|t0| t_s - t0);
    let thrust = air.thrust_n(motor_t, mode);
    let (dp, dy) = gimbal_from_servo(&forcing.servo, &air.geometry, forcing.servo_error_deg);
    let f_body = thrust_direction(dp, dy).scale(thrust);
    let arm = Vec3::new(0.0, 0.0, -air.vehicle.nozzle_to_cg_m);
    let mut torque = arm.cross(&f_body) + forcing.torque_nm;
    let mut force = s.attitude.rotate(f_body);
    match mode {
        SimMode::Flight => {
            let rel = s.velocity_mps - forcing.wind_mps;
            let area = air.vehicle.drag_area_m2
                + if forcing.chute_deployed {
                    air.vehicle.chute_drag_area_m2
                } else {
                    0.0
                };
            force += rel.scale(-0.5 * air.environment.air_density_kgm3 * area * rel.norm());
        }
        SimMode::GroundTest => {
            torque = torque - s.angular_velocity_rps.scale(air.vehicle.stand_damping_nms);
        }
    }
    (force, torque)
}

/// Specific force a body-mounted accelerometer reads, body axes.
pub fn specific_force(
    s: &RigidBodyState,
    air: &Airframe,
    forcing: &Forcing,
    t_s: f64,
    mode: SimMode,
) -> Vec3 {
    let (force, _) = loads(s, air, forcing, t_s, mode);
    let m = air.mass_kg(forcing.ignition_t_s.map(|t0| t_s - t0));
    s.attitude.inverse_rotate(force.scale(1.0 / m))
}

fn derivative(
    s: &RigidBodyState,
    air: &Airframe,
    forcing: &Forcing,
    t_s: f64,
    mode: SimMode,
) -> Derivative {
    let motor_t = forcing.ignition_t_s.map(|t0| t_s - t0);
    let (force, torque) = loads(s, air, forcing, t_s, mode);
    let inertia = air.inertia_kgm2(motor_t);
    let w = s.angular_velocity_rps;
    let gyro = w.cross(&inertia.hadamard(&w));
    let dw = Vec3::new(
        (torque.x - gyro.x) / inertia.x,
        (torque.y - gyro.y) / inertia.y,
        (torque.z - gyro.z) / inertia.z,
    );
    let wq = Quaternion::new(0.0, w.x, w.y, w.z);
    let qd = s.attitude * wq;
    let dq = Quaternion::new(0.5 * qd.w, 0.5 * qd.x, 0.5 * qd.y, 0.5 * qd.z);
    let (dp, dv) = match mode {
        SimMode::Flight => {
            let m = air.mass_kg(motor_t);
            let g = Vec3::new(0.0, 0.0, -air.environment.gravity_mps2);
            (s.velocity_mps, force.scale(1.0 / m) + g)
        }
        SimMode::GroundTest => (Vec3::zero(), Vec3::zero()),
    };
    Derivative { dp, dv, dq, dw }
}

fn advance(s: &RigidBodyState, d: &Derivative, h: f64) -> RigidBodyState {
    RigidBodyState {
        position_m: s.position_m + d.dp.scale(h),
        velocity_mps: s.velocity_mps + d.dv.scale(h),
        attitude: Quaternion::new(
            s.attitude.w + d.dq.w * h,
            s.attitude.x + d.dq.x * h,
            s.attitude.y + d.dq.y * h,
            s.attitude.z + d.dq.z * h,
        ),
        angular_velocity_rps: s.angular_velocity_rps + d.dw.scale(h),
    }
}

/// One classical fourth-order Runge–Kutta step of `dt_s`, attitude renormalised afterwards.
///
/// In ground-test mode translation is locked: position and velocity stay exactly as given.
pub fn step_dynamics(
    state: &RigidBodyState,
    air: &Airframe,
    forcing: &Forcing,
    t_s: f64,
    dt_s: f64,
    mode: SimMode,
) -> Result<RigidBodyState, SimError> {
    if !(dt_s > 0.0) {
        return Err(SimError::ConfigInvalid(format!("dt_s must be > 0, got {dt_s}")));
    }
    let h = dt_s;
    let k1 = derivative(state, air, forcing, t_s, mode);
    let k2 = derivative(&advance(state, &k1, h / 2.0), air, forcing, t_s + h / 2.0, mode);
    let k3 = derivative(&advance(state, &k2, h / 2.0), air, forcing, t_s + h / 2.0, mode);
    let k4 = derivative(&advance(state, &k3, h), air, forcing, t_s + h, mode);
    let sum = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| (a + (b + c).scale(2.0) + d).scale(h / 6.0);
    let q = |f: fn(&Quaternion) -> f64| {
        h / 6.0 * (f(&k1.dq) + 2.0 * (f(&k2.dq) + f(&k3.dq)) + f(&k4.dq))
    };
    let dq = Quaternion::new(q(|q| q.w), q(|q| q.x), q(|q| q.y), q(|q| q.z));
    let mut next = RigidBodyState {
        position_m: state.position_m + sum(k1.dp, k2.dp, k3.dp, k4.dp),
        velocity_mps: state.velocity_mps + sum(k1.dv, k2.dv, k3.dv, k4.dv),
        attitude: Quaternion::new(
            state.attitude.w + dq.w,
            state.attitude.x + dq.x,
            state.attitude.y + dq.y,
            state.attitude.z + dq.z,
        )
        .normalized(),
        angular_velocity_rps: state.angular_velocity_rps + sum(k1.dw, k2.dw, k3.dw, k4.dw),
    };
    if mode == SimMode::GroundTest {
        next.position_m = state.position_m;
        next.velocity_mps = state.velocity_mps;
    }
    if !next.is_finite() {
        return Err(SimError::NonFiniteState { t_s });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ThrustCurve;

    fn airframe(curve: ThrustCurve) -> Airframe {
        Airframe {
            vehicle: VehicleParams {
                drag_area_m2: 0.0,
                ..VehicleParams::default()
            },
            motor: MotorModel {
                designation: "T".into(),
                diameter_mm: 24.0,
                length_mm: 70.0,
                delays: vec![],
                propellant_mass_kg: 0.0,
                total_mass_kg: 0.06,
                manufacturer: "test".into(),
                curve,
            },
            geometry: GimbalGeometry::default(),
            environment: Environment::default(),
        }
    }

    #[test]
    fn force_free_state_is_unchanged() {
        let mut air = airframe(ThrustCurve::constant(0.0, 1.0));
        air.environment.gravity_mps2 = 0.0;
        let s = RigidBodyState {
            velocity_mps: Vec3::new(1.0, -2.0, 3.0),
            ..RigidBodyState::at_rest(Quaternion::from_axis_angle(Vec3::unit_x(), 0.3))
        };
        let n = step_dynamics(&s, &air, &Forcing::default(), 0.0, 0.01, SimMode::Flight).unwrap();
        assert_eq!(n.velocity_mps, s.velocity_mps);
        assert!(n.attitude.angle_to(&s.attitude) < 1e-15);
        assert!((n.position_m.x - 0.01).abs() < 1e-15);
    }

    #[test]
    fn gravity_single_step() {
        let air = airframe(ThrustCurve::constant(0.0, 1.0));
        let s = RigidBodyState::at_rest(Quaternion::identity());
        let n = step_dynamics(&s, &air, &Forcing::default(), 0.0, 0.1, SimMode::Flight).unwrap();
        assert!((n.velocity_mps.z + 0.981).abs() < 1e-12);
        assert!((n.position_m.z + 0.5 * 9.81 * 0.01).abs() < 1e-12);
    }

    #[test]
    fn positive_pitch_deflection_gives_negative_pitch_torque() {
        let air = airframe(ThrustCurve::constant(10.0, 5.0));
        let s = RigidBodyState::at_rest(Quaternion::identity());
        let forcing = Forcing {
            ignition_t_s: Some(0.0),
            servo: ServoCommand::new(2.0 * 5.0, 0.0),
            ..Forcing::default()
        };
        let n = step_dynamics(&s, &air, &forcing, 1.0, 0.001, SimMode::GroundTest).unwrap();
        assert!(n.angular_velocity_rps.y < 0.0);
        assert!(n.angular_velocity_rps.x.abs() < 1e-12);
        let forcing = Forcing {
            servo: ServoCommand::new(0.0, 2.0 * 5.0),
            ..forcing
        };
        let n = step_dynamics(&s, &air, &forcing, 1.0, 0.001, SimMode::GroundTest).unwrap();
        assert!(n.angular_velocity_rps.x < 0.0);
    }

    #[test]
    fn ground_test_locks_translation() {
        let air = airframe(ThrustCurve::constant(30.0, 5.0));
        let s = RigidBodyState::at_rest(Quaternion::from_axis_angle(Vec3::unit_y(), 0.2));
        let forcing = Forcing {
            ignition_t_s: Some(0.0),
            wind_mps: Vec3::new(5.0, 0.0, 0.0),
            ..Forcing::default()
        };
        let n = step_dynamics(&s, &air, &forcing, 0.5, 0.001, SimMode::GroundTest).unwrap();
        assert_eq!(n.position_m, Vec3::zero());
        assert_eq!(n.velocity_mps, Vec3::zero());
    }

    #[test]
    fn servo_error_shifts_gimbal() {
        let g = GimbalGeometry::default();
        let (p, y) = gimbal_from_servo(&ServoCommand::new(4.0, 0.0), &g, [0.0, 1.0]);
        assert_eq!((p, y), (2.0, 0.5));
        let (p, _) = gimbal_from_servo(&ServoCommand::new(100.0, 0.0), &g, [0.0, 0.0]);
        assert_eq!(p, g.mechanical_range_deg);
    }

    #[test]
    fn thrust_direction_is_unit() {
        for (p, y) in [(0.0, 0.0), (10.0, -10.0), (15.0, 15.0)] {
            assert!((thrust_direction(p, y).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_positive_step() {
        let air = airframe(ThrustCurve::constant(0.0, 1.0));
        let s = RigidBodyState::at_rest(Quaternion::identity());
        assert!(step_dynamics(&s, &air, &Forcing::default(), 0.0, 0.0, SimMode::Flight).is_err());
    }
}
