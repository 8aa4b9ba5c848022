//! Closed-loop software-in-the-loop runs: flight, ground-test stand and the tuning plant.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    step_dynamics, Airframe, Environment, Forcing, MotorModel, RigidBodyState, SimError, SimMode,
    ThrustCurve, VehicleParams,
};
use crate::attitude::{
    align_to_gravity, calibrate_bias, tilt_angle_deg, to_tait_bryan, AttitudeEstimator,
    DEFAULT_MAX_BIAS_VARIANCE, DEFAULT_MIN_BIAS_SAMPLES,
};
use crate::control::tuning::{
    find_ultimate_cycle, zn_classic_gains, ErrorTrace, TuningPlant, UltimateCycle,
};
use crate::control::{controller_step, mix_to_servos, ControlError};
use crate::fsm::{FlightPhase, FlightStateMachine, FsmConfig, FsmEvent, SensedInputs};
use crate::telemetry::{compute_metrics, FlightLog, FlightMetrics, LogRecord, LogScheduler, MetricsWindow};
use crate::{
    AxisController, EulerAngles, GimbalCommand, GimbalGeometry, GyroBias, ImuSample, PidGains,
    PidTerms, Quaternion, ServoCommand, Vec3,
};

/// Minimum control loop rate.
pub const MIN_CONTROL_RATE_HZ: f64 = 30.0;

/// Body-y torque applied for a while after ignition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorquePulse {
    /// Start, seconds after ignition.
    pub t_s: f64,
    pub duration_s: f64,
    pub torque_nm: f64,
}

impl TorquePulse {
    pub fn is_active(&self) -> bool {
        self.duration_s > 0.0 && self.torque_nm != 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceConfig {
    pub wind_mps: Vec3,
    /// Stationary standard deviation of the gust on each axis.
    pub gust_sigma_mps: f64,
    /// Gust correlation time.
    pub gust_tau_s: f64,
    pub launch_tilt_deg: f64,
    /// Direction the nose leans, measured from world +x toward +y.
    pub launch_azimuth_deg: f64,
    /// Neutral error of each servo (pitch, yaw), servo degrees; unknown to the controller.
    pub servo_offset_deg: [f64; 2],
    pub gyro_bias_rps: Vec3,
    pub gyro_noise_sigma_rps: f64,
    pub torque_pulse: Option<TorquePulse>,
    pub seed: u64,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self {
            wind_mps: Vec3::new(2.0, 0.0, 0.0),
            gust_sigma_mps: 0.5,
            gust_tau_s: 1.0,
            launch_tilt_deg: 5.0,
            launch_azimuth_deg: 0.0,
            servo_offset_deg: [0.0, 0.0],
            gyro_bias_rps: Vec3::new(0.003, -0.002, 0.001),
            gyro_noise_sigma_rps: 0.002,
            torque_pulse: None,
            seed: 1,
        }
    }
}

impl DisturbanceConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::ConfigInvalid(format!("disturbances.{what}")));
        if !(self.gust_sigma_mps >= 0.0) || !(self.gyro_noise_sigma_rps >= 0.0) {
            return bad("sigmas must be >= 0");
        }
        if !(self.gust_tau_s > 0.0) {
            return bad("gust_tau_s must be > 0");
        }
        if !self.wind_mps.is_finite()
            || !self.gyro_bias_rps.is_finite()
            || !self.launch_tilt_deg.is_finite()
            || !self.launch_azimuth_deg.is_finite()
            || self.servo_offset_deg.iter().any(|v| !v.is_finite())
        {
            return bad("values must be finite");
        }
        if let Some(p) = self.torque_pulse {
            if !(p.t_s >= 0.0) || !(p.duration_s >= 0.0) || !p.torque_nm.is_finite() {
                return bad("torque_pulse needs t_s >= 0, duration_s >= 0");
            }
        }
        Ok(())
    }

    /// Initial attitude on the pad.
    pub fn launch_attitude(&self) -> Quaternion {
        let az = self.launch_azimuth_deg.to_radians();
        let axis = Vec3::new(-az.sin(), az.cos(), 0.0);
        Quaternion::from_axis_angle(axis, self.launch_tilt_deg.to_radians())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub t_max_s: f64,
    pub control_rate_hz: f64,
    pub physics_rate_hz: f64,
    /// Arm command time; the igniter fires `fsm.ignite_delay_s` later.
    pub arm_at_s: f64,
    pub mode: SimMode,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            t_max_s: 60.0,
            control_rate_hz: 100.0,
            physics_rate_hz: 1000.0,
            arm_at_s: 2.0,
            mode: SimMode::Flight,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.control_rate_hz >= MIN_CONTROL_RATE_HZ) || !self.control_rate_hz.is_finite() {
            return Err(SimError::ConfigInvalid(format!(
                "sim.control_rate_hz must be >= {MIN_CONTROL_RATE_HZ}"
            )));
        }
        if !(self.physics_rate_hz >= self.control_rate_hz) || !self.physics_rate_hz.is_finite() {
            return Err(SimError::ConfigInvalid(
                "sim.physics_rate_hz must be >= control_rate_hz".into(),
            ));
        }
        if !(self.t_max_s > 0.0) || !(self.arm_at_s >= 0.0) {
            return Err(SimError::ConfigInvalid(
                "sim.t_max_s must be > 0 and sim.arm_at_s >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn control_period_s(&self) -> f64 {
        1.0 / self.control_rate_hz
    }

    pub fn substeps(&self) -> usize {
        (self.physics_rate_hz / self.control_rate_hz - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlGains {
    pub pitch: PidGains,
    pub yaw: PidGains,
}

impl ControlGains {
    pub fn both(g: PidGains) -> Self {
        Self { pitch: g, yaw: g }
    }

    pub fn zero() -> Self {
        Self::both(PidGains::new(0.0, 0.0, 0.0))
    }
}

/// Everything a run needs, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub vehicle: VehicleParams,
    pub environment: Environment,
    pub motor: MotorModel,
    pub geometry: GimbalGeometry,
    pub fsm: FsmConfig,
    pub gains: ControlGains,
    pub disturbances: DisturbanceConfig,
    pub sim: SimSettings,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.vehicle.validate()?;
        self.geometry.validate()?;
        self.gains.pitch.validate()?;
        self.gains.yaw.validate()?;
        self.disturbances.validate()?;
        self.sim.validate()?;
        if !(self.environment.gravity_mps2 > 0.0) || !(self.environment.air_density_kgm3 >= 0.0) {
            return Err(SimError::ConfigInvalid("environment values out of range".into()));
        }
        if self.fsm.detect_count == 0 {
            return Err(SimError::ConfigInvalid("fsm.detect_count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn airframe(&self) -> Airframe {
        Airframe {
            vehicle: self.vehicle,
            motor: self.motor.clone(),
            geometry: self.geometry,
            environment: self.environment,
        }
    }

    pub fn metrics_window(&self) -> MetricsWindow {
        match self.sim.mode {
            SimMode::Flight => MetricsWindow::PoweredAscent,
            SimMode::GroundTest => MetricsWindow::Thrust,
        }
    }
}

/// Output of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    /// Records as they read back from the CSV file.
    pub log: FlightLog,
    pub events: Vec<(f64, FsmEvent)>,
    pub final_phase: FlightPhase,
    /// Bias estimated on the pad; zero if the motor never ignited.
    pub gyro_bias: GyroBias,
    pub ignition_t_s: Option<f64>,
    /// Absolute start of the torque pulse, when one was applied.
    pub disturbance_t_s: Option<f64>,
    pub window: MetricsWindow,
    /// `None` when the metrics window is empty.
    pub metrics: Option<FlightMetrics>,
}

impl SimRun {
    pub fn aborted(&self) -> bool {
        self.final_phase == FlightPhase::Abort
    }
}

/// Servo commands waiting out the actuator transport delay.
struct DelayLine {
    queue: VecDeque<(usize, ServoCommand)>,
    applied: ServoCommand,
}

impl DelayLine {
    fn new(initial: ServoCommand) -> Self {
        Self {
            queue: VecDeque::new(),
            applied: initial,
        }
    }

    fn push(&mut self, effective_step: usize, cmd: ServoCommand) {
        self.queue.push_back((effective_step, cmd));
    }

    fn at(&mut self, step: usize) -> ServoCommand {
        while let Some(&(due, cmd)) = self.queue.front() {
            if due > step {
                break;
            }
            self.applied = cmd;
            self.queue.pop_front();
        }
        self.applied
    }
}

fn trim_servo(geom: &GimbalGeometry) -> ServoCommand {
    ServoCommand::new(geom.servo_offset_deg[0], geom.servo_offset_deg[1])
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Runs the configured scenario in the configured mode.
pub fn simulate(cfg: &SimConfig) -> Result<SimRun, SimError> {
    cfg.validate()?;
    let air = cfg.airframe();
    let mode = cfg.sim.mode;
    let dist = &cfg.disturbances;
    let g = cfg.environment.gravity_mps2;
    let tc = cfg.sim.control_period_s();
    let n = cfg.sim.substeps();
    let dt = tc / n as f64;
    let delay_steps = (cfg.geometry.actuator_delay_s / dt).round() as usize;
    let authority = cfg.geometry.authority_limit_deg;

    let mut rng = ChaCha8Rng::seed_from_u64(dist.seed);
    let gust_a = (-tc / dist.gust_tau_s).exp();
    let gust_b = dist.gust_sigma_mps * (1.0 - gust_a * gust_a).sqrt();
    let mut gust = Vec3::zero();

    // the stand holds the vehicle vertical
    let start = match mode {
        SimMode::Flight => dist.launch_attitude(),
        SimMode::GroundTest => Quaternion::identity(),
    };
    let mut state = RigidBodyState::at_rest(start);
    let mut held = mode == SimMode::Flight;
    let mut launched = false;
    let mut fsm = FlightStateMachine::new(cfg.fsm);
    let mut scheduler = LogScheduler::new();
    let mut log = FlightLog::default();
    let mut events = Vec::new();
    let mut pad_samples: Vec<ImuSample> = Vec::new();
    let mut pad_accel = Vec3::zero();
    let mut estimator: Option<AttitudeEstimator<f64>> = None;
    let mut ignition_t_s: Option<f64> = None;
    let mut chute = false;
    let mut gyro_bias = GyroBias::zero();
    let mut pitch = AxisController::new(cfg.gains.pitch, authority);
    let mut yaw = AxisController::new(cfg.gains.yaw, authority);
    let trim = trim_servo(&cfg.geometry);
    let mut servo = trim;
    let mut delay = DelayLine::new(trim);
    let mut rest_since: Option<f64> = None;

    let ticks = (cfg.sim.t_max_s * cfg.sim.control_rate_hz).floor() as usize;
    for k in 0..=ticks {
        let t = k as f64 / cfg.sim.control_rate_hz;
        let motor_t = ignition_t_s.map(|t0| t - t0);
        let thrust_n = air.thrust_n(motor_t, mode);
        let mass = air.mass_kg(motor_t);

        let noise = Vec3::new(gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng));
        let gyro = state.angular_velocity_rps + dist.gyro_bias_rps + noise.scale(dist.gyro_noise_sigma_rps);
        let kick = Vec3::new(gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng));
        gust = gust.scale(gust_a) + kick.scale(gust_b);

        let forcing = Forcing {
            ignition_t_s,
            servo: delay.at(k * n),
            servo_error_deg: dist.servo_offset_deg,
            wind_mps: dist.wind_mps + gust,
            torque_nm: Vec3::zero(),
            chute_deployed: chute,
        };
        let accel_body = if held || mode == SimMode::GroundTest {
            state.attitude.inverse_rotate(Vec3::new(0.0, 0.0, g))
        } else {
            super::specific_force(&state, &air, &forcing, t, mode)
        };
        let accel_g = match mode {
            SimMode::Flight => accel_body.norm() / g,
            // load cell reading scaled to full thrust
            SimMode::GroundTest => air.thrust_n(motor_t, SimMode::Flight) / (mass * g),
        };

        match estimator.as_mut() {
            Some(est) => {
                est.update(gyro, tc)?;
            }
            None => {
                pad_samples.push(ImuSample {
                    t_s: t,
                    gyro_rps: gyro,
                    accel_mps2: accel_body,
                });
                pad_accel += accel_body;
            }
        }
        let est_tilt = estimator.map_or(0.0, |e| tilt_angle_deg(&e.attitude));

        let inputs = SensedInputs {
            t_s: t,
            accel_magnitude_g: accel_g,
            vertical_velocity_mps: state.velocity_mps.z,
            altitude_m: state.position_m.z,
            tilt_deg: est_tilt,
            arm_commanded: t >= cfg.sim.arm_at_s - 1e-9,
        };
        for ev in fsm.step(&inputs) {
            events.push((t, ev));
            match ev {
                FsmEvent::Ignite => {
                    let bias =
                        calibrate_bias(&pad_samples, DEFAULT_MIN_BIAS_SAMPLES, DEFAULT_MAX_BIAS_VARIANCE)?;
                    let mean = pad_accel.scale(1.0 / pad_samples.len() as f64);
                    let aligned = align_to_gravity(mean)?;
                    estimator = Some(AttitudeEstimator::new(aligned, bias));
                    gyro_bias = bias;
                    ignition_t_s = Some(t);
                }
                FsmEvent::ControlEnable => {
                    pitch.state.reset();
                    yaw.state.reset();
                }
                FsmEvent::DeployChute => chute = true,
                _ => {}
            }
        }

        let (cmd, pitch_terms, yaw_terms) = match estimator {
            Some(est) if fsm.control_active() => {
                let e = to_tait_bryan(&est.attitude);
                let setpoint = EulerAngles::new(e.yaw_deg, 0.0, 0.0);
                let step = controller_step(&e, &setpoint, &pitch, &yaw, authority, tc)?;
                pitch = step.pitch;
                yaw = step.yaw;
                (step.command, step.pitch_terms, step.yaw_terms)
            }
            _ => (GimbalCommand::neutral(), PidTerms::zero(), PidTerms::zero()),
        };
        servo = mix_to_servos(&cmd, &cfg.geometry, &servo, tc);
        delay.push(k * n + delay_steps, servo);

        let phase = fsm.phase();
        if scheduler.should_log(phase, t) {
            let rec = LogRecord {
                t_s: t,
                phase,
                gyro_rps: gyro,
                attitude: state.attitude,
                euler: to_tait_bryan(&state.attitude),
                tilt_deg: tilt_angle_deg(&state.attitude),
                gimbal_pitch_deg: cmd.pitch_deflect_deg,
                gimbal_yaw_deg: cmd.yaw_deflect_deg,
                servo_pitch_deg: servo.servo_pitch_deg,
                servo_yaw_deg: servo.servo_yaw_deg,
                thrust_n,
                pitch_terms,
                yaw_terms,
                position_m: state.position_m,
                velocity_mps: state.velocity_mps,
            };
            log.push(rec)
                .map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
        }

        match phase {
            FlightPhase::Landed => break,
            FlightPhase::Abort => {
                let resting = match mode {
                    SimMode::Flight => held && launched,
                    SimMode::GroundTest => {
                        motor_t.is_some_and(|mt| mt > cfg.motor.curve.burn_time_s())
                    }
                };
                if resting {
                    let since = *rest_since.get_or_insert(t);
                    if t - since >= cfg.fsm.landed_hold_s - 1e-9 {
                        break;
                    }
                } else {
                    rest_since = None;
                }
            }
            _ => {}
        }
        if k == ticks {
            break;
        }

        for j in 0..n {
            let i = k * n + j;
            let ts = i as f64 * dt;
            let mut f = forcing;
            f.servo = delay.at(i);
            f.chute_deployed = chute;
            f.ignition_t_s = ignition_t_s;
            if let (Some(t0), Some(p)) = (ignition_t_s, dist.torque_pulse) {
                let rel = ts - t0;
                if p.is_active() && rel >= p.t_s - 1e-9 && rel < p.t_s + p.duration_s - 1e-9 {
                    f.torque_nm = Vec3::new(0.0, p.torque_nm, 0.0);
                }
            }
            if held {
                let mt = ignition_t_s.map(|t0| ts - t0);
                let up = state.attitude.body_axis().z * air.thrust_n(mt, mode);
                if up <= air.mass_kg(mt) * g {
                    continue;
                }
                held = false;
                launched = true;
            }
            state = step_dynamics(&state, &air, &f, ts, dt, mode)?;
            if mode == SimMode::Flight && state.position_m.z < 0.0 {
                state.position_m.z = 0.0;
                state.velocity_mps = Vec3::zero();
                state.angular_velocity_rps = Vec3::zero();
                held = true;
            }
        }
    }

    let log = log.quantized();
    let window = cfg.metrics_window();
    let disturbance_t_s = match (ignition_t_s, dist.torque_pulse) {
        (Some(t0), Some(p)) if p.is_active() => Some(t0 + p.t_s),
        _ => None,
    };
    let metrics = compute_metrics(&log, window, disturbance_t_s).ok();
    Ok(SimRun {
        log,
        events,
        final_phase: fsm.phase(),
        gyro_bias,
        ignition_t_s,
        disturbance_t_s,
        window,
        metrics,
    })
}

/// Free flight from the pad.
pub fn run_flight_sim(cfg: &SimConfig) -> Result<SimRun, SimError> {
    let mut cfg = cfg.clone();
    cfg.sim.mode = SimMode::Flight;
    simulate(&cfg)
}

/// Locked-translation stand at one-third thrust with an optional torque pulse.
pub fn run_ground_test(cfg: &SimConfig, pulse: Option<TorquePulse>) -> Result<SimRun, SimError> {
    let mut cfg = cfg.clone();
    cfg.sim.mode = SimMode::GroundTest;
    if pulse.is_some() {
        cfg.disturbances.torque_pulse = pulse;
    }
    simulate(&cfg)
}

/// Proportional-only ground-test stand used for tuning.
///
/// The motor is replaced by a constant-thrust rig at its average thrust. The vehicle starts
/// a small pitch offset from vertical with no sensor error, and the controller sees truth
/// attitude through the actuator delay of the real loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePlant {
    pub airframe: Airframe,
    pub control_rate_hz: f64,
    pub physics_rate_hz: f64,
    pub initial_pitch_deg: f64,
    pub duration_s: f64,
    /// Tilt beyond which the run is cut short as diverged.
    pub divergence_tilt_deg: f64,
}

impl ReferencePlant {
    pub fn from_config(cfg: &SimConfig) -> Self {
        let mut airframe = cfg.airframe();
        let rig_mass = cfg.motor.total_mass_kg;
        airframe.motor = MotorModel {
            designation: format!("{}-rig", cfg.motor.designation),
            propellant_mass_kg: 0.0,
            total_mass_kg: rig_mass,
            curve: ThrustCurve::constant(cfg.motor.curve.average_thrust_n(), 1e6),
            ..cfg.motor.clone()
        };
        Self {
            airframe,
            control_rate_hz: cfg.sim.control_rate_hz,
            physics_rate_hz: cfg.sim.physics_rate_hz,
            initial_pitch_deg: 0.1,
            duration_s: 6.0,
            divergence_tilt_deg: 60.0,
        }
    }

    /// Pitch error trace for a P-only loop at `kp` (deg of deflection per deg of error).
    pub fn trace(&self, kp: f64) -> Result<ErrorTrace, SimError> {
        let settings = SimSettings {
            control_rate_hz: self.control_rate_hz,
            physics_rate_hz: self.physics_rate_hz,
            ..SimSettings::default()
        };
        settings.validate()?;
        let geom = self.airframe.geometry;
        let tc = settings.control_period_s();
        let n = settings.substeps();
        let dt = tc / n as f64;
        let delay_steps = (geom.actuator_delay_s / dt).round() as usize;
        let gains = PidGains::proportional(kp);
        let mut pitch = AxisController::new(gains, geom.authority_limit_deg);
        let mut yaw = pitch;
        let trim = trim_servo(&geom);
        let mut servo = trim;
        let mut delay = DelayLine::new(trim);
        let mut state = RigidBodyState::at_rest(Quaternion::from_axis_angle(
            Vec3::unit_y(),
            self.initial_pitch_deg.to_radians(),
        ));
        let ticks = (self.duration_s * self.control_rate_hz).round() as usize;
        let mut errors = Vec::with_capacity(ticks);
        for k in 0..ticks {
            let e = to_tait_bryan(&state.attitude);
            errors.push(-e.pitch_deg);
            if tilt_angle_deg(&state.attitude) > self.divergence_tilt_deg {
                return Ok(ErrorTrace {
                    dt_s: tc,
                    errors,
                    diverged: true,
                });
            }
            let setpoint = EulerAngles::new(e.yaw_deg, 0.0, 0.0);
            let step = controller_step(&e, &setpoint, &pitch, &yaw, geom.authority_limit_deg, tc)?;
            pitch = step.pitch;
            yaw = step.yaw;
            servo = mix_to_servos(&step.command, &geom, &servo, tc);
            delay.push(k * n + delay_steps, servo);
            for j in 0..n {
                let i = k * n + j;
                let f = Forcing {
                    ignition_t_s: Some(0.0),
                    servo: delay.at(i),
                    ..Forcing::default()
                };
                state = step_dynamics(&state, &self.airframe, &f, i as f64 * dt, dt, SimMode::GroundTest)?;
            }
        }
        Ok(ErrorTrace {
            dt_s: tc,
            errors,
            diverged: false,
        })
    }
}

impl TuningPlant for ReferencePlant {
    fn run_proportional(&self, kp: f64) -> Result<ErrorTrace, ControlError> {
        self.trace(kp).map_err(|e| match e {
            SimError::Control(c) => c,
            other => ControlError::Plant(other.to_string()),
        })
    }
}

/// Search bracket and resolution for the ultimate-gain bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSettings {
    pub kp_min: f64,
    pub kp_max: f64,
    /// Relative width of the final bracket.
    pub tolerance: f64,
}

impl Default for TuneSettings {
    fn default() -> Self {
        Self {
            kp_min: 0.05,
            kp_max: 20.0,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub cycle: UltimateCycle,
    pub gains: PidGains,
}

/// Ultimate-cycle tuning of any plant followed by the classic table.
pub fn tune_plant<P: TuningPlant + ?Sized>(
    plant: &P,
    settings: &TuneSettings,
) -> Result<TuneResult, ControlError> {
    let cycle = find_ultimate_cycle(plant, settings.kp_min, settings.kp_max, settings.tolerance)?;
    let gains = zn_classic_gains(cycle.ku, cycle.tu_s)?;
    Ok(TuneResult { cycle, gains })
}

/// Tunes the configured vehicle on its reference ground-test plant.
pub fn tune_vehicle(cfg: &SimConfig, settings: &TuneSettings) -> Result<TuneResult, SimError> {
    cfg.validate()?;
    Ok(tune_plant(&ReferencePlant::from_config(cfg), settings)?)
}
