//! Mission state machine.
//!
//! Phases only move forward: PadIdle → Armed → PoweredAscent → Coast → DescentRecovery →
//! Landed, with Abort reachable from PoweredAscent. Thrust-vector control is enabled on
//! entry to PoweredAscent and disabled on leaving it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlightPhase {
    PadIdle,
    Armed,
    PoweredAscent,
    Coast,
    DescentRecovery,
    Landed,
    Abort,
}

impl FlightPhase {
    pub const ALL: [FlightPhase; 7] = [
        FlightPhase::PadIdle,
        FlightPhase::Armed,
        FlightPhase::PoweredAscent,
        FlightPhase::Coast,
        FlightPhase::DescentRecovery,
        FlightPhase::Landed,
        FlightPhase::Abort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlightPhase::PadIdle => "PadIdle",
            FlightPhase::Armed => "Armed",
            FlightPhase::PoweredAscent => "PoweredAscent",
            FlightPhase::Coast => "Coast",
            FlightPhase::DescentRecovery => "DescentRecovery",
            FlightPhase::Landed => "Landed",
            FlightPhase::Abort => "Abort",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, FlightPhase::Landed | FlightPhase::Abort)
    }
}

impl fmt::Display for FlightPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPhase(pub String);

impl fmt::Display for UnknownPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown flight phase {:?}", self.0)
    }
}

impl std::error::Error for UnknownPhase {}

impl FromStr for FlightPhase {
    type Err = UnknownPhase;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FlightPhase::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownPhase(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FsmEvent {
    Ignite,
    ControlEnable,
    ControlDisable,
    DeployChute,
    LogRateHigh,
    LogRateLow,
}

/// What the flight computer senses on one loop iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensedInputs {
    pub t_s: f64,
    pub accel_magnitude_g: f64,
    pub vertical_velocity_mps: f64,
    pub altitude_m: f64,
    pub tilt_deg: f64,
    pub arm_commanded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsmConfig {
    pub launch_threshold_g: f64,
    pub burnout_threshold_g: f64,
    /// Consecutive samples required by the launch and burnout detectors.
    pub detect_count: u32,
    pub max_burn_s: f64,
    /// Deploy on descent below this altitude instead of at apogee.
    pub deploy_altitude_m: Option<f64>,
    pub landed_alt_m: f64,
    pub landed_vel_mps: f64,
    pub landed_hold_s: f64,
    pub abort_tilt_deg: f64,
    /// Countdown from arming to the igniter firing.
    pub ignite_delay_s: f64,
}

impl Default for FsmConfig {
    fn default() -> Self {
        Self {
            launch_threshold_g: 2.0,
            burnout_threshold_g: 0.5,
            detect_count: 3,
            max_burn_s: 4.0,
            deploy_altitude_m: None,
            landed_alt_m: 1.0,
            landed_vel_mps: 0.5,
            landed_hold_s: 1.0,
            abort_tilt_deg: 45.0,
            ignite_delay_s: 8.0,
        }
    }
}

/// Detector counters and timestamps carried between calls.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FsmHistory {
    pub launch_count: u32,
    pub burnout_count: u32,
    pub armed_t_s: Option<f64>,
    pub ignited: bool,
    pub launch_t_s: Option<f64>,
    pub landed_since_t_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsmStep {
    pub phase: FlightPhase,
    pub events: Vec<FsmEvent>,
    pub history: FsmHistory,
}

/// One evaluation of the transition function.
pub fn fsm_step(
    phase: FlightPhase,
    inputs: &SensedInputs,
    cfg: &FsmConfig,
    history: &FsmHistory,
) -> FsmStep {
    let mut h = *history;
    let mut events = Vec::new();
    let finite = inputs.t_s.is_finite()
        && inputs.accel_magnitude_g.is_finite()
        && inputs.vertical_velocity_mps.is_finite()
        && inputs.altitude_m.is_finite()
        && inputs.tilt_deg.is_finite();
    if !finite {
        return FsmStep {
            phase,
            events,
            history: h,
        };
    }

    let next = match phase {
        FlightPhase::PadIdle => {
            if inputs.arm_commanded {
                h.armed_t_s = Some(inputs.t_s);
                FlightPhase::Armed
            } else {
                phase
            }
        }
        FlightPhase::Armed => {
            let armed_at = *h.armed_t_s.get_or_insert(inputs.t_s);
            if !h.ignited && inputs.t_s - armed_at >= cfg.ignite_delay_s - 1e-9 {
                h.ignited = true;
                events.push(FsmEvent::Ignite);
            }
            if inputs.accel_magnitude_g > cfg.launch_threshold_g {
                h.launch_count += 1;
            } else {
                h.launch_count = 0;
            }
            if h.launch_count >= cfg.detect_count {
                h.launch_t_s = Some(inputs.t_s);
                events.push(FsmEvent::ControlEnable);
                events.push(FsmEvent::LogRateHigh);
                FlightPhase::PoweredAscent
            } else {
                phase
            }
        }
        FlightPhase::PoweredAscent => {
            if inputs.tilt_deg > cfg.abort_tilt_deg {
                events.push(FsmEvent::ControlDisable);
                events.push(FsmEvent::DeployChute);
                FlightPhase::Abort
            } else {
                if inputs.accel_magnitude_g < cfg.burnout_threshold_g {
                    h.burnout_count += 1;
                } else {
                    h.burnout_count = 0;
                }
                let launched = *h.launch_t_s.get_or_insert(inputs.t_s);
                let timed_out = inputs.t_s - launched > cfg.max_burn_s;
                if h.burnout_count >= cfg.detect_count || timed_out {
                    events.push(FsmEvent::ControlDisable);
                    FlightPhase::Coast
                } else {
                    phase
                }
            }
        }
        FlightPhase::Coast => {
            let deploy = match cfg.deploy_altitude_m {
                None => inputs.vertical_velocity_mps <= 0.0,
                Some(alt) => inputs.vertical_velocity_mps < 0.0 && inputs.altitude_m <= alt,
            };
            if deploy {
                events.push(FsmEvent::DeployChute);
                FlightPhase::DescentRecovery
            } else {
                phase
            }
        }
        FlightPhase::DescentRecovery => {
            let resting = inputs.altitude_m < cfg.landed_alt_m
                && inputs.vertical_velocity_mps.abs() < cfg.landed_vel_mps;
            if resting {
                let since = *h.landed_since_t_s.get_or_insert(inputs.t_s);
                if inputs.t_s - since >= cfg.landed_hold_s - 1e-9 {
                    events.push(FsmEvent::LogRateLow);
                    FlightPhase::Landed
                } else {
                    phase
                }
            } else {
                h.landed_since_t_s = None;
                phase
            }
        }
        FlightPhase::Landed | FlightPhase::Abort => phase,
    };
    FsmStep {
        phase: next,
        events,
        history: h,
    }
}

/// Owns the phase and detector history of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightStateMachine {
    pub config: FsmConfig,
    phase: FlightPhase,
    history: FsmHistory,
    control_active: bool,
}

impl FlightStateMachine {
    pub fn new(config: FsmConfig) -> Self {
        Self {
            config,
            phase: FlightPhase::PadIdle,
            history: FsmHistory::default(),
            control_active: false,
        }
    }

    pub fn phase(&self) -> FlightPhase {
        self.phase
    }

    pub fn history(&self) -> &FsmHistory {
        &self.history
    }

    /// True between ControlEnable and ControlDisable.
    pub fn control_active(&self) -> bool {
        self.control_active
    }

    pub fn step(&mut self, inputs: &SensedInputs) -> Vec<FsmEvent> {
        let out = fsm_step(self.phase, inputs, &self.config, &self.history);
        self.phase = out.phase;
        self.history = out.history;
        for e in &out.events {
            match e {
                FsmEvent::ControlEnable => self.control_active = true,
                FsmEvent::ControlDisable => self.control_active = false,
                _ => {}
            }
        }
        out.events
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(t: f64) -> SensedInputs {
        SensedInputs {
            t_s: t,
            accel_magnitude_g: 1.0,
            vertical_velocity_mps: 0.0,
            altitude_m: 0.0,
            tilt_deg: 0.0,
            arm_commanded: false,
        }
    }

    #[test]
    fn arming_emits_nothing() {
        let s = fsm_step(
            FlightPhase::PadIdle,
            &SensedInputs {
                arm_commanded: true,
                ..inputs(0.0)
            },
            &FsmConfig::default(),
            &FsmHistory::default(),
        );
        assert_eq!(s.phase, FlightPhase::Armed);
        assert!(s.events.is_empty());
    }

    #[test]
    fn launch_needs_three_consecutive_samples() {
        let cfg = FsmConfig::default();
        let mut h = FsmHistory {
            armed_t_s: Some(0.0),
            ignited: true,
            ..Default::default()
        };
        let mut phase = FlightPhase::Armed;
        let mut events = Vec::new();
        for k in 0..3 {
            let s = fsm_step(
                phase,
                &SensedInputs {
                    accel_magnitude_g: 3.1,
                    ..inputs(1.0 + k as f64 * 0.01)
                },
                &cfg,
                &h,
            );
            phase = s.phase;
            h = s.history;
            events = s.events;
            if k < 2 {
                assert_eq!(phase, FlightPhase::Armed);
            }
        }
        assert_eq!(phase, FlightPhase::PoweredAscent);
        assert_eq!(events, vec![FsmEvent::ControlEnable, FsmEvent::LogRateHigh]);
    }

    #[test]
    fn single_glitch_does_not_launch() {
        let cfg = FsmConfig::default();
        let mut m = FlightStateMachine::new(cfg);
        m.step(&SensedInputs {
            arm_commanded: true,
            ..inputs(0.0)
        });
        for k in 1..100 {
            let accel = if k % 3 == 0 { 5.0 } else { 1.0 };
            m.step(&SensedInputs {
                accel_magnitude_g: accel,
                ..inputs(k as f64 * 0.01)
            });
        }
        assert_eq!(m.phase(), FlightPhase::Armed);
    }

    #[test]
    fn ignite_after_countdown() {
        let cfg = FsmConfig {
            ignite_delay_s: 1.0,
            ..Default::default()
        };
        let mut m = FlightStateMachine::new(cfg);
        m.step(&SensedInputs {
            arm_commanded: true,
            ..inputs(0.0)
        });
        let mut fired = Vec::new();
        for k in 1..300 {
            let t = k as f64 * 0.01;
            if m.step(&inputs(t)).contains(&FsmEvent::Ignite) {
                fired.push(t);
            }
        }
        assert_eq!(fired.len(), 1);
        assert!((fired[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn apogee_deploys_chute() {
        let s = fsm_step(
            FlightPhase::Coast,
            &SensedInputs {
                vertical_velocity_mps: -0.2,
                altitude_m: 60.0,
                ..inputs(5.0)
            },
            &FsmConfig::default(),
            &FsmHistory::default(),
        );
        assert_eq!(s.phase, FlightPhase::DescentRecovery);
        assert_eq!(s.events, vec![FsmEvent::DeployChute]);
    }

    #[test]
    fn altitude_deploy_waits_for_low_altitude() {
        let cfg = FsmConfig {
            deploy_altitude_m: Some(30.0),
            ..Default::default()
        };
        let high = SensedInputs {
            vertical_velocity_mps: -3.0,
            altitude_m: 50.0,
            ..inputs(5.0)
        };
        let s = fsm_step(FlightPhase::Coast, &high, &cfg, &FsmHistory::default());
        assert_eq!(s.phase, FlightPhase::Coast);
        let low = SensedInputs {
            altitude_m: 29.0,
            ..high
        };
        let s = fsm_step(FlightPhase::Coast, &low, &cfg, &FsmHistory::default());
        assert_eq!(s.phase, FlightPhase::DescentRecovery);
    }

    #[test]
    fn excessive_tilt_aborts() {
        let s = fsm_step(
            FlightPhase::PoweredAscent,
            &SensedInputs {
                tilt_deg: 50.0,
                accel_magnitude_g: 3.0,
                ..inputs(2.0)
            },
            &FsmConfig::default(),
            &FsmHistory {
                launch_t_s: Some(1.0),
                ..Default::default()
            },
        );
        assert_eq!(s.phase, FlightPhase::Abort);
        assert_eq!(s.events, vec![FsmEvent::ControlDisable, FsmEvent::DeployChute]);
    }

    #[test]
    fn burn_timeout_forces_coast() {
        let cfg = FsmConfig::default();
        let h = FsmHistory {
            launch_t_s: Some(1.0),
            ..Default::default()
        };
        let s = fsm_step(
            FlightPhase::PoweredAscent,
            &SensedInputs {
                accel_magnitude_g: 3.0,
                ..inputs(1.0 + cfg.max_burn_s + 0.01)
            },
            &cfg,
            &h,
        );
        assert_eq!(s.phase, FlightPhase::Coast);
        assert_eq!(s.events, vec![FsmEvent::ControlDisable]);
    }

    #[test]
    fn landing_requires_hold() {
        let cfg = FsmConfig::default();
        let mut m = FlightStateMachine {
            phase: FlightPhase::DescentRecovery,
            ..FlightStateMachine::new(cfg)
        };
        let mut landed_at = None;
        for k in 0..300 {
            let t = k as f64 * 0.01;
            if m.step(&inputs(t)).contains(&FsmEvent::LogRateLow) {
                landed_at = Some(t);
            }
        }
        assert_eq!(m.phase(), FlightPhase::Landed);
        assert!((landed_at.unwrap() - cfg.landed_hold_s).abs() < 1e-9);
    }

    #[test]
    fn non_finite_inputs_are_ignored() {
        let s = fsm_step(
            FlightPhase::PoweredAscent,
            &SensedInputs {
                tilt_deg: f64::NAN,
                ..inputs(1.0)
            },
            &FsmConfig::default(),
            &FsmHistory::default(),
        );
        assert_eq!(s.phase, FlightPhase::PoweredAscent);
        assert!(s.events.is_empty());
    }

    #[test]
    fn phase_names_round_trip() {
        for p in FlightPhase::ALL {
            assert_eq!(p.name().parse::<FlightPhase>().unwrap(), p);
        }
        assert!("Orbit".parse::<FlightPhase>().is_err());
    }
}
