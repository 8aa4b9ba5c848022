//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use tvc_core::attitude::integrate_attitude;
use tvc_core::control::controller_step;
use tvc_core::control::tuning::{zn_classic_gains, ErrorTrace};
use tvc_core::dynamics::*;
use tvc_core::fsm::{FlightPhase, FsmEvent};
use tvc_core::telemetry::{FlightLog, LogRecord};
use tvc_core::{
    AxisController, EulerAngles, GyroBias, PidGains, PidState, PidTerms, Quaternion, ServoCommand,
    Vec3,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn tuned_reference() -> (SimConfig, TuneResult) {
    let base = SimConfig::reference(ControlGains::zero());
    let r = tune_vehicle(&base, &TuneSettings::default()).expect("reference vehicle tunes");
    (SimConfig::reference(ControlGains::both(r.gains)), r)
}

fn requirement_compliance() -> Outcome {
    let start = Instant::now();
    let (cfg, _) = tuned_reference();
    let mut worst: f64 = 0.0;
    let mut landed = 0;
    for seed in 1..=20u64 {
        let mut c = cfg.clone();
        c.disturbances.seed = seed;
        let run = run_flight_sim(&c).expect("flight runs");
        worst = worst.max(run.metrics.expect("powered window").max_deviation_deg);
        landed += usize::from(run.final_phase == FlightPhase::Landed);
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 5.0 && elapsed < 5.0,
        format!("worst max deviation {worst:.4} deg over 20 seeds ({landed} landed), {elapsed:.2} s"),
    )
}

fn ground_test_band() -> Outcome {
    let (cfg, _) = tuned_reference();
    let pulse = TorquePulse {
        t_s: 1.0,
        duration_s: 0.1,
        torque_nm: 0.055,
    };
    let run = run_ground_test(&cfg, Some(pulse)).expect("ground test runs");
    let m = run.metrics.expect("thrust window");
    let dev_ok = (0.5..=5.0).contains(&m.max_deviation_deg);
    let resp_ok = m.response_time_s.is_some_and(|r| (0.1..=1.0).contains(&r));
    outcome(
        dev_ok && resp_ok,
        format!(
            "max deviation {:.4} deg, response {:?} s",
            m.max_deviation_deg, m.response_time_s
        ),
    )
}

fn control_authority() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11);
    let mut worst: f64 = 0.0;
    let mut calls = 0;
    while calls < 100_000 {
        let gains = PidGains::new(
            rng.random_range(0.0..50.0),
            rng.random_range(0.0..50.0),
            rng.random_range(0.0..5.0),
        );
        let mut pitch = AxisController {
            gains,
            state: PidState::new(rng.random_range(0.0..100.0), 10.0),
        };
        let mut yaw = pitch;
        for _ in 0..1000 {
            let att = EulerAngles::new(
                rng.random_range(-180.0..180.0),
                rng.random_range(-90.0..90.0),
                rng.random_range(-180.0..180.0),
            );
            let sp = EulerAngles::new(0.0, rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
            let dt = rng.random_range(1e-3..0.05);
            let step = controller_step(&att, &sp, &pitch, &yaw, 10.0, dt).expect("valid step");
            worst = worst
                .max(step.command.pitch_deflect_deg.abs())
                .max(step.command.yaw_deflect_deg.abs());
            pitch = step.pitch;
            yaw = step.yaw;
            calls += 1;
        }
    }

    let cfg = SimConfig::reference(ControlGains::zero());
    let air = cfg.airframe();
    let peak = air.motor.curve.peak_thrust_n();
    let tp = air.motor.curve.peak_time_s();
    let full = 10.0 * cfg.geometry.linkage_ratio;
    let forcing = Forcing {
        ignition_t_s: Some(0.0),
        servo: ServoCommand::new(full, -full),
        ..Forcing::default()
    };
    let mut s = RigidBodyState::at_rest(Quaternion::identity());
    let dt = 1e-3;
    let mut sim_ok = true;
    for i in 0..400 {
        match step_dynamics(&s, &air, &forcing, tp - 0.2 + i as f64 * dt, dt, SimMode::Flight) {
            Ok(next) => s = next,
            Err(_) => {
                sim_ok = false;
                break;
            }
        }
    }
    let mut hot = cfg.clone();
    hot.gains = ControlGains::both(PidGains::proportional(50.0));
    let saturated = run_flight_sim(&hot);
    let sat_ok = !matches!(saturated, Err(SimError::NonFiniteState { .. }));
    outcome(
        worst <= 10.0 && peak >= 15.0 && sim_ok && sat_ok,
        format!(
            "max |deflection| {worst:.6} deg over {calls} calls; peak {peak} N, full-deflection steps finite: {sim_ok}, saturated flight finite: {sat_ok}"
        ),
    )
}

fn attitude_oracle() -> Outcome {
    let w = Vec3::new(0.3, -0.5, 0.8);
    let axis = w.scale(1.0 / w.norm());
    let dt = 0.01;
    let mut q = Quaternion::identity();
    let (mut worst_deg, mut worst_norm): (f64, f64) = (0.0, 0.0);
    for k in 1..=1000 {
        q = integrate_attitude(q, w, &GyroBias::zero(), dt).expect("finite step");
        let exact = Quaternion::from_axis_angle(axis, w.norm() * k as f64 * dt);
        worst_deg = worst_deg.max(q.angle_to(&exact).to_degrees());
        worst_norm = worst_norm.max((q.norm() - 1.0).abs());
    }
    outcome(
        worst_deg < 1e-6 && worst_norm < 1e-9,
        format!("max angle error {worst_deg:.3e} deg, max norm drift {worst_norm:.3e}"),
    )
}

fn conservation_and_order() -> Outcome {
    let air = free_airframe();
    let inertia = air.inertia_kgm2(None);
    let states = tumble(&air, 1e-3, 10_000);
    let l0 = states[0].angular_momentum(inertia);
    let drift = states
        .iter()
        .map(|s| (s.angular_momentum(inertia) - l0).norm() / l0.norm())
        .fold(0.0, f64::max);
    let order = observed_order(2.0, 0.02);
    outcome(
        drift < 1e-6 && (order - 4.0).abs() <= 0.2,
        format!("momentum drift {drift:.3e} relative over 10 s, observed order {order:.3}"),
    )
}

/// Discrete positive maxima after the first one.
fn sweep_peaks(e: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..e.len().saturating_sub(1) {
        if e[i] > 0.0 && e[i] > e[i - 1] && e[i] >= e[i + 1] {
            out.push(e[i]);
        }
    }
    out.into_iter().skip(1).collect()
}

fn not_decaying(t: &ErrorTrace) -> bool {
    if t.diverged {
        return true;
    }
    let p = sweep_peaks(&t.errors);
    p.len() >= 4 && (p[p.len() - 1] / p[0]).powf(1.0 / (p.len() - 1) as f64) >= 0.9
}

/// Mean spacing of upward zero crossings, first one dropped.
fn crossing_period(t: &ErrorTrace) -> f64 {
    let e = &t.errors;
    let mut ups = Vec::new();
    for i in 1..e.len() {
        if e[i - 1] < 0.0 && e[i] >= 0.0 {
            let frac = -e[i - 1] / (e[i] - e[i - 1]);
            ups.push((i as f64 - 1.0 + frac) * t.dt_s);
        }
    }
    let ups = &ups[1..];
    (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64
}

fn zn_oracle() -> Outcome {
    let (cfg, r) = tuned_reference();
    let plant = ReferencePlant::from_config(&cfg);
    let settings = TuneSettings::default();
    let mut kp = settings.kp_min;
    let mut sweeps = 0;
    let found = loop {
        if kp > settings.kp_max {
            break None;
        }
        let t = plant.trace(kp).expect("plant runs");
        sweeps += 1;
        if not_decaying(&t) {
            break Some((kp, t));
        }
        kp *= 1.001;
    };
    let Some((ku_ref, trace)) = found else {
        return outcome(false, "brute-force sweep found no sustained oscillation".into());
    };
    // the bracketing gain diverges quickly; time the period just below it
    let tu_ref = crossing_period(&plant.trace(ku_ref / 1.001).expect("plant runs"))
        .min(if trace.diverged { f64::INFINITY } else { crossing_period(&trace) });
    let (ku, tu) = (r.cycle.ku, r.cycle.tu_s);
    let ku_err = (ku - ku_ref).abs() / ku_ref;
    let tu_err = (tu - tu_ref).abs() / tu_ref;
    let table = PidGains::new(0.6 * ku, 1.2 * ku / tu, 0.075 * ku * tu);
    let exact = r.gains == table && zn_classic_gains(ku, tu).ok() == Some(table);
    outcome(
        ku_err <= 0.05 && tu_err <= 0.05 && exact,
        format!(
            "ku {ku:.5} vs sweep {ku_ref:.5} ({:.2}%), tu {tu:.5} vs {tu_ref:.5} s ({:.2}%), {sweeps} sweep runs, table exact: {exact}",
            100.0 * ku_err,
            100.0 * tu_err
        ),
    )
}

fn fsm_trace() -> Outcome {
    let (cfg, _) = tuned_reference();
    let run = run_flight_sim(&cfg).expect("flight runs");
    use FlightPhase::*;
    let mut seen = Vec::new();
    for r in &run.log.records {
        if seen.last() != Some(&r.phase) {
            seen.push(r.phase);
        }
    }
    let order_ok = seen == [PadIdle, Armed, PoweredAscent, Coast, DescentRecovery, Landed];
    let at = |ev: FsmEvent| -> Vec<f64> {
        run.events.iter().filter(|(_, e)| *e == ev).map(|(t, _)| *t).collect()
    };
    let (on, off, deploy) = (at(FsmEvent::ControlEnable), at(FsmEvent::ControlDisable), at(FsmEvent::DeployChute));
    let bracket_ok = on.len() == 1
        && off.len() == 1
        && run.log.records.iter().all(|r| {
            let inside = r.t_s >= on[0] - 1e-9 && r.t_s < off[0] - 1e-9;
            inside == (r.phase == PoweredAscent)
        });
    let quiet_ok = run
        .log
        .records
        .iter()
        .filter(|r| r.phase != PoweredAscent)
        .all(|r| r.pitch_terms == PidTerms::zero() && r.gimbal_pitch_deg == 0.0 && r.gimbal_yaw_deg == 0.0);
    outcome(
        order_ok && bracket_ok && quiet_ok && deploy.len() == 1,
        format!(
            "phases {:?}; control {:?}..{:?} brackets powered records: {bracket_ok}, idle outside: {quiet_ok}; deploys {}",
            seen.iter().map(|p| p.name()).collect::<Vec<_>>(),
            on.first(),
            off.first(),
            deploy.len()
        ),
    )
}

fn fuzz_record(rng: &mut ChaCha8Rng, t_s: f64) -> LogRecord {
    let mut v = |scale: f64| rng.random_range(-scale..scale);
    LogRecord {
        t_s,
        phase: FlightPhase::ALL[(v(1.0).abs() * 7.0) as usize % 7],
        gyro_rps: Vec3::new(v(10.0), v(10.0), v(10.0)),
        attitude: Quaternion::new(v(1.0), v(1.0), v(1.0), v(1.0)),
        euler: EulerAngles::new(v(180.0), v(90.0), v(180.0)),
        tilt_deg: v(180.0).abs(),
        gimbal_pitch_deg: v(10.0),
        gimbal_yaw_deg: v(10.0),
        servo_pitch_deg: v(30.0),
        servo_yaw_deg: v(30.0),
        thrust_n: v(20.0).abs(),
        pitch_terms: PidTerms { p: v(10.0), i: v(10.0), d: v(10.0) },
        yaw_terms: PidTerms { p: v(10.0), i: v(10.0), d: v(10.0) },
        position_m: Vec3::new(v(1e3), v(1e3), v(1e3)),
        velocity_mps: Vec3::new(v(100.0), v(100.0), v(100.0)),
    }
}

fn logging_rates() -> Outcome {
    let (mut cfg, _) = tuned_reference();
    cfg.motor.curve = ThrustCurve::new(vec![(0.0, 15.0), (1.995, 15.0), (2.0, 0.0)]).expect("curve");
    cfg.disturbances.launch_tilt_deg = 0.0;
    // no drag, so the accelerometer sees burnout the moment thrust stops
    cfg.vehicle.drag_area_m2 = 0.0;
    let run = run_flight_sim(&cfg).expect("flight runs");
    let count = |f: fn(FlightPhase) -> bool| run.log.records.iter().filter(|r| f(r.phase)).count();
    let pad = count(|p| matches!(p, FlightPhase::PadIdle | FlightPhase::Armed));
    let powered = count(|p| p == FlightPhase::PoweredAscent);

    let mut rng = ChaCha8Rng::seed_from_u64(0x10C);
    let mut log = FlightLog::default();
    let mut t = 0.0;
    for _ in 0..10_000 {
        t += rng.random_range(1e-3..1.0);
        log.push(fuzz_record(&mut rng, t)).expect("increasing time");
    }
    let log = log.quantized();
    let csv = log.to_csv();
    let back = FlightLog::parse_csv(&csv).expect("parses");
    let identity = back == log && back.to_csv() == csv;
    outcome(
        (9..=11).contains(&pad) && (119..=121).contains(&powered) && identity,
        format!("pad records {pad}, powered records {powered}, round trip of 10000 records identical: {identity}"),
    )
}

fn determinism() -> Outcome {
    let (cfg, _) = tuned_reference();
    let a = run_flight_sim(&cfg).expect("flight runs").log.to_csv();
    let b = run_flight_sim(&cfg).expect("flight runs").log.to_csv();
    outcome(a.as_bytes() == b.as_bytes(), format!("{} bytes, identical: {}", a.len(), a == b))
}

fn motor_ingestion() -> Outcome {
    let m = reference_motor();
    let (peak, impulse) = (m.curve.peak_thrust_n(), m.curve.total_impulse());
    let header = "T1 24 70 P 0.01 0.02 Test\n";
    let cases = [
        ("T1 24 70\n0.1 1.0\n0.2 0.0\n".to_string(), "MalformedHeader"),
        (format!("{header}0.1 5.0\n0.1 6.0\n0.2 0.0\n"), "NonMonotonicTime"),
        (format!("{header}0.1 5.0\n0.2 -1.0\n0.3 0.0\n"), "NegativeThrust"),
        (format!("{header}0.1 5.0\n0.2 3.0\n"), "MissingZeroTerminator"),
    ];
    let mut rejected = Vec::new();
    for (text, want) in &cases {
        let ok = matches!(
            (parse_eng(text), *want),
            (Err(MotorError::MalformedHeader { .. }), "MalformedHeader")
                | (Err(MotorError::NonMonotonicTime { .. }), "NonMonotonicTime")
                | (Err(MotorError::NegativeThrust { .. }), "NegativeThrust")
                | (Err(MotorError::MissingZeroTerminator), "MissingZeroTerminator")
        );
        if ok {
            rejected.push(*want);
        }
    }
    outcome(
        peak >= 15.0 && impulse > 20.0 && impulse <= 40.0 && rejected.len() == cases.len(),
        format!("peak {peak} N, impulse {impulse:.4} N s, rejected {rejected:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("requirement compliance", requirement_compliance),
        ("ground-test band", ground_test_band),
        ("control authority", control_authority),
        ("attitude oracle", attitude_oracle),
        ("conservation and order", conservation_and_order),
        ("ziegler-nichols oracle", zn_oracle),
        ("fsm trace", fsm_trace),
        ("logging rates", logging_rates),
        ("determinism", determinism),
        ("motor ingestion", motor_ingestion),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
