#![allow(dead_code)]

use tvc_core::dynamics::{
    step_dynamics, Airframe, Forcing, RigidBodyState, SimMode, VehicleParams,
};
use tvc_core::{Quaternion, Vec3};

/// Free rigid body as `[qw, qx, qy, qz, wx, wy, wz]`, integrated with a plain RK4.
pub type Free = [f64; 7];

fn free_rate(s: &Free, i: [f64; 3]) -> Free {
    let (w, x, y, z) = (s[0], s[1], s[2], s[3]);
    let (p, q, r) = (s[4], s[5], s[6]);
    [
        0.5 * (-x * p - y * q - z * r),
        0.5 * (w * p + y * r - z * q),
        0.5 * (w * q + z * p - x * r),
        0.5 * (w * r + x * q - y * p),
        (i[1] - i[2]) * q * r / i[0],
        (i[2] - i[0]) * r * p / i[1],
        (i[0] - i[1]) * p * q / i[2],
    ]
}

fn axpy(s: &Free, d: &Free, h: f64) -> Free {
    let mut o = *s;
    for k in 0..7 {
        o[k] += d[k] * h;
    }
    o
}

pub fn free_oracle(mut s: Free, inertia: [f64; 3], dt: f64, steps: usize) -> Free {
    for _ in 0..steps {
        let k1 = free_rate(&s, inertia);
        let k2 = free_rate(&axpy(&s, &k1, dt / 2.0), inertia);
        let k3 = free_rate(&axpy(&s, &k2, dt / 2.0), inertia);
        let k4 = free_rate(&axpy(&s, &k3, dt), inertia);
        for k in 0..7 {
            s[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        let n = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2] + s[3] * s[3]).sqrt();
        for v in s.iter_mut().take(4) {
            *v /= n;
        }
    }
    s
}

pub const TUMBLE_INERTIA: [f64; 3] = [0.010, 0.016, 0.004];
pub const TUMBLE_RATE: [f64; 3] = [1.5, -0.7, 4.0];

/// Unpowered, dragless airframe with the tumbling inertia.
pub fn free_airframe() -> Airframe {
    let mut cfg = tvc_core::dynamics::SimConfig::reference(tvc_core::dynamics::ControlGains::zero());
    cfg.vehicle = VehicleParams {
        inertia_kgm2: Vec3::new(TUMBLE_INERTIA[0], TUMBLE_INERTIA[1], TUMBLE_INERTIA[2]),
        drag_area_m2: 0.0,
        ..VehicleParams::default()
    };
    cfg.airframe()
}

pub fn tumble_start() -> RigidBodyState {
    let mut s = RigidBodyState::at_rest(Quaternion::from_axis_angle(
        Vec3::new(1.0, 1.0, 0.0).scale(1.0 / 2f64.sqrt()),
        0.3,
    ));
    s.angular_velocity_rps = Vec3::new(TUMBLE_RATE[0], TUMBLE_RATE[1], TUMBLE_RATE[2]);
    s
}

pub fn as_free(s: &RigidBodyState) -> Free {
    let (q, w) = (s.attitude, s.angular_velocity_rps);
    [q.w, q.x, q.y, q.z, w.x, w.y, w.z]
}

/// Integrates the library model torque-free with step `dt` for `steps` steps.
pub fn tumble(air: &Airframe, dt: f64, steps: usize) -> Vec<RigidBodyState> {
    let mut s = tumble_start();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s);
    let f = Forcing::default();
    for i in 0..steps {
        s = step_dynamics(&s, air, &f, i as f64 * dt, dt, SimMode::Flight).unwrap();
        out.push(s);
    }
    out
}

/// Max-norm difference of angular velocity and attitude (sign-aligned quaternion).
pub fn free_distance(a: &Free, b: &Free) -> f64 {
    let dot: f64 = (0..4).map(|k| a[k] * b[k]).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    (0..7)
        .map(|k| if k < 4 { (a[k] - sign * b[k]).abs() } else { (a[k] - b[k]).abs() })
        .fold(0.0, f64::max)
}

/// Observed convergence order of the library integrator on the tumble over `t_s`.
pub fn observed_order(t_s: f64, coarse_dt: f64) -> f64 {
    let air = free_airframe();
    let reference = free_oracle(as_free(&tumble_start()), TUMBLE_INERTIA, coarse_dt / 64.0, (t_s / coarse_dt * 64.0).round() as usize);
    let err = |dt: f64| {
        let n = (t_s / dt).round() as usize;
        let end = tumble(&air, dt, n)[n];
        free_distance(&as_free(&end), &reference)
    };
    (err(coarse_dt) / err(coarse_dt / 2.0)).log2()
}
