use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::real::Real;

/// Controller gains. Units: output-degrees per degree, per degree·second, per degree/second.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidGains<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
}

impl<T: Real> PidGains<T> {
    pub fn new(kp: T, ki: T, kd: T) -> Self {
        Self { kp, ki, kd }
    }

    pub fn proportional(kp: T) -> Self {
        Self::new(kp, T::zero(), T::zero())
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let ok = |g: T| g.is_finite() && g >= T::zero();
        if ok(self.kp) && ok(self.ki) && ok(self.kd) {
            Ok(())
        } else {
            Err(ControlError::InvalidGains)
        }
    }
}

/// Integrator and derivative memory of one PID channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState<T> {
    /// Accumulated error, degree·seconds; always within `±integral_limit`.
    pub integral: T,
    pub prev_error: Option<T>,
    pub integral_limit: T,
    pub output_limit: T,
}

impl<T: Real> PidState<T> {
    pub fn new(integral_limit: T, output_limit: T) -> Self {
        Self {
            integral: T::zero(),
            prev_error: None,
            integral_limit,
            output_limit,
        }
    }

    /// Fresh state with `integral_limit = output_limit / max(ki, ε)`.
    pub fn for_gains(gains: &PidGains<T>, output_limit: T) -> Self {
        let ki = gains.ki.max(T::epsilon());
        Self::new(output_limit / ki, output_limit)
    }

    pub fn reset(&mut self) {
        self.integral = T::zero();
        self.prev_error = None;
    }
}

/// Contribution of each PID term to one output, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidTerms<T> {
    pub p: T,
    pub i: T,
    pub d: T,
}

impl<T: Real> PidTerms<T> {
    pub fn zero() -> Self {
        Self {
            p: T::zero(),
            i: T::zero(),
            d: T::zero(),
        }
    }
}

/// One PID update.
///
/// The rectangle-rule integral is clamped to `±integral_limit` before use; derivative is the
/// first difference of the error (zero on the first call). Output is clamped to
/// `±output_limit`.
pub fn pid_step<T: Real>(
    state: &PidState<T>,
    gains: &PidGains<T>,
    error_deg: T,
    dt_s: T,
) -> Result<(T, PidState<T>, PidTerms<T>), ControlError> {
    if !error_deg.is_finite() || !dt_s.is_finite() {
        return Err(ControlError::NonFiniteInput);
    }
    if dt_s <= T::zero() {
        return Err(ControlError::NonPositiveInput("dt_s"));
    }
    let limit = state.integral_limit;
    let integral = (state.integral + error_deg * dt_s).max(-limit).min(limit);
    let derivative = match state.prev_error {
        Some(prev) => (error_deg - prev) / dt_s,
        None => T::zero(),
    };
    let terms = PidTerms {
        p: gains.kp * error_deg,
        i: gains.ki * integral,
        d: gains.kd * derivative,
    };
    let raw = terms.p + terms.i + terms.d;
    if !raw.is_finite() {
        return Err(ControlError::NonFiniteInput);
    }
    let output = raw.max(-state.output_limit).min(state.output_limit);
    let next = PidState {
        integral,
        prev_error: Some(error_deg),
        ..*state
    };
    Ok((output, next, terms))
}
