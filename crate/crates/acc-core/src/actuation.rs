//! Low-level layer: rate-limited setpoint propagation, PI tracking and
//! saturation by the limit model.
//!
//! The planner target does not carry the acceleration limit; the internal
//! setpoint does. When the target outruns the bound the setpoint advances at
//! exactly the bound, which is what lets the gap grow past the desired
//! spacing and later forces the overshoot. Saturation is applied twice: at
//! the setpoint rate and again on the final PI command.

use serde::{Deserialize, Serialize};

use crate::model::LimitModel;
use crate::Error;

/// Gains of the speed-tracking PI loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiGains {
    /// Proportional gain (1/s).
    pub kp: f64,
    /// Integral gain (1/s^2).
    pub ki: f64,
    /// Integral clamp magnitude (m/s).
    pub i_cap: f64,
}

impl Default for PiGains {
    fn default() -> Self {
        // Stable with visible but bounded integral overshoot.
        PiGains { kp: 0.9, ki: 0.1, i_cap: 5.0 }
    }
}

impl PiGains {
    pub fn validate(&self, ctx: &str) -> Result<(), Error> {
        let bad = |f: &str, m: &str| Err(Error::InvalidScenario(format!("{ctx}{f}: {m}")));
        if !(self.kp > 0.0) {
            return bad("kp", "proportional gain must be > 0");
        }
        if !(self.ki >= 0.0) {
            return bad("ki", "integral gain must be >= 0");
        }
        if !(self.i_cap > 0.0) {
            return bad("i_cap", "integral clamp must be > 0");
        }
        Ok(())
    }
}

/// Move the setpoint toward the planner target, no faster than the bounds
/// allow at the current ego speed, and never below zero.
pub fn advance_setpoint(
    v_pid: f64,
    v_target: f64,
    v_ego: f64,
    lim: &LimitModel,
    dt: f64,
) -> f64 {
    let lo = v_pid + lim.decel_bound(v_ego) * dt;
    let hi = v_pid + lim.accel_bound(v_ego) * dt;
    v_target.clamp(lo, hi).max(0.0)
}

/// One PI update tracking the setpoint. Returns the saturated acceleration
/// command and the updated integral accumulator.
pub fn pi_step(
    v: f64,
    i_term: f64,
    v_pid: f64,
    gains: &PiGains,
    lim: Option<&LimitModel>,
    dt: f64,
) -> (f64, f64) {
    let err = v_pid - v;
    let mut a = gains.kp * err + gains.ki * i_term;
    if let Some(l) = lim {
        a = a.clamp(l.decel_bound(v), l.accel_bound(v));
    }
    let i_new = (i_term + err * dt).clamp(-gains.i_cap, gains.i_cap);
    (a, i_new)
}

/// Closed-form speed after `t` seconds of sustained maximum acceleration
/// from `v0`: `(v0 - v_c - a0/beta) * exp(-beta t) + a0/beta + v_c`, or the
/// constant-bound line `v0 + a0 t` when `beta == 0`.
pub fn max_accel_speed(v0: f64, lim: &LimitModel, t: f64) -> f64 {
    if lim.beta == 0.0 {
        return v0 + lim.a0 * t;
    }
    let k = lim.a0 / lim.beta + lim.v_c;
    (v0 - k) * (-lim.beta * t).exp() + k
}

/// Time integral of [`max_accel_speed`] over `[0, t]` (distance covered on
/// the maximum-acceleration trajectory).
pub fn max_accel_distance(v0: f64, lim: &LimitModel, t: f64) -> f64 {
    if lim.beta == 0.0 {
        return v0 * t + 0.5 * lim.a0 * t * t;
    }
    let k = lim.a0 / lim.beta + lim.v_c;
    -(v0 - k) / lim.beta * ((-lim.beta * t).exp() - 1.0) + k * t
}
