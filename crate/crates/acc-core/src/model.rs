//! Shared domain types: controller parameters, limit models, vehicle state
//! and lead-vehicle speed profiles.
//!
//! Conventions: SI units throughout, accelerations signed with braking
//! negative, vehicles are point masses so the minimum gap `delta` absorbs
//! vehicle length and a crash is spacing <= 0.

use serde::{Deserialize, Serialize};

/// Planner gain as a function of ego speed.
///
/// Production planners schedule the gain over speed; a constant gain is the
/// common case and the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSchedule {
    Constant(f64),
    /// Piecewise-constant table of `(min_speed, gain)` rows sorted by
    /// `min_speed`; the row with the largest `min_speed <= v` applies.
    Table(Vec<GainStep>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainStep {
    pub min_speed: f64,
    pub k: f64,
}

impl GainSchedule {
    pub fn at(&self, v: f64) -> f64 {
        match self {
            GainSchedule::Constant(k) => *k,
            GainSchedule::Table(steps) => steps
                .iter()
                .rev()
                .find(|s| s.min_speed <= v)
                .or_else(|| steps.first())
                .map(|s| s.k)
                .unwrap_or(0.0),
        }
    }

    fn max_gain(&self) -> f64 {
        match self {
            GainSchedule::Constant(k) => *k,
            GainSchedule::Table(steps) => steps.iter().map(|s| s.k).fold(f64::MIN, f64::max),
        }
    }

    fn min_gain(&self) -> f64 {
        match self {
            GainSchedule::Constant(k) => *k,
            GainSchedule::Table(steps) => steps.iter().map(|s| s.k).fold(f64::MAX, f64::min),
        }
    }
}

/// Upper-planner parameters of the factory linear ACC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccParams {
    /// Planner gain per speed level (1/s).
    pub k_v: GainSchedule,
    /// Desired time headway (s).
    pub tau: f64,
    /// Minimum safe gap (m).
    pub delta: f64,
    /// Cruise set-speed cap (m/s).
    pub v_set: f64,
}

impl Default for AccParams {
    fn default() -> Self {
        AccParams {
            k_v: GainSchedule::Constant(0.5),
            tau: 1.5,
            delta: 2.0,
            v_set: 45.0,
        }
    }
}

impl AccParams {
    /// Scheduled gain at ego speed `v`.
    pub fn gain_at(&self, v: f64) -> f64 {
        self.k_v.at(v)
    }

    pub fn validate(&self, ctx: &str) -> Result<(), crate::Error> {
        let bad = |field: &str, msg: &str| {
            Err(crate::Error::InvalidScenario(format!("{ctx}{field}: {msg}")))
        };
        if !(self.k_v.min_gain() > 0.0) {
            return bad("k_v", "gain must be > 0 at every speed level");
        }
        let _ = self.k_v.max_gain();
        if !(self.tau > 0.0) {
            return bad("tau", "time headway must be > 0");
        }
        if !(self.delta >= 0.0) {
            return bad("delta", "minimum gap must be >= 0");
        }
        if !(self.v_set > 0.0) {
            return bad("v_set", "set speed must be > 0");
        }
        Ok(())
    }
}

/// Equilibrium (desired) spacing of the constant-time-headway policy:
/// `tau * v + delta`.
pub fn equilibrium_spacing(v: f64, params: &AccParams) -> f64 {
    params.tau * v + params.delta
}

/// Linear acceleration and deceleration bounds of the low-level layer.
///
/// The acceleration bound is `a0 + (v_c - v) * beta`, strongest at standstill
/// and tapering toward the reference speed `v_c`. The deceleration bound
/// mirrors that shape with `(d0, theta)`: braking authority shrinks as speed
/// rises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitModel {
    /// Acceleration intercept at the reference speed (m/s^2).
    pub a0: f64,
    /// Acceleration slope over speed (1/s).
    pub beta: f64,
    /// Reference speed (m/s).
    pub v_c: f64,
    /// Deceleration intercept at the reference speed, positive magnitude (m/s^2).
    pub d0: f64,
    /// Deceleration slope over speed (1/s).
    pub theta: f64,
}

impl Default for LimitModel {
    fn default() -> Self {
        // Acceleration side matches empirical market-ACC estimates; the
        // deceleration side is configuration (no published values), scaled so
        // the bound at highway speed is roughly half an emergency stop.
        LimitModel {
            a0: 0.4,
            beta: 0.015,
            v_c: 40.0,
            d0: 2.05,
            theta: 0.03,
        }
    }
}

impl LimitModel {
    /// Maximum acceleration available at speed `v` (signed, positive below
    /// `v_c`; may go negative above, which acts as a speed cap).
    pub fn accel_bound(&self, v: f64) -> f64 {
        self.a0 + (self.v_c - v) * self.beta
    }

    /// Maximum deceleration available at speed `v`, signed (always negative
    /// for `v <= v_c`). High speed means weaker braking.
    pub fn decel_bound(&self, v: f64) -> f64 {
        -(self.d0 + (self.v_c - v) * self.theta)
    }

    /// Speed at which the maximum-acceleration trajectory saturates:
    /// `a0 / beta + v_c` (infinite when `beta == 0`).
    pub fn accel_asymptote(&self) -> f64 {
        if self.beta == 0.0 {
            f64::INFINITY
        } else {
            self.a0 / self.beta + self.v_c
        }
    }

    pub fn validate(&self, ctx: &str) -> Result<(), crate::Error> {
        let bad = |field: &str, msg: &str| {
            Err(crate::Error::InvalidScenario(format!("{ctx}{field}: {msg}")))
        };
        if !(self.a0 > 0.0) {
            return bad("a0", "acceleration intercept must be > 0");
        }
        if !(self.beta >= 0.0) {
            return bad("beta", "acceleration slope must be >= 0");
        }
        if !(self.v_c > 0.0) {
            return bad("v_c", "reference speed must be > 0");
        }
        if !(self.d0 > 0.0) {
            return bad("d0", "deceleration intercept must be > 0");
        }
        if !(self.theta >= 0.0) {
            return bad("theta", "deceleration slope must be >= 0");
        }
        // accel bound must stay positive over the working range [0, v_c]
        if self.accel_bound(0.0) <= 0.0 || self.accel_bound(self.v_c) <= 0.0 {
            return bad("a0", "acceleration bound must be positive on [0, v_c]");
        }
        Ok(())
    }
}

/// Per-vehicle kinematic state plus the internal controller signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Position (m).
    pub x: f64,
    /// Speed (m/s), never negative.
    pub v: f64,
    /// Realized acceleration over the last tick (m/s^2).
    pub a: f64,
    /// Low-level setpoint (m/s).
    pub v_pid: f64,
    /// PI integral accumulator (m/s).
    pub i_term: f64,
}

impl VehicleState {
    pub fn at_equilibrium(x: f64, v: f64) -> Self {
        VehicleState {
            x,
            v,
            a: 0.0,
            v_pid: v,
            i_term: 0.0,
        }
    }
}

/// One sinusoidal component of a lead-speed perturbation.
///
/// `m` may be negative to start the wave with a slowdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineComponent {
    /// Amplitude (m/s).
    pub m: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
}

/// Parametric lead-vehicle speed signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeadProfile {
    /// Constant speed `v0`.
    Constant { v0: f64 },
    /// `v0 + sum_i m_i * sin(omega_i * (t - t_start))` inside the window,
    /// `v0` outside.
    SineSum {
        v0: f64,
        components: Vec<SineComponent>,
        #[serde(default)]
        t_start: f64,
        #[serde(default)]
        t_end: Option<f64>,
    },
    /// Rate-limited speed change from `v0` to `v_final` at |a_lead|,
    /// starting at `t_start`. Works in both directions.
    Ramp {
        v0: f64,
        v_final: f64,
        a_lead: f64,
        #[serde(default)]
        t_start: f64,
    },
    /// Hard braking from `v0` to `v_final` at magnitude `a_lead`.
    EmergencyBrake {
        v0: f64,
        v_final: f64,
        a_lead: f64,
        #[serde(default)]
        t_start: f64,
    },
    /// Braking from `v0` to a stop at magnitude `a_lead`, then standing.
    StopAtLight {
        v0: f64,
        a_lead: f64,
        #[serde(default)]
        t_start: f64,
    },
}

impl LeadProfile {
    /// Speed and acceleration of the lead vehicle at time `t`.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        match self {
            LeadProfile::Constant { v0 } => (*v0, 0.0),
            LeadProfile::SineSum {
                v0,
                components,
                t_start,
                t_end,
            } => {
                let end = t_end.unwrap_or(f64::INFINITY);
                if t < *t_start || t > end {
                    return (*v0, 0.0);
                }
                let mut v = *v0;
                let mut a = 0.0;
                for c in components {
                    let phase = c.omega * (t - t_start);
                    v += c.m * phase.sin();
                    a += c.m * c.omega * phase.cos();
                }
                (v.max(0.0), a)
            }
            LeadProfile::Ramp {
                v0,
                v_final,
                a_lead,
                t_start,
            } => ramp(*v0, *v_final, a_lead.abs(), *t_start, t),
            LeadProfile::EmergencyBrake {
                v0,
                v_final,
                a_lead,
                t_start,
            } => ramp(*v0, *v_final, a_lead.abs(), *t_start, t),
            LeadProfile::StopAtLight {
                v0,
                a_lead,
                t_start,
            } => ramp(*v0, 0.0, a_lead.abs(), *t_start, t),
        }
    }

    /// Speed at t = 0; used as the default platoon equilibrium speed.
    pub fn initial_speed(&self) -> f64 {
        self.sample(0.0).0
    }

    pub fn validate(&self) -> Result<(), crate::Error> {
        let bad =
            |field: &str, msg: &str| Err(crate::Error::InvalidScenario(format!("lead.{field}: {msg}")));
        match self {
            LeadProfile::Constant { v0 } => {
                if *v0 < 0.0 {
                    return bad("v0", "speed must be >= 0");
                }
            }
            LeadProfile::SineSum { v0, components, t_start, t_end } => {
                if *v0 < 0.0 {
                    return bad("v0", "speed must be >= 0");
                }
                if components.is_empty() {
                    return bad("components", "at least one component required");
                }
                let sum: f64 = components.iter().map(|c| c.m.abs()).sum();
                if sum > *v0 {
                    return bad("components", "amplitudes exceed v0; sampled speed would clip at 0");
                }
                if components.iter().any(|c| c.omega <= 0.0) {
                    return bad("components", "omega must be > 0");
                }
                if let Some(end) = t_end {
                    if end < t_start {
                        return bad("t_end", "must be >= t_start");
                    }
                }
            }
            LeadProfile::Ramp { v0, v_final, a_lead, .. }
            | LeadProfile::EmergencyBrake { v0, v_final, a_lead, .. } => {
                if *v0 < 0.0 || *v_final < 0.0 {
                    return bad("v0", "speeds must be >= 0");
                }
                if *a_lead == 0.0 && v0 != v_final {
                    return bad("a_lead", "rate must be nonzero for a speed change");
                }
            }
            LeadProfile::StopAtLight { v0, a_lead, .. } => {
                if *v0 < 0.0 {
                    return bad("v0", "speed must be >= 0");
                }
                if *a_lead <= 0.0 {
                    return bad("a_lead", "braking magnitude must be > 0");
                }
            }
        }
        Ok(())
    }
}

fn ramp(v0: f64, v_final: f64, rate: f64, t_start: f64, t: f64) -> (f64, f64) {
    if t < t_start || v0 == v_final || rate == 0.0 {
        return (v0, 0.0);
    }
    let dir = if v_final > v0 { 1.0 } else { -1.0 };
    let duration = (v_final - v0).abs() / rate;
    if t >= t_start + duration {
        (v_final, 0.0)
    } else {
        (v0 + dir * rate * (t - t_start), dir * rate)
    }
}
