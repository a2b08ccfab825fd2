//! Analytic solver for the limit-induced overshoot of a follower chasing a
//! non-cyclic lead speed increase.
//!
//! The mechanism: the lead accelerates faster than the follower's bound, the
//! gap grows until the follower (moving along the maximum-acceleration
//! trajectory) reaches the lead plateau speed at T1, and the accumulated
//! excess gap then forces the follower above the plateau until the setpoint
//! meets the falling planner target at T4.

use serde::{Deserialize, Serialize};

use crate::actuation::max_accel_distance;
use crate::model::{equilibrium_spacing, AccParams, LeadProfile, LimitModel};
use crate::Error;

/// Which quadratic is solved for the crossing time.
///
/// The crossing condition `v_pid(T4) = v_target(T4)` expands to
/// `a* dT + (k a*/2) dT^2 = k (s(T1) - tau v_p - delta)` once the
/// `k v_p dT` contributions of the setpoint integral and the target slope
/// cancel. `WithPlateauTerm` keeps that term uncancelled on the setpoint
/// side (linear coefficient `a* + k v_p`) and `PlateauTermOnly` further
/// drops `a* dT` (linear coefficient `k v_p`); both are retained for
/// comparison and both understate the overshoot on strongly saturated
/// scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadraticVariant {
    #[default]
    Consistent,
    WithPlateauTerm,
    PlateauTermOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvershootSolution {
    /// Time from saturation onset until the follower reaches the plateau (s).
    pub t1: f64,
    /// Spacing at T1 (m).
    pub s_t1: f64,
    /// Time from T1 to the setpoint/target crossing (s).
    pub dt_cross: f64,
    /// Maximum overshoot speed (m/s).
    pub v_os: f64,
}

/// Time for the maximum-acceleration trajectory from `v0` to reach
/// `v_plateau`.
pub fn time_to_lead_speed(v0: f64, v_plateau: f64, lim: &LimitModel) -> Result<f64, Error> {
    if lim.beta == 0.0 {
        return Ok((v_plateau - v0) / lim.a0);
    }
    let asymptote = lim.accel_asymptote();
    if v_plateau >= asymptote {
        return Err(Error::UnreachablePlateau {
            plateau: v_plateau,
            asymptote,
        });
    }
    let k = lim.a0 / lim.beta + lim.v_c;
    Ok(-((v_plateau - k) / (v0 - k)).ln() / lim.beta)
}

/// Spacing gained between `t0` and `t1` while the lead follows `lead` and
/// the follower rides the maximum-acceleration trajectory from `v0`:
/// the integral of `v_lead - v_ego`.
///
/// The lead integral is closed form for a constant profile and 1e-3 s
/// trapezoid quadrature otherwise; the follower term is always closed form.
pub fn max_spacing_at_t1(
    lead: &LeadProfile,
    v0: f64,
    lim: &LimitModel,
    t0: f64,
    t1: f64,
) -> f64 {
    let lead_dist = match lead {
        LeadProfile::Constant { v0: vl } => vl * (t1 - t0),
        _ => {
            let step = 1e-3;
            let n = ((t1 - t0) / step).ceil().max(1.0) as usize;
            let h = (t1 - t0) / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let a = lead.sample(t0 + i as f64 * h).0;
                let b = lead.sample(t0 + (i + 1) as f64 * h).0;
                acc += 0.5 * (a + b) * h;
            }
            acc
        }
    };
    lead_dist - max_accel_distance(v0, lim, t1 - t0)
}

/// Solve the crossing quadratic for the overshoot above the plateau speed,
/// with the acceleration bound frozen at the plateau speed.
pub fn overshoot_speed(
    t1: f64,
    s_t1: f64,
    v_plateau: f64,
    params: &AccParams,
    lim: &LimitModel,
    variant: QuadraticVariant,
) -> Result<OvershootSolution, Error> {
    let k = params.gain_at(v_plateau);
    let a_star = lim.accel_bound(v_plateau);
    let excess = s_t1 - equilibrium_spacing(v_plateau, params);
    if excess < 0.0 {
        return Err(Error::NoOvershoot { excess });
    }
    let a = 0.5 * k * a_star;
    let b = match variant {
        QuadraticVariant::Consistent => a_star,
        QuadraticVariant::WithPlateauTerm => a_star + k * v_plateau,
        QuadraticVariant::PlateauTermOnly => k * v_plateau,
    };
    let c = -k * excess;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return Err(Error::NoOvershoot { excess });
    }
    let dt_cross = (-b + disc.sqrt()) / (2.0 * a);
    Ok(OvershootSolution {
        t1,
        s_t1,
        dt_cross,
        v_os: v_plateau + dt_cross * a_star,
    })
}

/// End-to-end solution for a step-like lead speed increase: compose T1, the
/// spacing at T1 (initial equilibrium plus the saturated-phase gain) and the
/// crossing quadratic.
///
/// `lead` should plateau at `v_plateau`; the follower is assumed saturated
/// from the perturbation start, which holds when the lead accelerates well
/// beyond the follower's bound.
pub fn analyze_step(
    lead: &LeadProfile,
    v0: f64,
    v_plateau: f64,
    t_start: f64,
    params: &AccParams,
    lim: &LimitModel,
    variant: QuadraticVariant,
) -> Result<OvershootSolution, Error> {
    let t1 = time_to_lead_speed(v0, v_plateau, lim)?;
    let gain = max_spacing_at_t1(lead, v0, lim, t_start, t_start + t1);
    let s_t1 = equilibrium_spacing(v0, params) + gain;
    overshoot_speed(t1, s_t1, v_plateau, params, lim, variant)
}
