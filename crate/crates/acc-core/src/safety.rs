//! Gain-feasibility analysis for collision avoidance under deceleration
//! limits, and trajectory-level safety metrics.
//!
//! The planner gain must be large enough that the commanded slowdown
//! reaches the deceleration a closing scenario requires; string stability
//! caps the same gain at `2 / tau`. The two bounds can conflict, in which
//! case no gain is safe and string stable at once.

use serde::{Deserialize, Serialize};

use crate::sim::TrajectoryLog;

/// Guard against division by zero when the closing speed vanishes.
pub const TTC_EPS: f64 = 1e-6;

/// Lower bound on the planner gain implied by a closing scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k_min")]
pub enum GainBound {
    /// The scenario is not closing (denominator >= 0); any gain satisfies
    /// the requirement.
    Vacuous,
    /// Minimum gain (1/s) needed to realize the required deceleration.
    Lower(f64),
}

/// Gain interval combining the safety lower bound with the string-stability
/// upper bound `2 / tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainFeasibility {
    /// Safety lower bound; `None` when the bound is vacuous.
    pub k_min: Option<f64>,
    /// String-stability upper bound `2 / tau`.
    pub k_max: f64,
    /// True iff some gain satisfies both bounds.
    pub feasible: bool,
}

/// Proximity metrics of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySafety {
    /// Minimum follower spacing over the run (m).
    pub min_spacing: f64,
    /// Minimum time-to-collision over the run (s).
    pub min_ttc: f64,
    /// True iff some spacing reached zero.
    pub crash: bool,
    /// Ego speed the first time spacing dropped below the minimum gap;
    /// `None` if it never did.
    pub takeover_speed: Option<f64>,
}

/// Combined analytic and trajectory safety summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    pub gain: GainFeasibility,
    pub trajectory: TrajectorySafety,
}

/// Lower bound on the planner gain so the commanded slowdown reaches
/// `a_required`: `k >= a_required / (v_lead - v_ego - tau * a_lead)`.
///
/// `a_required` must be negative (a braking demand). When the denominator
/// is non-negative the ego is not closing on a slowing target and the bound
/// is vacuous.
pub fn required_gain(
    v_lead: f64,
    v_ego: f64,
    a_lead: f64,
    tau: f64,
    a_required: f64,
) -> GainBound {
    let den = v_lead - v_ego - tau * a_lead;
    if den >= 0.0 {
        GainBound::Vacuous
    } else {
        GainBound::Lower(a_required / den)
    }
}

/// Constant-deceleration demand to equalize speeds within the available
/// gap: `-(v_ego^2 - v_lead^2) / (2 * max(s - delta, eps))`. Zero when the
/// ego is not faster than the lead.
pub fn required_decel(s: f64, v_ego: f64, v_lead: f64, delta: f64) -> f64 {
    if v_ego <= v_lead {
        return 0.0;
    }
    let gap = (s - delta).max(TTC_EPS);
    -(v_ego * v_ego - v_lead * v_lead) / (2.0 * gap)
}

/// Combine the safety lower bound with the string-stability cap `2 / tau`.
pub fn gain_feasibility(bound: GainBound, tau: f64) -> GainFeasibility {
    let k_max = 2.0 / tau;
    match bound {
        GainBound::Vacuous => GainFeasibility { k_min: None, k_max, feasible: true },
        GainBound::Lower(k_min) => GainFeasibility {
            k_min: Some(k_min),
            k_max,
            feasible: k_min <= k_max,
        },
    }
}

/// Time-to-collision of one pair sample: spacing over closing speed, with
/// the closing speed floored at [`TTC_EPS`]. Infinite when opening.
pub fn time_to_collision(spacing: f64, v_ego: f64, v_lead: f64) -> f64 {
    let closing = v_ego - v_lead;
    if closing <= 0.0 {
        f64::INFINITY
    } else {
        spacing.max(0.0) / closing.max(TTC_EPS)
    }
}

/// Scan a trajectory log for proximity hazards: per-pair minimum spacing,
/// minimum TTC, crash flag, and the ego speed at the first sub-`delta` gap
/// (a proxy for when a human would have to take over).
pub fn trajectory_safety(log: &TrajectoryLog, delta: f64) -> TrajectorySafety {
    let n = log.n_vehicles;
    let mut min_spacing = f64::INFINITY;
    let mut min_ttc = f64::INFINITY;
    let mut takeover_speed = None;
    for tick in 0..log.n_ticks() {
        let rows = log.tick(tick);
        for i in 1..n {
            let r = &rows[i];
            min_spacing = min_spacing.min(r.spacing);
            min_ttc = min_ttc.min(time_to_collision(r.spacing, r.v, rows[i - 1].v));
            if takeover_speed.is_none() && r.spacing < delta {
                takeover_speed = Some(r.v);
            }
        }
    }
    TrajectorySafety {
        min_spacing,
        min_ttc,
        crash: !log.crashes.is_empty() || min_spacing <= 0.0,
        takeover_speed,
    }
}
