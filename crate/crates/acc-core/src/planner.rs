//! The factory linear ACC upper planner.
//!
//! The planner corrects the lead speed by the gap error against the
//! constant-time-headway policy: `v_target = v_lead + k * (s - tau * v_lead
//! - delta)`, clipped to `[0, v_set]`. The cruise cap stands in for the
//! free-flow regime when the gap is huge and no car-following state exists.

use crate::model::AccParams;

/// Sensed inputs to one planner evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerInput {
    /// Current spacing to the vehicle ahead (m).
    pub s: f64,
    /// Lead speed (m/s).
    pub v_lead: f64,
    /// Ego speed (m/s); only used to index the gain schedule.
    pub v_ego: f64,
}

/// Target speed commanded by the upper planner.
pub fn target_speed(inp: PlannerInput, params: &AccParams) -> f64 {
    let k = params.gain_at(inp.v_ego);
    let raw = inp.v_lead + k * (inp.s - params.tau * inp.v_lead - params.delta);
    raw.max(0.0).min(params.v_set)
}

/// Scheduled planner gain at ego speed `v`.
pub fn gain_at(v: f64, params: &AccParams) -> f64 {
    params.gain_at(v)
}
