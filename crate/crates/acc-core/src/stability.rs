//! Frequency-domain and closed-form time-domain string-stability analysis of
//! the unconstrained factory linear ACC.
//!
//! The speed-to-speed transfer function is implemented in the first-order
//! form `G(s) = ((1 - k tau) s + k) / (s + k)`, which matches the
//! time-domain dynamics `dv/dt = k (v_lead - v) + (1 - k tau) a_lead` and
//! yields the string-stability condition `k tau < 2`.

use serde::{Deserialize, Serialize};

use crate::model::SineComponent;

pub const MARGINAL_K_TAU: f64 = 2.0;

/// Default frequency grid for reports: 64 log-spaced points in [0.01, 10] rad/s.
pub fn default_frequency_grid() -> Vec<f64> {
    log_spaced(0.01, 10.0, 64)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StringStable,
    Marginal,
    Unstable,
}

/// Full frequency-domain report for one parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// Dimensionless product `k_v * tau`.
    pub k_tau: f64,
    /// `(omega, |G(j omega)|)` over the report grid.
    pub gains: Vec<(f64, f64)>,
}

/// String-stability verdict from the condition `k_v * tau < 2`.
/// Marginal within 1e-12 relative of the boundary.
pub fn ss_condition(k_v: f64, tau: f64) -> Verdict {
    let k_tau = k_v * tau;
    if (k_tau - MARGINAL_K_TAU).abs() <= 1e-12 * MARGINAL_K_TAU {
        Verdict::Marginal
    } else if k_tau < MARGINAL_K_TAU {
        Verdict::StringStable
    } else {
        Verdict::Unstable
    }
}

/// Speed-to-speed amplitude ratio at frequency `omega`:
/// `|G(j omega)|^2 = (k^2 + (1 - k tau)^2 omega^2) / (k^2 + omega^2)`.
pub fn tf_magnitude(k_v: f64, tau: f64, omega: f64) -> f64 {
    let c = 1.0 - k_v * tau;
    let num = k_v * k_v + c * c * omega * omega;
    let den = k_v * k_v + omega * omega;
    (num / den).sqrt()
}

/// Phase of `G(j omega)` in radians.
pub fn tf_phase(k_v: f64, tau: f64, omega: f64) -> f64 {
    let c = 1.0 - k_v * tau;
    // arg((c*jw + k) / (jw + k))
    (c * omega).atan2(k_v) - omega.atan2(k_v)
}

pub fn frequency_report(k_v: f64, tau: f64) -> StabilityReport {
    StabilityReport {
        verdict: ss_condition(k_v, tau),
        k_tau: k_v * tau,
        gains: default_frequency_grid()
            .into_iter()
            .map(|w| (w, tf_magnitude(k_v, tau, w)))
            .collect(),
    }
}

/// Dampening verdict for a natural profile decomposed into sinusoids:
/// the follower dampens iff the gain is <= 1 at every component frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampeningReport {
    pub dampens: bool,
    pub verdict: Verdict,
    /// `(omega, |G(j omega)|)` per component.
    pub component_gains: Vec<(f64, f64)>,
}

pub fn dampening_verdict(components: &[SineComponent], k_v: f64, tau: f64) -> DampeningReport {
    let component_gains: Vec<(f64, f64)> = components
        .iter()
        .map(|c| (c.omega, tf_magnitude(k_v, tau, c.omega)))
        .collect();
    let dampens = component_gains.iter().all(|&(_, g)| g <= 1.0 + 1e-12);
    DampeningReport {
        dampens,
        verdict: ss_condition(k_v, tau),
        component_gains,
    }
}

/// Closed-form follower speed under the lead profile
/// `v_eq + M sin(omega t)` from an equilibrium start.
pub fn ode_response(k_v: f64, tau: f64, m: f64, omega: f64, v_eq: f64, t: f64) -> f64 {
    let k2 = k_v * k_v;
    let w2 = omega * omega;
    let den = k2 + w2;
    (k2 * v_eq
        + (-k_v * t).exp() * k2 * m * tau * omega
        + v_eq * w2
        - k2 * m * tau * omega * (t * omega).cos()
        + m * (k2 - k_v * tau * w2 + w2) * (t * omega).sin())
        / den
}

/// Right-hand side of the follower speed ODE under the sinusoidal lead:
/// `dv/dt = k (v_eq + M sin(wt) - v) + (1 - k tau) M w cos(wt)`.
pub fn ode_rhs(k_v: f64, tau: f64, m: f64, omega: f64, v_eq: f64, t: f64, v: f64) -> f64 {
    k_v * (v_eq + m * (omega * t).sin() - v) + (1.0 - k_v * tau) * m * omega * (omega * t).cos()
}
