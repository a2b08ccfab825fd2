//! Platoon simulation and analysis for ACC controllers with built-in
//! acceleration/deceleration limits.
//!
//! The library models the two-layer architecture of a factory ACC: a linear
//! upper planner that turns the sensed gap and lead speed into a target
//! speed, and a low-level layer that tracks that target through a
//! rate-limited setpoint and a PI loop, saturating at speed-dependent
//! acceleration and deceleration bounds. On top of the simulator sit
//! analytic tools: frequency-domain string-stability checks, a closed-form
//! overshoot solver for step perturbations, gain-feasibility analysis for
//! safe braking, and a tipping-point fitter that recovers the limit model
//! from trajectory data.

pub mod actuation;
pub mod error;
pub mod fitlimits;
pub mod model;
pub mod overshoot;
pub mod planner;
pub mod safety;
pub mod sim;
pub mod stability;

pub use error::Error;
pub use model::{AccParams, GainSchedule, LeadProfile, LimitModel, SineComponent, VehicleState};
pub use sim::{MetricsReport, Scenario, TrajectoryLog, VehicleConfig};
