//! Deterministic discrete-time platoon engine: scenario description,
//! forward-Euler execution, trajectory logging and traffic metrics.
//!
//! Update order within a tick: the leader is sampled first, then followers
//! are evaluated front to back against same-tick values (sensing is
//! instantaneous). Positions advance with pre-update speeds, so an
//! equilibrium platoon is an exact fixed point. Crashes (spacing <= 0) are
//! recorded and the simulation continues with the crashed pair pinned
//! together, keeping whole-run metrics comparable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actuation::{advance_setpoint, pi_step, PiGains};
use crate::model::{equilibrium_spacing, AccParams, LeadProfile, LimitModel, VehicleState};
use crate::planner::{target_speed, PlannerInput};
use crate::Error;

/// How the ego speed tracks the internal setpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuationMode {
    /// PI loop on the setpoint error, command saturated by the limit model.
    #[default]
    Pi,
    /// The speed is the rate-limited setpoint itself (perfect low-level
    /// tracking); isolates planner dynamics from PI transients.
    Ideal,
}

/// Per-follower controller configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleConfig {
    #[serde(default)]
    pub acc: AccParams,
    /// `None` disables both the setpoint rate limit and command saturation.
    #[serde(default = "default_limits")]
    pub limits: Option<LimitModel>,
    #[serde(default)]
    pub pi: PiGains,
    #[serde(default)]
    pub actuation: ActuationMode,
}

fn default_limits() -> Option<LimitModel> {
    Some(LimitModel::default())
}

impl Default for VehicleConfig {
    fn default() -> Self {
        VehicleConfig {
            acc: AccParams::default(),
            limits: default_limits(),
            pi: PiGains::default(),
            actuation: ActuationMode::default(),
        }
    }
}

impl VehicleConfig {
    pub fn validate(&self, ctx: &str) -> Result<(), Error> {
        self.acc.validate(&format!("{ctx}acc."))?;
        if let Some(l) = &self.limits {
            l.validate(&format!("{ctx}limits."))?;
        }
        self.pi.validate(&format!("{ctx}pi."))
    }
}

/// Uniform sampling ranges for heterogeneous platoons; all intervals are
/// inclusive and may collapse to a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub k: (f64, f64),
    pub tau: (f64, f64),
    pub a0: (f64, f64),
    pub beta: (f64, f64),
    pub d0: (f64, f64),
    pub theta: (f64, f64),
}

impl ParamRanges {
    pub fn validate(&self) -> Result<(), Error> {
        let fields = [
            ("k", self.k),
            ("tau", self.tau),
            ("a0", self.a0),
            ("beta", self.beta),
            ("d0", self.d0),
            ("theta", self.theta),
        ];
        for (name, (lo, hi)) in fields {
            if !(lo <= hi) {
                return Err(Error::InvalidScenario(format!(
                    "ranges.{name}: lower bound {lo} exceeds upper bound {hi}"
                )));
            }
        }
        if !(self.k.0 > 0.0) || !(self.tau.0 > 0.0) || !(self.a0.0 > 0.0) || !(self.d0.0 > 0.0) {
            return Err(Error::InvalidScenario(
                "ranges: k, tau, a0 and d0 must be strictly positive".into(),
            ));
        }
        if self.beta.0 < 0.0 || self.theta.0 < 0.0 {
            return Err(Error::InvalidScenario(
                "ranges: beta and theta must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Complete description of one platoon run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Total vehicle count including the leader (>= 2).
    pub n_vehicles: usize,
    pub lead: LeadProfile,
    /// Follower configurations: empty = all defaults, one entry = broadcast
    /// to every follower, otherwise exactly `n_vehicles - 1` entries.
    #[serde(default)]
    pub vehicles: Vec<VehicleConfig>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Equilibrium speed used for the initial state and congestion metrics;
    /// defaults to the lead profile's speed at t = 0.
    #[serde(default)]
    pub v_eq: Option<f64>,
    /// Sampling ranges for a heterogeneous platoon; requires `rng_seed` and
    /// overrides the gain, headway and limit fields of every follower.
    #[serde(default)]
    pub mixed: Option<ParamRanges>,
    #[serde(default)]
    pub rng_seed: Option<u64>,
    /// Optional initial follower speeds (length `n_vehicles`, leader first);
    /// defaults to equilibrium at `v_eq`.
    #[serde(default)]
    pub initial_speeds: Option<Vec<f64>>,
    /// Optional initial gaps, front pair first (length `n_vehicles - 1`);
    /// defaults to each follower's equilibrium spacing.
    #[serde(default)]
    pub initial_spacings: Option<Vec<f64>>,
    /// A vehicle is congested when `v < congestion_fraction * v_eq`.
    #[serde(default = "default_congestion_fraction")]
    pub congestion_fraction: f64,
}

fn default_dt() -> f64 {
    0.1
}

fn default_horizon() -> f64 {
    60.0
}

fn default_congestion_fraction() -> f64 {
    0.9
}

impl Scenario {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n_vehicles < 2 {
            return bad(format!("n_vehicles: need at least 2, got {}", self.n_vehicles));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt: must be > 0, got {}", self.dt));
        }
        if !(self.horizon >= self.dt) {
            return bad(format!("horizon: must be >= dt, got {}", self.horizon));
        }
        if !(self.congestion_fraction > 0.0 && self.congestion_fraction <= 1.0) {
            return bad(format!(
                "congestion_fraction: must be in (0, 1], got {}",
                self.congestion_fraction
            ));
        }
        self.lead.validate()?;
        let n_followers = self.n_vehicles - 1;
        if !matches!(self.vehicles.len(), 0 | 1) && self.vehicles.len() != n_followers {
            return bad(format!(
                "vehicles: expected 0, 1 or {} entries, got {}",
                n_followers,
                self.vehicles.len()
            ));
        }
        for (i, cfg) in self.vehicles.iter().enumerate() {
            cfg.validate(&format!("vehicles[{i}]."))?;
        }
        if let Some(r) = &self.mixed {
            r.validate()?;
            if self.rng_seed.is_none() {
                return bad("rng_seed: required when mixed ranges are given".into());
            }
        }
        if let Some(vs) = &self.initial_speeds {
            if vs.len() != self.n_vehicles {
                return bad(format!(
                    "initial_speeds: expected {} entries, got {}",
                    self.n_vehicles,
                    vs.len()
                ));
            }
            if vs.iter().any(|v| *v < 0.0) {
                return bad("initial_speeds: speeds must be >= 0".into());
            }
        }
        if let Some(ss) = &self.initial_spacings {
            if ss.len() != n_followers {
                return bad(format!(
                    "initial_spacings: expected {} entries, got {}",
                    n_followers,
                    ss.len()
                ));
            }
            if ss.iter().any(|s| *s <= 0.0) {
                return bad("initial_spacings: gaps must be > 0".into());
            }
        }
        if let Some(v) = self.v_eq {
            if v < 0.0 {
                return bad(format!("v_eq: must be >= 0, got {v}"));
            }
        }
        Ok(())
    }

    /// Equilibrium speed for initialization and congestion metrics.
    pub fn equilibrium_speed(&self) -> f64 {
        self.v_eq.unwrap_or_else(|| self.lead.initial_speed())
    }

    /// Resolve the per-follower configurations (broadcast and mixed
    /// sampling applied).
    pub fn follower_configs(&self) -> Vec<VehicleConfig> {
        let n_followers = self.n_vehicles - 1;
        let mut configs: Vec<VehicleConfig> = match self.vehicles.len() {
            0 => vec![VehicleConfig::default(); n_followers],
            1 => vec![self.vehicles[0].clone(); n_followers],
            _ => self.vehicles.clone(),
        };
        if let (Some(ranges), Some(seed)) = (&self.mixed, self.rng_seed) {
            let draws = sample_mixed_platoon(seed, ranges, n_followers);
            for (cfg, (acc, lim)) in configs.iter_mut().zip(draws) {
                let base = &cfg.acc;
                cfg.acc = AccParams {
                    k_v: acc.k_v,
                    tau: acc.tau,
                    delta: base.delta,
                    v_set: base.v_set,
                };
                let v_c = cfg.limits.map(|l| l.v_c).unwrap_or(lim.v_c);
                cfg.limits = Some(LimitModel { v_c, ..lim });
            }
        }
        configs
    }

    /// Initial vehicle states: leader at x = 0, followers behind at their
    /// equilibrium spacing (or the explicit overrides), all at `v_eq`.
    pub fn initial_states(&self, configs: &[VehicleConfig]) -> Vec<VehicleState> {
        let v_eq = self.equilibrium_speed();
        let mut states = Vec::with_capacity(self.n_vehicles);
        states.push(VehicleState::at_equilibrium(0.0, v_eq));
        for (i, cfg) in configs.iter().enumerate() {
            let gap = match &self.initial_spacings {
                Some(ss) => ss[i],
                None => equilibrium_spacing(v_eq, &cfg.acc),
            };
            let x = states[i].x - gap;
            states.push(VehicleState::at_equilibrium(x, v_eq));
        }
        if let Some(vs) = &self.initial_speeds {
            for (st, v) in states.iter_mut().zip(vs) {
                st.v = *v;
                st.v_pid = *v;
            }
        }
        states
    }
}

/// One logged sample: the state of one vehicle at the start of a tick plus
/// the control signals computed during that tick. For the leader, `v_target`
/// and `v_pid` mirror its sampled speed and `spacing` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub vehicle: usize,
    pub x: f64,
    pub v: f64,
    pub a: f64,
    pub v_target: f64,
    pub v_pid: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrashEvent {
    pub t: f64,
    /// Index of the rear vehicle of the crashed pair.
    pub follower: usize,
}

/// Tick-major trajectory log: `n_vehicles` consecutive rows per tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub n_vehicles: usize,
    pub rows: Vec<Row>,
    pub crashes: Vec<CrashEvent>,
}

impl TrajectoryLog {
    pub fn n_ticks(&self) -> usize {
        self.rows.len() / self.n_vehicles
    }

    /// Rows of one tick.
    pub fn tick(&self, i: usize) -> &[Row] {
        &self.rows[i * self.n_vehicles..(i + 1) * self.n_vehicles]
    }

    /// Speed series of one vehicle.
    pub fn speeds(&self, vehicle: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows
            .iter()
            .skip(vehicle)
            .step_by(self.n_vehicles)
            .map(|r| r.v)
    }
}

/// Signals produced by one tick for all vehicles, leader first.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    /// State at the start of the tick with the tick's computed signals.
    pub rows: Vec<Row>,
    /// Rear indices of pairs that crashed during this tick.
    pub crashed: Vec<usize>,
}

/// Advance the platoon by one tick of length `dt` starting at time `t`.
///
/// `states[0]` is the leader; `configs` holds one entry per follower.
pub fn step(
    states: &mut [VehicleState],
    configs: &[VehicleConfig],
    lead: &LeadProfile,
    t: f64,
    dt: f64,
) -> TickRecord {
    let n = states.len();
    let (v_lead, a_lead) = lead.sample(t);
    states[0].v = v_lead;
    states[0].a = a_lead;
    states[0].v_pid = v_lead;

    let mut rows = Vec::with_capacity(n);
    rows.push(Row {
        t,
        vehicle: 0,
        x: states[0].x,
        v: v_lead,
        a: a_lead,
        v_target: v_lead,
        v_pid: v_lead,
        spacing: 0.0,
    });

    let mut v_next = vec![0.0; n];
    for i in 1..n {
        let cfg = &configs[i - 1];
        let s = states[i - 1].x - states[i].x;
        let v_ego = states[i].v;
        let v_target = target_speed(
            PlannerInput { s, v_lead: states[i - 1].v, v_ego },
            &cfg.acc,
        );
        let v_pid = match &cfg.limits {
            Some(l) => advance_setpoint(states[i].v_pid, v_target, v_ego, l, dt),
            None => v_target.max(0.0),
        };
        states[i].v_pid = v_pid;
        let a = match cfg.actuation {
            ActuationMode::Ideal => {
                v_next[i] = v_pid;
                (v_pid - v_ego) / dt
            }
            ActuationMode::Pi => {
                let (a, i_new) =
                    pi_step(v_ego, states[i].i_term, v_pid, &cfg.pi, cfg.limits.as_ref(), dt);
                states[i].i_term = i_new;
                v_next[i] = (v_ego + a * dt).max(0.0);
                a
            }
        };
        states[i].a = a;
        rows.push(Row {
            t,
            vehicle: i,
            x: states[i].x,
            v: v_ego,
            a,
            v_target,
            v_pid,
            spacing: s,
        });
    }

    // kinematics: positions advance with pre-update speeds
    for st in states.iter_mut() {
        st.x += st.v * dt;
    }
    let mut crashed = Vec::new();
    for i in 1..n {
        if states[i - 1].x - states[i].x <= 0.0 {
            crashed.push(i);
            states[i].x = states[i - 1].x;
        }
    }
    for i in 1..n {
        states[i].v = v_next[i];
    }
    TickRecord { rows, crashed }
}

/// Execute a scenario over its horizon.
pub fn run(scenario: &Scenario) -> Result<TrajectoryLog, Error> {
    scenario.validate()?;
    let configs = scenario.follower_configs();
    let mut states = scenario.initial_states(&configs);
    let steps = (scenario.horizon / scenario.dt).round() as usize;
    let mut rows = Vec::with_capacity(steps * scenario.n_vehicles);
    let mut crashes = Vec::new();
    for i in 0..steps {
        let t = i as f64 * scenario.dt;
        let rec = step(&mut states, &configs, &scenario.lead, t, scenario.dt);
        rows.extend(rec.rows);
        crashes.extend(rec.crashed.into_iter().map(|follower| CrashEvent { t, follower }));
    }
    Ok(TrajectoryLog {
        dt: scenario.dt,
        n_vehicles: scenario.n_vehicles,
        rows,
        crashes,
    })
}

/// Traffic-level summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Maximum number of simultaneously congested vehicles.
    pub queue_length: usize,
    /// Total time with at least one congested vehicle (s).
    pub congestion_duration_s: f64,
    /// Per-vehicle peak |v - v_eq| (m/s), leader first.
    pub peak_deviation: Vec<f64>,
    /// Peak-deviation ratio of each follower to its predecessor.
    pub amplification: Vec<f64>,
    /// Minimum follower spacing over the run (m).
    pub min_spacing: f64,
    pub crashes: Vec<CrashEvent>,
}

/// Compute metrics against the equilibrium speed `v_eq`: a vehicle is
/// congested at a tick iff `v < congestion_fraction * v_eq`.
pub fn compute_metrics(log: &TrajectoryLog, v_eq: f64, congestion_fraction: f64) -> MetricsReport {
    let n = log.n_vehicles;
    let threshold = congestion_fraction * v_eq;
    let mut queue_length = 0usize;
    let mut congested_ticks = 0usize;
    let mut peak_deviation = vec![0.0f64; n];
    let mut min_spacing = f64::INFINITY;
    for tick in 0..log.n_ticks() {
        let rows = log.tick(tick);
        let congested = rows.iter().filter(|r| r.v < threshold).count();
        queue_length = queue_length.max(congested);
        if congested > 0 {
            congested_ticks += 1;
        }
        for r in rows {
            peak_deviation[r.vehicle] = peak_deviation[r.vehicle].max((r.v - v_eq).abs());
            if r.vehicle > 0 {
                min_spacing = min_spacing.min(r.spacing);
            }
        }
    }
    let amplification = (1..n)
        .map(|i| {
            if peak_deviation[i - 1] > 0.0 {
                peak_deviation[i] / peak_deviation[i - 1]
            } else {
                f64::NAN
            }
        })
        .collect();
    MetricsReport {
        queue_length,
        congestion_duration_s: congested_ticks as f64 * log.dt,
        peak_deviation,
        amplification,
        min_spacing,
        crashes: log.crashes.clone(),
    }
}

/// Distinct congested intervals `(start, end)` in seconds: ticks where at
/// least one vehicle is congested, with gaps shorter than `merge_gap`
/// bridged.
pub fn congested_intervals(
    log: &TrajectoryLog,
    v_eq: f64,
    congestion_fraction: f64,
    merge_gap: f64,
) -> Vec<(f64, f64)> {
    let threshold = congestion_fraction * v_eq;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for tick in 0..log.n_ticks() {
        let rows = log.tick(tick);
        if rows.iter().any(|r| r.v < threshold) {
            let t = rows[0].t;
            match intervals.last_mut() {
                Some(last) if t - last.1 <= merge_gap => last.1 = t,
                _ => intervals.push((t, t)),
            }
        }
    }
    intervals
}

/// Draw `n` follower parameterizations uniformly and independently from
/// `ranges`, reproducibly from `seed`. Draw order per vehicle is fixed:
/// k, tau, a0, beta, d0, theta.
pub fn sample_mixed_platoon(
    seed: u64,
    ranges: &ParamRanges,
    n: usize,
) -> Vec<(AccParams, LimitModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |lo_hi: (f64, f64)| -> f64 {
        if lo_hi.0 == lo_hi.1 {
            lo_hi.0
        } else {
            rng.gen_range(lo_hi.0..=lo_hi.1)
        }
    };
    (0..n)
        .map(|_| {
            let k = draw(ranges.k);
            let tau = draw(ranges.tau);
            let a0 = draw(ranges.a0);
            let beta = draw(ranges.beta);
            let d0 = draw(ranges.d0);
            let theta = draw(ranges.theta);
            (
                AccParams {
                    k_v: crate::model::GainSchedule::Constant(k),
                    tau,
                    ..AccParams::default()
                },
                LimitModel { a0, beta, v_c: 40.0, d0, theta },
            )
        })
        .collect()
}
