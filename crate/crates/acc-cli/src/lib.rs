//! Scenario ingestion, result serialization and subcommand implementations
//! behind the `acc-cli` binary.
//!
//! The canonical output is `trajectories.csv` (fixed header, 6-decimal
//! fixed-point, tick-major row order); `metrics.json` carries the traffic
//! summary and `plot.svg` is an optional convenience rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use acc_core::fitlimits::{
    extract_braking_points, extract_tipping_points, fit_linear_limit, DrivePoint,
    DEFAULT_SMOOTHING_WINDOW, DEFAULT_V_C,
};
use acc_core::model::SineComponent;
use acc_core::overshoot::{analyze_step, OvershootSolution, QuadraticVariant};
use acc_core::safety::{
    gain_feasibility, required_decel, required_gain, trajectory_safety, GainFeasibility,
    TrajectorySafety,
};
use acc_core::sim::{compute_metrics, run, MetricsReport, Scenario, TrajectoryLog};
use acc_core::stability::{dampening_verdict, frequency_report, DampeningReport, StabilityReport};
use acc_core::{AccParams, LeadProfile, LimitModel};

pub const CSV_HEADER: &str = "t,vehicle,x,v,a,v_target,v_pid,spacing";

/// CLI-level failure, split by exit code: validation problems exit 1,
/// runtime (I/O) problems exit 2.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<acc_core::Error> for CliError {
    fn from(e: acc_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Parse a JSON document into any config type, naming the offending field
/// or position on failure.
pub fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Parse and validate a scenario document.
pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let scenario: Scenario = parse_json(path)?;
    scenario.validate()?;
    Ok(scenario)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Render the trajectory log as the canonical CSV: fixed header, rows
/// ordered by tick then vehicle, all floats 6-decimal fixed point with a
/// dot separator, LF newlines.
pub fn csv_string(log: &TrajectoryLog) -> String {
    let mut out = String::with_capacity(64 * (log.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &log.rows {
        let _ = writeln!(
            out,
            "{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.t, r.vehicle, r.x, r.v, r.a, r.v_target, r.v_pid, r.spacing
        );
    }
    out
}

/// The `metrics.json` document: exactly the keys
/// `{queue_length, congestion_duration_s, peak_deviation_mps, min_spacing_m, crashes}`.
pub fn metrics_json(metrics: &MetricsReport) -> Value {
    serde_json::json!({
        "queue_length": metrics.queue_length,
        "congestion_duration_s": metrics.congestion_duration_s,
        "peak_deviation_mps": metrics.peak_deviation.iter().copied().fold(0.0_f64, f64::max),
        "min_spacing_m": metrics.min_spacing,
        "crashes": metrics.crashes.len(),
    })
}

/// Write `trajectories.csv`, `metrics.json` and optionally `plot.svg` into
/// `out_dir`.
pub fn write_outputs(
    log: &TrajectoryLog,
    metrics: &MetricsReport,
    out_dir: &Path,
    plot: bool,
) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    write_file(&out_dir.join("trajectories.csv"), &csv_string(log))?;
    write_json(&out_dir.join("metrics.json"), &metrics_json(metrics))?;
    if plot {
        write_file(&out_dir.join("plot.svg"), &render_svg(log))?;
    }
    Ok(())
}

/// Minimal two-panel SVG: time-space trajectories on top, speeds below.
pub fn render_svg(log: &TrajectoryLog) -> String {
    const W: f64 = 900.0;
    const H: f64 = 320.0;
    const PAD: f64 = 40.0;
    let n = log.n_vehicles;
    let ticks = log.n_ticks();
    let stride = (ticks / 1500).max(1);
    let t_max = (ticks.max(1) as f64) * log.dt;

    let series = |f: &dyn Fn(&acc_core::sim::Row) -> f64| -> Vec<Vec<(f64, f64)>> {
        (0..n)
            .map(|veh| {
                (0..ticks)
                    .step_by(stride)
                    .map(|i| {
                        let r = &log.tick(i)[veh];
                        (r.t, f(r))
                    })
                    .collect()
            })
            .collect()
    };
    let positions = series(&|r| r.x);
    let speeds = series(&|r| r.v);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{h}" viewBox="0 0 {W} {h}">"#,
        h = 2.0 * H
    );
    for (panel, data) in [(0.0, &positions), (H, &speeds)] {
        let lo = data
            .iter()
            .flatten()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min);
        let hi = data
            .iter()
            .flatten()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let span = (hi - lo).max(1e-9);
        let _ = writeln!(
            svg,
            r##"<rect x="{PAD}" y="{y}" width="{w}" height="{h}" fill="none" stroke="#888"/>"##,
            y = panel + PAD / 2.0,
            w = W - 2.0 * PAD,
            h = H - PAD
        );
        for (veh, pts) in data.iter().enumerate() {
            let hue = (veh * 360 / n.max(1)) % 360;
            let path: String = pts
                .iter()
                .map(|(t, v)| {
                    let px = PAD + (t / t_max) * (W - 2.0 * PAD);
                    let py = panel + PAD / 2.0 + (1.0 - (v - lo) / span) * (H - PAD);
                    format!("{px:.1},{py:.1}")
                })
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                svg,
                r#"<polyline points="{path}" fill="none" stroke="hsl({hue},70%,45%)" stroke-width="1"/>"#
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Parse a canonical trajectory CSV back into per-follower drives
/// (`(t, v, a)` series, one per follower vehicle).
pub fn read_drives_from_csv(path: &Path) -> Result<Vec<Vec<DrivePoint>>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(CliError::Invalid(format!(
                "{}: expected header '{CSV_HEADER}'",
                path.display()
            )))
        }
    }
    let mut drives: BTreeMap<usize, Vec<DrivePoint>> = BTreeMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(CliError::Invalid(format!(
                "{}:{}: expected 8 fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |i: usize, name: &str| -> Result<f64, CliError> {
            fields[i].parse().map_err(|_| {
                CliError::Invalid(format!(
                    "{}:{}: field {name}: not a number: '{}'",
                    path.display(),
                    lineno + 2,
                    fields[i]
                ))
            })
        };
        let t = parse(0, "t")?;
        let vehicle: usize = fields[1].parse().map_err(|_| {
            CliError::Invalid(format!(
                "{}:{}: field vehicle: not an index: '{}'",
                path.display(),
                lineno + 2,
                fields[1]
            ))
        })?;
        let v = parse(3, "v")?;
        let a = parse(4, "a")?;
        if vehicle > 0 {
            drives.entry(vehicle).or_default().push(DrivePoint { t, v, a });
        }
    }
    Ok(drives.into_values().collect())
}

// ---------------------------------------------------------------------------
// subcommand configs and runners
// ---------------------------------------------------------------------------

/// `analyze-ss` input: planner parameters and optionally the sinusoidal
/// decomposition of a natural profile to check dampening against.
#[derive(Debug, Clone, Deserialize)]
pub struct AnalyzeSsConfig {
    pub k_v: f64,
    pub tau: f64,
    #[serde(default)]
    pub components: Vec<SineComponent>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SsOutput {
    pub report: StabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dampening: Option<DampeningReport>,
}

pub fn run_analyze_ss(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg: AnalyzeSsConfig = parse_json(config)?;
    if !(cfg.k_v > 0.0) {
        return Err(CliError::Invalid("k_v: gain must be > 0".into()));
    }
    if !(cfg.tau > 0.0) {
        return Err(CliError::Invalid("tau: time headway must be > 0".into()));
    }
    let output = SsOutput {
        report: frequency_report(cfg.k_v, cfg.tau),
        dampening: (!cfg.components.is_empty())
            .then(|| dampening_verdict(&cfg.components, cfg.k_v, cfg.tau)),
    };
    ensure_dir(out)?;
    write_json(&out.join("ss.json"), &output)
}

/// `overshoot` input: a ramped step lead and the follower's parameters.
#[derive(Debug, Clone, Deserialize)]
pub struct OvershootConfig {
    pub v0: f64,
    pub v_plateau: f64,
    pub a_lead: f64,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default)]
    pub params: AccParams,
    #[serde(default)]
    pub limits: LimitModel,
    #[serde(default)]
    pub variant: QuadraticVariant,
}

pub fn run_overshoot(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg: OvershootConfig = parse_json(config)?;
    cfg.params.validate("params.")?;
    cfg.limits.validate("limits.")?;
    let lead = LeadProfile::Ramp {
        v0: cfg.v0,
        v_final: cfg.v_plateau,
        a_lead: cfg.a_lead,
        t_start: cfg.t_start,
    };
    lead.validate()?;
    let solution: OvershootSolution = analyze_step(
        &lead,
        cfg.v0,
        cfg.v_plateau,
        cfg.t_start,
        &cfg.params,
        &cfg.limits,
        cfg.variant,
    )?;
    ensure_dir(out)?;
    write_json(&out.join("overshoot.json"), &solution)
}

/// `safety` input: the closing-scenario quantities for the gain bound and
/// optionally a scenario to scan for trajectory hazards.
#[derive(Debug, Clone, Deserialize)]
pub struct SafetyConfig {
    pub v_lead: f64,
    pub v_ego: f64,
    pub a_lead: f64,
    pub tau: f64,
    /// Current spacing (m), used to derive the required deceleration.
    pub s: f64,
    pub delta: f64,
    #[serde(default)]
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SafetyOutput {
    pub a_required: f64,
    pub gain: GainFeasibility,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySafety>,
}

pub fn run_safety(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg: SafetyConfig = parse_json(config)?;
    if !(cfg.tau > 0.0) {
        return Err(CliError::Invalid("tau: time headway must be > 0".into()));
    }
    let a_required = required_decel(cfg.s, cfg.v_ego, cfg.v_lead, cfg.delta);
    let bound = required_gain(cfg.v_lead, cfg.v_ego, cfg.a_lead, cfg.tau, a_required);
    let gain = gain_feasibility(bound, cfg.tau);
    let trajectory = match &cfg.scenario {
        Some(scn) => Some(trajectory_safety(&run(scn)?, cfg.delta)),
        None => None,
    };
    ensure_dir(out)?;
    write_json(&out.join("safety.json"), &SafetyOutput { a_required, gain, trajectory })
}

/// `sweep` input: a base scenario document and named JSON patches, each
/// deep-merged onto the base and run independently.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub base: Value,
    pub variants: Vec<SweepVariant>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SweepVariant {
    pub id: String,
    #[serde(default)]
    pub patch: Value,
}

/// Recursively merge `patch` onto `base`: objects merge per key, anything
/// else replaces.
pub fn deep_merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

pub fn run_sweep(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg: SweepConfig = parse_json(config)?;
    if cfg.variants.is_empty() {
        return Err(CliError::Invalid("variants: at least one variant required".into()));
    }
    {
        let mut ids: Vec<&str> = cfg.variants.iter().map(|v| v.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != cfg.variants.len() {
            return Err(CliError::Invalid("variants: ids must be unique".into()));
        }
    }
    // resolve and validate every scenario up front so bad configs fail fast
    let scenarios: Vec<(String, Scenario)> = cfg
        .variants
        .iter()
        .map(|variant| {
            let mut doc = cfg.base.clone();
            deep_merge(&mut doc, &variant.patch);
            let scenario: Scenario = serde_json::from_value(doc).map_err(|e| {
                CliError::Invalid(format!("variant '{}': {e}", variant.id))
            })?;
            scenario
                .validate()
                .map_err(|e| CliError::Invalid(format!("variant '{}': {e}", variant.id)))?;
            Ok((variant.id.clone(), scenario))
        })
        .collect::<Result<_, CliError>>()?;
    ensure_dir(out)?;
    let results: Vec<(String, Value)> = scenarios
        .par_iter()
        .map(|(id, scenario)| {
            let log = run(scenario)?;
            let metrics =
                compute_metrics(&log, scenario.equilibrium_speed(), scenario.congestion_fraction);
            let dir = out.join(id);
            write_outputs(&log, &metrics, &dir, false)?;
            Ok((id.clone(), metrics_json(&metrics)))
        })
        .collect::<Result<_, CliError>>()?;
    // keyed by id; BTreeMap makes the merge order-independent
    let summary: BTreeMap<String, Value> = results.into_iter().collect();
    write_json(&out.join("summary.json"), &summary)
}

/// `fit-limits` input: trajectory CSVs with acceleration (and optionally
/// braking) episodes.
#[derive(Debug, Clone, Deserialize)]
pub struct FitLimitsConfig {
    pub accel_csv: Vec<PathBuf>,
    #[serde(default)]
    pub decel_csv: Vec<PathBuf>,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_v_c")]
    pub v_c: f64,
}

fn default_window() -> f64 {
    DEFAULT_SMOOTHING_WINDOW
}

fn default_v_c() -> f64 {
    DEFAULT_V_C
}

#[derive(Debug, Clone, Serialize)]
pub struct FitOutput {
    pub a0: f64,
    pub beta: f64,
    pub v_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Tipping points the acceleration fit used, as `(speed, accel)`.
    pub accel_points: Vec<(f64, f64)>,
}

pub fn run_fit_limits(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg: FitLimitsConfig = parse_json(config)?;
    if !(cfg.window > 0.0) {
        return Err(CliError::Invalid("window: must be > 0".into()));
    }
    let mut accel_drives = Vec::new();
    for path in &cfg.accel_csv {
        accel_drives.extend(read_drives_from_csv(path)?);
    }
    let accel_points = extract_tipping_points(&accel_drives, cfg.window);
    let (a0, beta) = fit_linear_limit(&accel_points, cfg.v_c)?;
    let (d0, theta) = if cfg.decel_csv.is_empty() {
        (None, None)
    } else {
        let mut decel_drives = Vec::new();
        for path in &cfg.decel_csv {
            decel_drives.extend(read_drives_from_csv(path)?);
        }
        let pts = extract_braking_points(&decel_drives, cfg.window);
        let (d0, theta) = fit_linear_limit(&pts, cfg.v_c)?;
        (Some(d0), Some(theta))
    };
    ensure_dir(out)?;
    write_json(
        &out.join("fit.json"),
        &FitOutput { a0, beta, v_c: cfg.v_c, d0, theta, accel_points },
    )
}

pub fn run_simulate(config: &Path, out: &Path, plot: bool) -> Result<(), CliError> {
    let scenario = parse_scenario(config)?;
    let log = run(&scenario)?;
    let metrics = compute_metrics(&log, scenario.equilibrium_speed(), scenario.congestion_fraction);
    write_outputs(&log, &metrics, out, plot)
}
