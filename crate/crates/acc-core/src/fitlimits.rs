//! Recover a limit model from drive data by the tipping-point method:
//! the sustained-maximum acceleration of each drive estimates the built-in
//! bound at the speed where it occurs, and the points of several drives at
//! different speeds are connected by a least-squares line.

use crate::model::LimitModel;
use crate::Error;

/// Moving-average window for "sustained" acceleration (s).
pub const DEFAULT_SMOOTHING_WINDOW: f64 = 0.5;

/// Reference speed the line fit is reported against; the intercept and
/// slope only identify two of the three limit-model parameters.
pub const DEFAULT_V_C: f64 = 40.0;

/// One sample of a recorded drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivePoint {
    pub t: f64,
    pub v: f64,
    pub a: f64,
}

/// Smoothed `(v, a)` per sample: centered moving averages over all samples
/// within `window / 2` seconds. Speed is averaged over the same window so
/// the pair stays on the bound line when the bound is linear in speed.
fn smooth(drive: &[DrivePoint], window: f64) -> Vec<(f64, f64)> {
    let half = window / 2.0;
    let n = drive.len();
    let mut out = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0usize, 0usize);
    let (mut sum_v, mut sum_a) = (0.0, 0.0);
    for i in 0..n {
        while hi < n && drive[hi].t <= drive[i].t + half {
            sum_v += drive[hi].v;
            sum_a += drive[hi].a;
            hi += 1;
        }
        while drive[lo].t < drive[i].t - half {
            sum_v -= drive[lo].v;
            sum_a -= drive[lo].a;
            lo += 1;
        }
        let count = (hi - lo) as f64;
        out.push((sum_v / count, sum_a / count));
    }
    out
}

/// Per drive, the sustained-maximum acceleration and the speed at which it
/// occurs. Drives with no positive sustained acceleration are skipped.
pub fn extract_tipping_points(drives: &[Vec<DrivePoint>], window: f64) -> Vec<(f64, f64)> {
    extract_extremes(drives, window, 1.0)
}

/// Deceleration mirror: per drive, the sustained-minimum acceleration
/// (returned as a positive magnitude) and the speed at which it occurs.
/// Drives with no negative sustained acceleration are skipped.
pub fn extract_braking_points(drives: &[Vec<DrivePoint>], window: f64) -> Vec<(f64, f64)> {
    extract_extremes(drives, window, -1.0)
}

fn extract_extremes(drives: &[Vec<DrivePoint>], window: f64, sign: f64) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    for drive in drives {
        if drive.is_empty() {
            continue;
        }
        let smoothed = smooth(drive, window);
        let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
        for (i, (_, a)) in smoothed.iter().enumerate() {
            let val = sign * a;
            if val > best {
                best = val;
                best_i = i;
            }
        }
        if best > 0.0 {
            points.push((smoothed[best_i].0, best));
        }
    }
    points
}

/// Least-squares line `a = c0 + c1 * v` through the tipping points,
/// reported in the `(a0, beta, v_c)` parameterization with `v_c` fixed:
/// `beta = -c1`, `a0 = c0 + c1 * v_c`.
///
/// Returns `(a0, beta)`. Needs at least two points with distinct speeds.
pub fn fit_linear_limit(points: &[(f64, f64)], v_c: f64) -> Result<(f64, f64), Error> {
    let n = points.len();
    let distinct = {
        let mut vs: Vec<f64> = points.iter().map(|p| p.0).collect();
        vs.sort_by(|a, b| a.total_cmp(b));
        vs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        vs.len()
    };
    if distinct < 2 {
        return Err(Error::Underdetermined { points: distinct });
    }
    let nf = n as f64;
    let sv: f64 = points.iter().map(|p| p.0).sum();
    let sa: f64 = points.iter().map(|p| p.1).sum();
    let svv: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sva: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let c1 = (nf * sva - sv * sa) / (nf * svv - sv * sv);
    let c0 = (sa - c1 * sv) / nf;
    Ok((c0 + c1 * v_c, -c1))
}

/// Fit both sides of a limit model from drives containing acceleration and
/// braking episodes.
pub fn fit_limit_model(
    accel_drives: &[Vec<DrivePoint>],
    decel_drives: &[Vec<DrivePoint>],
    window: f64,
    v_c: f64,
) -> Result<LimitModel, Error> {
    let (a0, beta) = fit_linear_limit(&extract_tipping_points(accel_drives, window), v_c)?;
    let (d0, theta) = fit_linear_limit(&extract_braking_points(decel_drives, window), v_c)?;
    Ok(LimitModel { a0, beta, v_c, d0, theta })
}
