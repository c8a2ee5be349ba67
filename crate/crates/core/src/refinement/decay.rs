//! Decay judgement for multiscale deviation profiles.

use serde::{Deserialize, Serialize};

/// Outcome of one refinement step at one point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    /// Fewer than two scales see any neighbor; the fiber is kept.
    Vacuous,
    /// Every populated scale contains an empty neighbor fiber; the fiber is kept.
    Unresolved,
    /// The deviation profile decays; the fiber is refined.
    Decayed,
    /// The profile neither decays below nor stagnates above the threshold.
    Ambiguous,
    /// The profile stagnates above the threshold; the fiber becomes empty.
    Emptied,
    /// The fiber was already empty.
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub status: PointStatus,
    pub slope: Option<f64>,
    /// Profile value extrapolated to the finest schedule radius.
    pub extrapolated: f64,
}

/// Least-squares slope of `ln v` against `ln δ`, values clamped below at `floor`.
pub fn loglog_slope(profile: &[(f64, f64)], floor: f64) -> Option<f64> {
    if profile.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = profile.iter().map(|&(d, v)| (d.ln(), v.max(floor).ln())).collect();
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Judges a profile `(δ_k, D_k)` ordered from coarse to fine.
///
/// Decay means a log-log slope of at least `min_slope` (or a final value
/// below `rank_tol`); a decaying profile is extrapolated along its fitted
/// power law to `finest_delta` before comparison with `eps`.
pub fn judge(profile: &[(f64, f64)], finest_delta: f64, eps: f64, rank_tol: f64, min_slope: f64) -> DecayFit {
    let Some(&(last_delta, last)) = profile.last() else {
        return DecayFit { status: PointStatus::Vacuous, slope: None, extrapolated: 0.0 };
    };
    let slope = loglog_slope(profile, rank_tol);
    if last <= rank_tol {
        return DecayFit { status: PointStatus::Decayed, slope, extrapolated: last };
    }
    let decaying = slope.is_some_and(|s| s >= min_slope);
    if decaying {
        let s = slope.expect("decaying implies a slope");
        let extrapolated = last * (finest_delta / last_delta).min(1.0).powf(s);
        let status = if extrapolated <= eps { PointStatus::Decayed } else { PointStatus::Ambiguous };
        return DecayFit { status, slope, extrapolated };
    }
    let status = if last > eps { PointStatus::Emptied } else { PointStatus::Ambiguous };
    DecayFit { status, slope, extrapolated: last }
}
