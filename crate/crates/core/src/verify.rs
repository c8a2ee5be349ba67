//! Quantitative checks of an extension: interpolation, nonnegativity, C¹
//! modulus, jet agreement decay and Whitney-field statistics.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::SampleSet;
use crate::jet::{distance, whitney_deviation, Jet};
use crate::refinement::{judge, loglog_slope, RefinementConfig};
use crate::whitney::{DomainBox, ExtensionFunction, Region};

/// Grid minimum accepted as nonnegative.
pub const NONNEGATIVITY_FLOOR: f64 = -1e-12;
/// Default interpolation tolerance.
pub const INTERPOLATION_TOL: f64 = 1e-9;
/// Random probe directions per sample in the jet agreement check.
pub const RANDOM_PROBES: usize = 8;
/// Required decay of the jet agreement profile from first to last scale.
pub const JET_DECAY_FACTOR: f64 = 0.1;
/// Allowed excess of the last jet ratio over its fitted extrapolation.
pub const JET_FIT_FACTOR: f64 = 10.0;
/// Relative increase tolerated between consecutive jet ratios.
pub const JET_MONOTONE_SLACK: f64 = 0.05;
/// Grid offsets, in steps, of the C¹ modulus profile.
pub const MODULUS_OFFSETS: [usize; 5] = [16, 8, 4, 2, 1];
/// Halvings of the grid step probed below the grid resolution.
pub const MODULUS_SUBSTEPS: usize = 10;
/// Required decay of the C¹ modulus from the coarsest to the finest offset.
pub const MODULUS_DECAY_FACTOR: f64 = 0.5;
/// Values below this (relative to the natural scale) count as exactly zero.
const NEGLIGIBLE: f64 = 1e-10;

/// A function with value and gradient, possibly undefined at some points.
pub trait Surface: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, y: &[f64]) -> Option<(f64, Vec<f64>)>;
}

impl Surface for ExtensionFunction {
    fn dim(&self) -> usize {
        ExtensionFunction::dim(self)
    }

    fn evaluate(&self, y: &[f64]) -> Option<(f64, Vec<f64>)> {
        self.eval(y).ok().map(|e| (e.value, e.gradient))
    }
}

/// Closure-backed surface, for synthetic inputs.
pub struct FnSurface<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync> Surface for FnSurface<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, y: &[f64]) -> Option<(f64, Vec<f64>)> {
        Some((self.f)(y))
    }
}

/// Tensor grid `min:max:steps` per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<(f64, f64, usize)>,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let mut axes = Vec::new();
        for part in text.split(',') {
            let fields: Vec<&str> = part.trim().split(':').collect();
            let [lo, hi, steps] = fields[..] else {
                return Err(format!("expected min:max:steps, got {part:?}"));
            };
            let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
            let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
            let steps: usize = steps.trim().parse().map_err(|e| format!("{steps:?}: {e}"))?;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) || steps < 2 {
                return Err(format!("need finite min <= max and at least 2 steps, got {part:?}"));
            }
            axes.push((lo, hi, steps));
        }
        Ok(Self { axes })
    }
}

impl GridSpec {
    /// Uniform grid over `b` with at least `min_points` nodes.
    pub fn covering(b: &DomainBox, min_points: usize) -> Self {
        let n = b.dim();
        let mut steps = (min_points as f64).powf(1.0 / n as f64).ceil() as usize;
        while steps.pow(n as u32) < min_points {
            steps += 1;
        }
        let steps = steps.max(2);
        Self { axes: b.lo.iter().zip(&b.hi).map(|(&l, &h)| (l, h, steps)).collect() }
    }

    /// Same grid with every axis repeated for `dim` axes when one axis was given.
    pub fn for_dim(mut self, dim: usize) -> Result<Self, String> {
        if self.axes.len() == 1 && dim > 1 {
            self.axes = vec![self.axes[0]; dim];
        }
        if self.axes.len() != dim {
            return Err(format!("grid has {} axes, data has dimension {dim}", self.axes.len()));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.2).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.2).collect()
    }

    pub fn step(&self, k: usize) -> f64 {
        let (lo, hi, steps) = self.axes[k];
        (hi - lo) / (steps - 1) as f64
    }

    /// Node with multi-index `idx`.
    pub fn node(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(k, &i)| self.axes[k].0 + i as f64 * self.step(k)).collect()
    }

    /// Multi-index of the node with flat (row-major, last axis fastest) index `flat`.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.axes[k].2;
            flat /= self.axes[k].2;
        }
        idx
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|f| self.node(&self.unflatten(f))).collect()
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.axes.iter().map(|(l, h, s)| format!("{l}:{h}:{s}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// One pass/fail flag with the threshold it was judged against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), value, threshold, pass: value <= threshold }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), value, threshold, pass: value >= threshold }
    }
}

/// Max `|F(x_i) − f_i|` over the samples; `pass` iff `≤ tol`.
pub fn check_interpolation(f: &dyn Surface, s: &SampleSet, tol: f64) -> Check {
    let err = (0..s.len())
        .map(|i| f.evaluate(s.point(i)).map_or(f64::INFINITY, |(v, _)| (v - s.value(i)).abs()))
        .fold(0.0, f64::max);
    Check::at_most("interpolation", err, tol)
}

/// Grid evaluations in flat grid order.
pub fn evaluate_grid(f: &dyn Surface, grid: &GridSpec) -> Vec<Option<(f64, Vec<f64>)>> {
    (0..grid.len()).into_par_iter().map(|k| f.evaluate(&grid.node(&grid.unflatten(k)))).collect()
}

/// Minimum of `F` over the grid (undefined nodes ignored); `pass` iff `≥ −1e−12`.
pub fn check_nonnegativity(f: &dyn Surface, grid: &GridSpec) -> Check {
    nonnegativity_from(&evaluate_grid(f, grid))
}

fn nonnegativity_from(values: &[Option<(f64, Vec<f64>)>]) -> Check {
    let min = values.iter().flatten().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
    Check::at_least("grid_nonnegativity", min, NONNEGATIVITY_FLOOR)
}

/// Gradient oscillation at dyadic offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusProfile {
    /// `(h, max |∇F(a) − ∇F(b)|)` over grid nodes `a` and axis neighbors `b`
    /// with `|a − b| ≤ h`, coarse to fine.
    pub profile: Vec<(f64, f64)>,
    pub check: Check,
}

/// C¹ modulus of `F` around the grid nodes: node pairs up to 16 steps apart,
/// then sub-step axis offsets down to `2^{−10}` steps. Passes when the finest
/// oscillation is at most half the coarsest one or negligible.
pub fn check_c1_modulus(f: &dyn Surface, grid: &GridSpec) -> ModulusProfile {
    modulus_from(f, &evaluate_grid(f, grid), grid)
}

fn gradient_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn modulus_from(f: &dyn Surface, values: &[Option<(f64, Vec<f64>)>], grid: &GridSpec) -> ModulusProfile {
    let n = grid.dim();
    let shape = grid.shape();
    let max_off = MODULUS_OFFSETS[0];
    let step = (0..n).map(|k| grid.step(k)).fold(0.0, f64::max);
    let fine: Vec<f64> = (1..=MODULUS_SUBSTEPS).map(|j| step * 0.5f64.powi(j as i32)).collect();
    let per_node: Vec<(Vec<f64>, Vec<f64>)> = (0..values.len())
        .into_par_iter()
        .map(|flat| {
            let mut coarse = vec![0.0; max_off + 1];
            let mut sub = vec![0.0; fine.len()];
            let Some((_, ga)) = &values[flat] else { return (coarse, sub) };
            let idx = grid.unflatten(flat);
            let node = grid.node(&idx);
            let mut stride = 1;
            for k in (0..n).rev() {
                for m in 1..=max_off {
                    if idx[k] + m >= shape[k] {
                        break;
                    }
                    if let Some((_, gb)) = &values[flat + m * stride] {
                        coarse[m] = f64::max(coarse[m], gradient_gap(ga, gb));
                    }
                }
                stride *= shape[k];
                for (j, &t) in fine.iter().enumerate() {
                    for sign in [1.0, -1.0] {
                        let mut y = node.clone();
                        y[k] += sign * t;
                        if let Some((_, gb)) = f.evaluate(&y) {
                            sub[j] = f64::max(sub[j], gradient_gap(ga, &gb));
                        }
                    }
                }
            }
            (coarse, sub)
        })
        .collect();
    let mut raw: Vec<(f64, f64)> = MODULUS_OFFSETS.iter().map(|&m| (m as f64 * step, 0.0)).collect();
    raw.extend(fine.iter().map(|&t| (t, 0.0)));
    for (coarse, sub) in &per_node {
        for (slot, &m) in MODULUS_OFFSETS.iter().enumerate() {
            raw[slot].1 = raw[slot].1.max(coarse[m]);
        }
        for (j, v) in sub.iter().enumerate() {
            let slot = MODULUS_OFFSETS.len() + j;
            raw[slot].1 = raw[slot].1.max(*v);
        }
    }
    let profile = envelope(&raw);
    let grad_scale = values.iter().flatten().map(|(_, g)| g.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let first = profile[0].1;
    let last = profile[profile.len() - 1].1;
    let value = if first <= NEGLIGIBLE * (1.0 + grad_scale) { 0.0 } else { last / first };
    ModulusProfile { profile, check: Check::at_most("c1_modulus_decay", value, MODULUS_DECAY_FACTOR) }
}

/// `(h_k, max_{j ≥ k} v_j)` for a profile ordered coarse to fine.
fn envelope(profile: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = profile.to_vec();
    for k in (0..out.len().saturating_sub(1)).rev() {
        out[k].1 = out[k].1.max(out[k + 1].1);
    }
    out
}

/// Jet agreement of `F` with the prescribed jets over shrinking probe radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetAgreement {
    /// Per sample: `(h, sup max(|F(y) − P(y)|/|y − x|, |∇F(y) − ∇P|))` over
    /// probes `y = x + tu` with `t ≤ h` among the scales, in units of value
    /// scale over length scale.
    pub profiles: Vec<Vec<(f64, f64)>>,
    /// Max over samples at each scale.
    pub aggregate: Vec<(f64, f64)>,
    /// Same maximum restricted to probes at exactly `t = h`.
    pub aggregate_raw: Vec<(f64, f64)>,
    /// Log-log fit of the aggregate after its first scale, evaluated at the last scale.
    pub extrapolated: f64,
    pub checks: Vec<Check>,
}

impl JetAgreement {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Probe scales `2^{−3}..2^{−12}` times `length`.
pub fn default_jet_scales(length: f64) -> Vec<f64> {
    (3..=12).map(|k| length * 0.5f64.powi(k)).collect()
}

/// `2n` axis directions followed by [`RANDOM_PROBES`] seeded unit directions.
pub fn probe_directions(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * dim + RANDOM_PROBES);
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut u = vec![0.0; dim];
            u[k] = sign;
            dirs.push(u);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < 2 * dim + RANDOM_PROBES {
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            dirs.push(u.iter().map(|x| x / r).collect());
        }
    }
    dirs
}

/// Decay profiles of `F − P^x` around every sample; `scales` decrease.
///
/// Passes when the aggregate profile is non-increasing after its first scale
/// (relative slack [`JET_MONOTONE_SLACK`]), its last value is at most
/// [`JET_FIT_FACTOR`] times the fitted extrapolation, and it has dropped by
/// [`JET_DECAY_FACTOR`] from first to last scale.
pub fn check_jet_agreement(f: &dyn Surface, jets: &[Jet], scales: &[f64], s: &SampleSet, seed: u64) -> JetAgreement {
    let dirs = probe_directions(f.dim(), seed);
    let unit = s.value_scale() / s.length_scale();
    let raw: Vec<Vec<(f64, f64)>> = jets
        .par_iter()
        .map(|j| {
            scales
                .iter()
                .map(|&h| {
                    let mut worst: f64 = 0.0;
                    for u in &dirs {
                        let y: Vec<f64> = j.base().iter().zip(u).map(|(x, d)| x + h * d).collect();
                        let Some((v, g)) = f.evaluate(&y) else { continue };
                        let p = j.eval(&y).expect("jet dimension");
                        let dg = g.iter().zip(j.gradient()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                        worst = worst.max((v - p).abs() / h).max(dg);
                    }
                    (h, worst / unit)
                })
                .collect()
        })
        .collect();
    let at_scale = |profiles: &[Vec<(f64, f64)>]| -> Vec<(f64, f64)> {
        scales.iter().enumerate().map(|(k, &h)| (h, profiles.iter().map(|p| p[k].1).fold(0.0, f64::max))).collect()
    };
    let aggregate_raw = at_scale(&raw);
    let profiles: Vec<Vec<(f64, f64)>> = raw.iter().map(|p| envelope(p)).collect();
    let aggregate = at_scale(&profiles);
    judge_jet_profile(profiles, aggregate, aggregate_raw)
}

fn judge_jet_profile(profiles: Vec<Vec<(f64, f64)>>, aggregate: Vec<(f64, f64)>, aggregate_raw: Vec<(f64, f64)>) -> JetAgreement {
    let first = aggregate.first().map_or(0.0, |p| p.1);
    let (h_last, last) = aggregate.last().copied().unwrap_or((1.0, 0.0));
    let tail = if aggregate.len() > 2 { &aggregate[1..] } else { &aggregate[..] };
    let rise = tail.windows(2).map(|w| if w[0].1 > NEGLIGIBLE { w[1].1 / w[0].1 - 1.0 } else if w[1].1 > NEGLIGIBLE { f64::INFINITY } else { 0.0 }).fold(0.0, f64::max);
    let extrapolated = match loglog_slope(tail, NEGLIGIBLE) {
        Some(slope) => {
            let m = tail.len() as f64;
            let mx = tail.iter().map(|p| p.0.ln()).sum::<f64>() / m;
            let my = tail.iter().map(|p| p.1.max(NEGLIGIBLE).ln()).sum::<f64>() / m;
            (my + slope * (h_last.ln() - mx)).exp()
        }
        None => last,
    };
    let negligible = first <= NEGLIGIBLE;
    let fit = if negligible || last <= NEGLIGIBLE { 0.0 } else { last / extrapolated };
    let decay = if negligible { 0.0 } else { last / first };
    let checks = vec![
        Check::at_most("jet_agreement_monotone", rise, JET_MONOTONE_SLACK),
        Check::at_most("jet_agreement_fit", fit, JET_FIT_FACTOR),
        Check::at_most("jet_agreement_decay", decay, JET_DECAY_FACTOR),
    ];
    JetAgreement { profiles, aggregate, aggregate_raw, extrapolated, checks }
}

/// Multiscale Whitney-field statistics of a jet field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyFieldReport {
    /// Max over eligible points of the normalized deviation profile judged
    /// at the finest schedule radius.
    pub stat: f64,
    pub threshold: f64,
    pub pass: bool,
    /// `(δ_k, max normalized deviation over pairs closer than δ_k)`.
    pub profile: Vec<(f64, f64)>,
    /// Pair behind the statistic.
    pub worst_pair: Option<(usize, usize)>,
    pub worst_deviation: f64,
    /// Points whose neighborhoods are populated at two or more scales.
    pub eligible: usize,
}

/// Normalized deviations `d·L/V` between each sample and its neighbors,
/// aggregated per schedule radius and judged for decay per point.
pub fn check_whitney_field(jets: &[Jet], s: &SampleSet, cfg: &RefinementConfig) -> WhitneyFieldReport {
    let radii = cfg.schedule(s).radii();
    let finest = *radii.last().expect("schedule has levels");
    let norm = s.length_scale() / s.value_scale();
    let per_point: Vec<(Vec<Option<(f64, usize)>>, Option<f64>)> = (0..s.len())
        .into_par_iter()
        .map(|i| {
            let x = s.point(i);
            let mut near: Vec<(f64, f64, usize)> = s
                .neighbors(x, radii[0])
                .into_iter()
                .map(|j| (distance(x, s.point(j)), whitney_deviation(&jets[i], &jets[j]).unwrap_or(f64::INFINITY) * norm, j))
                .collect();
            near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            let mut prefix: Vec<(f64, usize)> = Vec::with_capacity(near.len());
            for &(_, d, j) in &near {
                let best = match prefix.last() {
                    Some(&(m, mj)) if m >= d => (m, mj),
                    _ => (d, j),
                };
                prefix.push(best);
            }
            let levels: Vec<Option<(f64, usize)>> = radii
                .iter()
                .map(|&r| {
                    let count = near.partition_point(|t| t.0 < r);
                    (count > 0).then(|| prefix[count - 1])
                })
                .collect();
            let profile: Vec<(f64, f64)> = radii.iter().zip(&levels).filter_map(|(&r, l)| l.map(|(d, _)| (r, d))).collect();
            let stat = (profile.len() >= 2).then(|| judge(&profile, finest, cfg.eps_star, cfg.rank_tol, cfg.min_slope).extrapolated);
            (levels, stat)
        })
        .collect();
    let profile = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| (r, per_point.iter().filter_map(|p| p.0[k].map(|l| l.0)).fold(0.0, f64::max)))
        .collect();
    let mut stat = 0.0;
    let mut worst_pair = None;
    let mut worst_deviation = 0.0;
    let mut eligible = 0;
    for (i, (levels, st)) in per_point.iter().enumerate() {
        let Some(st) = st else { continue };
        eligible += 1;
        if worst_pair.is_none() || *st > stat {
            stat = *st;
            let (d, j) = levels.iter().rev().flatten().next().copied().expect("eligible points have levels");
            worst_pair = Some((i, j));
            worst_deviation = d;
        }
    }
    WhitneyFieldReport { stat, threshold: cfg.eps_star, pass: stat <= cfg.eps_star, profile, worst_pair, worst_deviation, eligible }
}

/// Everything measured about one extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_interp_error: f64,
    pub grid: String,
    pub grid_points: usize,
    pub grid_min: f64,
    pub analytic_nonnegative: bool,
    /// Grid nodes evaluated inside the truncated collar.
    pub collar_evaluations: usize,
    pub collar_cells: usize,
    pub cubes: usize,
    pub bump_constant: f64,
    pub c1_modulus_profile: Vec<(f64, f64)>,
    pub jet_decay_aggregate: Vec<(f64, f64)>,
    pub jet_decay_aggregate_raw: Vec<(f64, f64)>,
    pub jet_decay_extrapolated: f64,
    pub jet_decay_profiles: Vec<Vec<(f64, f64)>>,
    pub whitney_field_stat: f64,
    pub whitney_field_profile: Vec<(f64, f64)>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(out, "{:<24} {:>14.6e} {:>12.3e}  {}", c.name, c.value, c.threshold, if c.pass { "pass" } else { "FAIL" });
        }
        let _ = writeln!(out, "{:<24} {:>14}", "grid_points", self.grid_points);
        let _ = writeln!(out, "{:<24} {:>14}", "collar_evaluations", self.collar_evaluations);
        let _ = writeln!(out, "{:<24} {:>14.6e}", "bump_constant", self.bump_constant);
        out
    }
}

/// Options for [`verify_extension`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub grid: GridSpec,
    pub interp_tol: f64,
    pub jet_scales: Vec<f64>,
    pub seed: u64,
}

impl VerifyOptions {
    /// Grid of at least 10⁴ nodes over the extension's domain and the default probe scales.
    pub fn defaults(f: &ExtensionFunction, s: &SampleSet, seed: u64) -> Self {
        Self {
            grid: GridSpec::covering(f.domain(), 10_000),
            interp_tol: INTERPOLATION_TOL,
            jet_scales: default_jet_scales(s.length_scale()),
            seed,
        }
    }
}

/// Runs every check on `f` built from `s` and `jets`.
pub fn verify_extension(
    f: &ExtensionFunction,
    s: &SampleSet,
    jets: &[Jet],
    cfg: &RefinementConfig,
    opts: &VerifyOptions,
) -> VerificationReport {
    let interp = check_interpolation(f, s, opts.interp_tol);
    let nodes: Vec<Vec<f64>> = opts.grid.points();
    let evals: Vec<Option<(f64, Vec<f64>, Region)>> =
        nodes.par_iter().map(|y| f.eval(y).ok().map(|e| (e.value, e.gradient, e.region))).collect();
    let collar_evaluations = evals.iter().flatten().filter(|e| matches!(e.2, Region::Collar(_))).count();
    let values: Vec<Option<(f64, Vec<f64>)>> = evals.into_iter().map(|e| e.map(|(v, g, _)| (v, g))).collect();
    let nonneg = nonnegativity_from(&values);
    let analytic = f.analytic_nonnegativity();
    let modulus = modulus_from(f, &values, &opts.grid);
    let jet = check_jet_agreement(f, jets, &opts.jet_scales, s, opts.seed);
    let field = check_whitney_field(jets, s, cfg);
    let bump_constant = f.decomposition().measure_bump_constant(&nodes);
    let mut checks = vec![interp, nonneg.clone()];
    checks.push(Check {
        name: "analytic_nonnegativity".into(),
        value: if analytic { 1.0 } else { 0.0 },
        threshold: 1.0,
        pass: analytic,
    });
    checks.push(modulus.check.clone());
    checks.extend(jet.checks.iter().cloned());
    checks.push(Check::at_most("whitney_field", field.stat, field.threshold));
    VerificationReport {
        max_interp_error: checks[0].value,
        grid: opts.grid.to_string(),
        grid_points: opts.grid.len(),
        grid_min: nonneg.value,
        analytic_nonnegative: analytic,
        collar_evaluations,
        collar_cells: f.decomposition().collar_len(),
        cubes: f.decomposition().cubes().len(),
        bump_constant,
        c1_modulus_profile: modulus.profile,
        jet_decay_aggregate: jet.aggregate,
        jet_decay_aggregate_raw: jet.aggregate_raw,
        jet_decay_extrapolated: jet.extrapolated,
        jet_decay_profiles: jet.profiles,
        whitney_field_stat: field.stat,
        whitney_field_profile: field.profile,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_MERGE_TOL;

    fn line(xs: &[f64], f: impl Fn(f64) -> f64) -> SampleSet {
        SampleSet::new(1, xs.iter().map(|&x| vec![x]).collect(), xs.iter().map(|&x| f(x)).collect(), DEFAULT_MERGE_TOL)
            .unwrap()
    }

    fn jets_of(s: &SampleSet, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Vec<Jet> {
        (0..s.len()).map(|i| Jet::new(s.point(i).to_vec(), f(s.point(i)[0]), vec![df(s.point(i)[0])]).unwrap()).collect()
    }

    #[test]
    fn grid_spec_round_trip() {
        let g: GridSpec = "-1:1:5, 0:2:3".parse().unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.node(&g.unflatten(7)), vec![0.0, 1.0]);
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
        assert!("0:1".parse::<GridSpec>().is_err());
        assert!("1:0:4".parse::<GridSpec>().is_err());
        let b = DomainBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert!(GridSpec::covering(&b, 10_000).len() >= 10_000);
        assert_eq!("0:1:4".parse::<GridSpec>().unwrap().for_dim(3).unwrap().len(), 64);
    }

    #[test]
    fn interpolation_detects_offset() {
        let s = line(&[0.0, 0.5, 1.0], |x| x * x);
        let exact = FnSurface { dim: 1, f: |y: &[f64]| (y[0] * y[0], vec![2.0 * y[0]]) };
        assert!(check_interpolation(&exact, &s, 1e-9).pass);
        let off = FnSurface { dim: 1, f: |y: &[f64]| (y[0] * y[0] + 1e-3, vec![2.0 * y[0]]) };
        let c = check_interpolation(&off, &s, 1e-9);
        assert!(!c.pass && (c.value - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn nonnegativity_and_modulus() {
        let grid: GridSpec = "-1:1:201".parse().unwrap();
        let zero = FnSurface { dim: 1, f: |_: &[f64]| (0.0, vec![0.0]) };
        assert_eq!(check_nonnegativity(&zero, &grid).value, 0.0);
        let affine = FnSurface { dim: 1, f: |y: &[f64]| (1.0 - 2.0 * y[0], vec![-2.0]) };
        assert!(!check_nonnegativity(&affine, &grid).pass);
        let m = check_c1_modulus(&affine, &grid);
        assert!(m.profile.iter().all(|p| p.1 == 0.0) && m.check.pass);
        let kink = FnSurface { dim: 1, f: |y: &[f64]| (y[0].abs(), vec![y[0].signum()]) };
        assert!(!check_c1_modulus(&kink, &grid).check.pass);
        let smooth = FnSurface { dim: 1, f: |y: &[f64]| (y[0].sin(), vec![y[0].cos()]) };
        let m = check_c1_modulus(&smooth, &grid);
        assert!(m.check.pass, "{:?}", m.profile);
        assert!(m.profile.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn jet_agreement_self_tests() {
        let s = line(&[0.0], |_| 1.0);
        let jets = vec![Jet::new(vec![0.0], 1.0, vec![0.5]).unwrap()];
        let scales = default_jet_scales(1.0);
        let own = FnSurface { dim: 1, f: |y: &[f64]| (1.0 + 0.5 * y[0], vec![0.5]) };
        let r = check_jet_agreement(&own, &jets, &scales, &s, 1);
        assert!(r.pass() && r.aggregate.iter().all(|p| p.1 < 1e-12));
        let quad = FnSurface { dim: 1, f: |y: &[f64]| (1.0 + 0.5 * y[0] + y[0] * y[0], vec![0.5 + 2.0 * y[0]]) };
        let r = check_jet_agreement(&quad, &jets, &scales, &s, 1);
        assert!(r.pass(), "{:?}", r.checks);
        let wrong = vec![Jet::new(vec![0.0], 1.0, vec![1.5]).unwrap()];
        let r = check_jet_agreement(&own, &wrong, &scales, &s, 1);
        assert!(!r.pass());
        assert!(r.aggregate.iter().all(|p| (p.1 - 1.0).abs() < 1e-9));
    }

    #[test]
    fn probe_directions_are_seeded_units() {
        let a = probe_directions(3, 9);
        assert_eq!(a.len(), 6 + RANDOM_PROBES);
        assert_eq!(a, probe_directions(3, 9));
        assert!(a.iter().all(|u| (u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn whitney_field_examples() {
        let xs: Vec<f64> = (0..60).map(|i| i as f64 / 59.0).collect();
        let cfg = RefinementConfig::default();
        let s = line(&xs, |x| 2.0 + 3.0 * x);
        let r = check_whitney_field(&jets_of(&s, |x| 2.0 + 3.0 * x, |_| 3.0), &s, &cfg);
        assert!(r.stat < 1e-12 && r.pass);
        let mut ek = vec![0.0];
        ek.extend((1..=100).map(|k| 1.0 / k as f64));
        let s = line(&ek, |x| x * x);
        let r = check_whitney_field(&jets_of(&s, |x| x * x, |x| 2.0 * x), &s, &cfg);
        assert!(r.pass, "{r:?}");
        let populated: Vec<(f64, f64)> = r.profile.iter().copied().filter(|p| p.1 > 0.0).collect();
        let slope = loglog_slope(&populated, 1e-300).unwrap();
        assert!((slope - 1.0).abs() < 0.2, "{slope}");
        let sym: Vec<f64> = (0..61).map(|i| -1.0 + i as f64 / 30.0).collect();
        let s = line(&sym, f64::abs);
        let r = check_whitney_field(&jets_of(&s, f64::abs, f64::signum), &s, &cfg);
        assert!(!r.pass);
        let tail = r.profile.iter().rev().find(|p| p.1 > 0.0).unwrap();
        assert!(tail.1 >= 1.0, "{r:?}");
    }
}
