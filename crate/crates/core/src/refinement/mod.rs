//! Discretized Glaeser refinement.
//!
//! A refinement round keeps, at every sample `x0`, the jets of the current
//! fiber whose worst-case compatibility with nearby fibers decays as the
//! scale shrinks. The existential "∃δ" is discretized by the radius schedule
//! `δ_k`; at each scale a bounded family of neighbor tuples is examined and
//! the per-scale deviation `D_k` is the exact min–max over the neighbors'
//! fibers, maximized over tuples. Everything is computed in normalized
//! units: lengths over the sample diameter and values over the largest value.

mod config;
mod decay;
mod select;
mod system;
mod tuples;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fibers::{AffineFiber, Fiber, FiberField};
use crate::geometry::{SampleSet, ScaleSchedule};

pub use config::{ConfigError, RefinementConfig};
pub use decay::{judge, loglog_slope, DecayFit, PointStatus};
pub use select::{select_jets, select_jets_forced, SelectError};
pub use system::infimum_deviation;

pub(crate) use system::{Frame, Slot};

use system::TupleSystem;
use tuples::{level_rng, sample_tuples};

/// Tolerance for fiber equality between consecutive rounds.
pub const STABILITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelState {
    /// No sample in the open ball.
    Vacant,
    /// The ball holds a sample whose fiber is empty.
    Blocked,
    Finite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub delta: f64,
    pub state: LevelState,
    pub tuples: usize,
    /// Worst-tuple infimum deviation at the refined base jet.
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: usize,
    pub dim_before: Option<usize>,
    pub dim: Option<usize>,
    pub status: PointStatus,
    pub slope: Option<f64>,
    pub extrapolated: Option<f64>,
    pub decay: Vec<LevelRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Index of the field that was refined.
    pub round: usize,
    pub k_sharp: usize,
    /// Number of fibers that differ from the previous round.
    pub changed: usize,
    pub points: Vec<PointRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementTrace {
    pub rounds: Vec<RoundRecord>,
    /// First `ℓ` with `Φ_{ℓ+1} = Φ_ℓ`, if observed within the budget.
    pub stabilized_round: Option<usize>,
    pub budget: usize,
    /// Reported band `[n, n+1]` for the stabilization round.
    pub reference_band: [usize; 2],
    pub within_reference_band: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Extendable,
    NotExtendable,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub witnesses: Vec<usize>,
    pub rounds_used: usize,
    pub stabilized_round: Option<usize>,
    /// Set for an empty sample set, which is vacuously extendable.
    pub degenerate: bool,
}

/// Full result of [`decide`].
#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: Verdict,
    pub field: FiberField,
    pub trace: RefinementTrace,
}

enum Level {
    Vacant,
    Blocked,
    Finite(Vec<Prepared>),
}

struct Prepared {
    system: TupleSystem,
    form: DMatrix<f64>,
    linear: DVector<f64>,
}

struct Engine<'a> {
    s: &'a SampleSet,
    field: &'a FiberField,
    cfg: &'a RefinementConfig,
    radii: Vec<f64>,
    slots: Vec<Option<Slot>>,
    k_sharp: usize,
}

impl<'a> Engine<'a> {
    fn new(field: &'a FiberField, s: &'a SampleSet, cfg: &'a RefinementConfig) -> Self {
        let frame = Frame { length: field.scale, value: s.value_scale() };
        let slots = field.fibers.iter().map(|f| f.as_affine().map(|a| frame.fiber_slot(a))).collect();
        let schedule: ScaleSchedule = cfg.schedule(s);
        Self { s, field, cfg, radii: schedule.radii(), slots, k_sharp: cfg.k_sharp_for(field.round) }
    }

    fn levels(&self, x0: usize, center: &Slot) -> Vec<Level> {
        let point = self.s.point(x0);
        self.radii
            .iter()
            .enumerate()
            .map(|(k, &delta)| {
                let nbrs = self.s.neighbors(point, delta);
                if nbrs.is_empty() {
                    return Level::Vacant;
                }
                if nbrs.iter().any(|&j| self.field.fibers[j].is_empty()) {
                    return Level::Blocked;
                }
                let mut rng = level_rng(self.cfg.seed, x0, k);
                let tuples = sample_tuples(
                    self.s,
                    point,
                    &nbrs,
                    self.k_sharp,
                    self.cfg.tuples_worst,
                    self.cfg.tuples_random,
                    &mut rng,
                );
                let prepared = tuples
                    .iter()
                    .map(|t| {
                        let others: Vec<&Slot> =
                            t.iter().map(|&j| self.slots[j].as_ref().expect("nonempty neighbor")).collect();
                        let system = TupleSystem::new(center, &others);
                        let form = system.form();
                        let linear = system.linear();
                        Prepared { system, form, linear }
                    })
                    .collect();
                Level::Finite(prepared)
            })
            .collect()
    }

    fn judge(&self, profile: &[(f64, f64)]) -> DecayFit {
        let finest = *self.radii.last().expect("at least three levels");
        judge(profile, finest, self.cfg.eps_star, self.cfg.rank_tol, self.cfg.min_slope)
    }

    /// Splits the parameter space into free directions (whose deviation
    /// profile decays) and constrained ones, both as orthonormal columns.
    fn split(&self, levels: &[Level], finite: &[usize], d0: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let tail = &finite[finite.len().saturating_sub(3)..];
        let mut sum = DMatrix::zeros(d0, d0);
        for &k in tail {
            if let Level::Finite(ps) = &levels[k] {
                for p in ps {
                    sum += &p.form;
                }
            }
        }
        let eig = SymmetricEigen::new(sum);
        let mut order: Vec<usize> = (0..d0).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let (mut free, mut fixed) = (Vec::new(), Vec::new());
        for i in order {
            let v = eig.eigenvectors.column(i).into_owned();
            let profile: Vec<(f64, f64)> = finite
                .iter()
                .map(|&k| {
                    let Level::Finite(ps) = &levels[k] else { unreachable!() };
                    let worst = ps.iter().map(|p| (v.dot(&(&p.form * &v))).max(0.0).sqrt()).fold(0.0, f64::max);
                    (self.radii[k], worst)
                })
                .collect();
            let last = profile.last().map(|p| p.0).unwrap_or(1.0);
            let fit = judge(&profile, last, self.cfg.eps_star, self.cfg.rank_tol, self.cfg.min_slope);
            if fit.status == PointStatus::Decayed {
                free.push(v);
            } else {
                fixed.push(v);
            }
        }
        let cols = |vs: &[DVector<f64>]| DMatrix::from_fn(d0, vs.len(), |r, c| vs[c][r]);
        (cols(&free), cols(&fixed))
    }

    /// Parameter offset fixed scale by scale from the finest populated level
    /// toward coarser ones, with the directions that no level determines.
    fn offset(&self, levels: &[Level], finite: &[usize], d0: usize) -> (DVector<f64>, DMatrix<f64>) {
        let mut c = DVector::zeros(d0);
        let mut w = DMatrix::identity(d0, d0);
        let threshold = 1e-2 * self.cfg.eps_star * self.cfg.eps_star;
        for &k in finite.iter().rev() {
            if w.ncols() == 0 {
                break;
            }
            let Level::Finite(ps) = &levels[k] else { unreachable!() };
            let mut h = DMatrix::zeros(d0, d0);
            let mut g = DVector::zeros(d0);
            for p in ps {
                h += &p.form;
                g += &p.linear;
            }
            let m = w.transpose() * &h * &w;
            let q = w.transpose() * (&h * &c + &g);
            let eig = SymmetricEigen::new(m);
            let mut keep = Vec::new();
            let mut step = DVector::zeros(d0);
            for i in 0..eig.eigenvalues.len() {
                let e = eig.eigenvectors.column(i);
                let lam = eig.eigenvalues[i];
                if lam >= threshold {
                    step += &w * e * (-e.dot(&q) / lam);
                } else {
                    keep.push(e.into_owned());
                }
            }
            c += step;
            let kept = DMatrix::from_fn(w.ncols(), keep.len(), |r, cc| keep[cc][r]);
            w = &w * kept;
        }
        (c, w)
    }

    fn level_deviation(ps: &[Prepared], c: &DVector<f64>) -> f64 {
        let mut bounds: Vec<(f64, f64, usize)> = ps
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let res = p.system.ls_residual(c);
                let m = p.system.terms().max(1) as f64;
                (res.amax(), res.norm() / m.sqrt(), i)
            })
            .collect();
        bounds.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)));
        let mut best = bounds.iter().map(|b| b.1).fold(0.0, f64::max);
        for &(upper, _, i) in &bounds {
            if upper <= best {
                break;
            }
            best = best.max(ps[i].system.exact(c));
        }
        best
    }

    fn refine(&self, x0: usize) -> (Fiber, PointRecord) {
        let fiber = &self.field.fibers[x0];
        let mut record = PointRecord {
            point: x0,
            dim_before: fiber.dim(),
            dim: fiber.dim(),
            status: PointStatus::Empty,
            slope: None,
            extrapolated: None,
            decay: Vec::new(),
        };
        let Some(aff) = fiber.as_affine() else {
            return (Fiber::Empty, record);
        };
        let center = self.slots[x0].as_ref().expect("affine fiber has a slot");
        let levels = self.levels(x0, center);
        record.decay = levels
            .iter()
            .zip(&self.radii)
            .map(|(l, &delta)| {
                let (state, tuples) = match l {
                    Level::Vacant => (LevelState::Vacant, 0),
                    Level::Blocked => (LevelState::Blocked, 0),
                    Level::Finite(ps) => (LevelState::Finite, ps.len()),
                };
                LevelRecord { delta, state, tuples, deviation: None }
            })
            .collect();
        let populated = levels.iter().filter(|l| !matches!(l, Level::Vacant)).count();
        if populated < 2 {
            record.status = PointStatus::Vacuous;
            return (fiber.clone(), record);
        }
        let finite: Vec<usize> = (0..levels.len()).filter(|&k| matches!(levels[k], Level::Finite(_))).collect();
        if finite.is_empty() {
            record.status = PointStatus::Unresolved;
            return (fiber.clone(), record);
        }
        let d0 = aff.dim();
        let (mut free, fixed) = if d0 > 0 {
            self.split(&levels, &finite, d0)
        } else {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        };
        let mut c = DVector::zeros(d0);
        let mut constrained = fixed.ncols();
        if constrained > 0 {
            let (offset, undetermined) = self.offset(&levels, &finite, d0);
            c = offset;
            if undetermined.ncols() > 0 {
                free = span(&free, &undetermined);
                constrained = d0 - free.ncols();
            }
        }
        let mut profile = Vec::with_capacity(finite.len());
        for &k in &finite {
            let Level::Finite(ps) = &levels[k] else { unreachable!() };
            let dev = Self::level_deviation(ps, &c);
            record.decay[k].deviation = Some(dev);
            profile.push((self.radii[k], dev));
        }
        let mut fit = self.judge(&profile);
        if fit.status == PointStatus::Emptied && profile.len() < self.cfg.min_empty_levels {
            fit.status = PointStatus::Ambiguous;
        }
        record.status = fit.status;
        record.slope = fit.slope;
        record.extrapolated = Some(fit.extrapolated);
        if fit.status == PointStatus::Emptied {
            record.dim = None;
            return (Fiber::Empty, record);
        }
        if constrained == 0 {
            return (fiber.clone(), record);
        }
        let coeffs: Vec<f64> = c.iter().cloned().collect();
        let base = aff.point_at(&coeffs);
        let len = aff.base().dim() + 1;
        let dirs: Vec<Vec<f64>> = (0..free.ncols())
            .map(|col| {
                let mut v = vec![0.0; len];
                for (j, d) in aff.directions().iter().enumerate() {
                    for (vi, di) in v.iter_mut().zip(d) {
                        *vi += free[(j, col)] * di;
                    }
                }
                v
            })
            .collect();
        let dirs = if dirs.len() == len { dirs } else { AffineFiber::ideal_part(&dirs, len) };
        let refined = AffineFiber::new(base, dirs, aff.scale()).expect("finite refined fiber");
        record.dim = Some(refined.dim());
        (Fiber::Affine(refined), record)
    }
}

/// Orthonormal basis of the span of the columns of `a` and `b`.
fn span(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows().max(b.nrows());
    let mut m = DMatrix::zeros(d, a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > 1e-8).collect();
    DMatrix::from_fn(d, keep.len(), |r, c| u[(r, keep[c])])
}

/// Refines the fiber at `x0` against `field` (which is not modified).
pub fn refine_point(x0: usize, field: &FiberField, s: &SampleSet, cfg: &RefinementConfig) -> Fiber {
    Engine::new(field, s, cfg).refine(x0).0
}

/// One simultaneous round with its per-point records.
pub fn refine_round_traced(field: &FiberField, s: &SampleSet, cfg: &RefinementConfig) -> (FiberField, RoundRecord) {
    let engine = Engine::new(field, s, cfg);
    let results: Vec<(Fiber, PointRecord)> = (0..field.len()).into_par_iter().map(|i| engine.refine(i)).collect();
    let (fibers, points): (Vec<Fiber>, Vec<PointRecord>) = results.into_iter().unzip();
    let changed = fibers
        .iter()
        .zip(&field.fibers)
        .filter(|(a, b)| !crate::fibers::fiber_equal(a, b, STABILITY_TOL))
        .count();
    let next = FiberField { fibers, round: field.round + 1, scale: field.scale };
    let record = RoundRecord { round: field.round, k_sharp: engine.k_sharp, changed, points };
    (next, record)
}

pub fn refine_round(field: &FiberField, s: &SampleSet, cfg: &RefinementConfig) -> FiberField {
    refine_round_traced(field, s, cfg).0
}

/// Iterates rounds until a round changes nothing or the budget is spent.
pub fn refine_to_stability(
    field0: FiberField,
    s: &SampleSet,
    cfg: &RefinementConfig,
) -> (FiberField, RefinementTrace) {
    let n = s.dim();
    let budget = cfg.max_rounds_for(n);
    let mut trace = RefinementTrace {
        rounds: Vec::new(),
        stabilized_round: None,
        budget,
        reference_band: [n, n + 1],
        within_reference_band: None,
    };
    let mut field = field0;
    for _ in 0..budget {
        let (next, record) = refine_round_traced(&field, s, cfg);
        let stable = record.changed == 0;
        trace.rounds.push(record);
        if stable {
            trace.stabilized_round = Some(field.round);
            trace.within_reference_band = Some((n..=n + 1).contains(&field.round));
            return (next, trace);
        }
        field = next;
    }
    (field, trace)
}

fn verdict_from(field: &FiberField, trace: &RefinementTrace) -> Verdict {
    let empty: Vec<usize> = (0..field.len()).filter(|&i| field.fibers[i].is_empty()).collect();
    let (status, witnesses) = if !empty.is_empty() {
        (VerdictStatus::NotExtendable, empty)
    } else {
        let ambiguous: Vec<usize> = trace
            .rounds
            .last()
            .map(|r| {
                r.points
                    .iter()
                    .filter(|p| matches!(p.status, PointStatus::Ambiguous | PointStatus::Unresolved))
                    .map(|p| p.point)
                    .collect()
            })
            .unwrap_or_default();
        if ambiguous.is_empty() {
            (VerdictStatus::Extendable, Vec::new())
        } else {
            (VerdictStatus::Inconclusive, ambiguous)
        }
    };
    Verdict {
        status,
        witnesses,
        rounds_used: trace.rounds.len(),
        stabilized_round: trace.stabilized_round,
        degenerate: field.is_empty(),
    }
}

/// Refines `field0` to stability and classifies the result.
pub fn decide_from(field0: FiberField, s: &SampleSet, cfg: &RefinementConfig) -> Decision {
    let (field, trace) = refine_to_stability(field0, s, cfg);
    let verdict = verdict_from(&field, &trace);
    Decision { verdict, field, trace }
}

/// Nonnegative extendability decision starting from `Γ_f`.
pub fn decide(s: &SampleSet, cfg: &RefinementConfig) -> Decision {
    decide_from(FiberField::gamma_initial(s), s, cfg)
}

/// Sign-free decision starting from `H_f`.
pub fn decide_classical(s: &SampleSet, cfg: &RefinementConfig) -> Decision {
    decide_from(FiberField::classical_initial(s), s, cfg)
}
