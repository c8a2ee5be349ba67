//! Explicit extensions from a Whitney cube cover of the domain box minus `E`.
//!
//! `F = Σ_Q φ_Q·F_Q` off `E` and `F = f` on `E`, where `φ_Q` is a C¹
//! partition of unity subordinate to the dilated cubes `(3/2)Q` and `F_Q` is
//! the local piece of the sample nearest to `Q`: a nonnegative witness for
//! [`extend`], the jet polynomial itself for [`classical_extend_finite`].
//! Cells still touching `E` at the finest generation form a collar where the
//! nearest sample's piece is used directly.

mod bump;
mod cover;
mod witness;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{KdTree, SampleSet};
use crate::jet::{Jet, JetError};
use crate::refinement::RefinementConfig;
use crate::verify::{check_whitney_field, WhitneyFieldReport};

pub use bump::{partition_of_unity, profile, profile_derivative, BumpFunction, PartitionAt};
pub use cover::{whitney_decompose, Decomposition, WhitneyCube};
pub use witness::{local_witness, LocalWitness, WITNESS_GUARD};

#[derive(Debug, Error)]
pub enum WhitneyError {
    #[error("sample {index} lies outside the domain box")]
    OutsideBox { index: usize },
    #[error("invalid domain box: {0}")]
    BadBox(String),
    #[error("{jets} jets for {samples} samples")]
    Length { jets: usize, samples: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("jet value {jet_value} differs from f = {value} at {point:?}")]
    ValueMismatch { point: Vec<f64>, value: f64, jet_value: f64 },
    #[error("f vanishes at {point:?} but the jet there is not zero")]
    NonzeroJetAtZero { point: Vec<f64> },
    #[error("jets are not a Whitney field: pair ({i}, {j}) has normalized deviation {deviation:.6} and the field statistic {stat:.6} exceeds {threshold}")]
    Incompatible { i: usize, j: usize, deviation: f64, stat: f64, threshold: f64 },
    #[error("points {first} and {second} coincide with different jets")]
    ConflictingDuplicate { first: usize, second: usize },
    #[error("{point:?} lies outside the evaluation domain")]
    OutsideDomain { point: Vec<f64> },
}

/// Axis-aligned evaluation domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, WhitneyError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(WhitneyError::BadBox(format!("corners have {} and {} coordinates", lo.len(), hi.len())));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
            return Err(WhitneyError::BadBox(format!("need finite lo < hi, got {lo:?} and {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// Bounding box of `points` padded on every side by `margin` times the
    /// longest extent (or by `margin` when all points coincide).
    pub fn around(points: &[Vec<f64>], dim: usize, margin: f64) -> Self {
        if points.is_empty() {
            return Self { lo: vec![-1.0; dim], hi: vec![1.0; dim] };
        }
        let mut lo = points[0].clone();
        let mut hi = points[0].clone();
        for p in points {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        let pad = margin * if extent > 0.0 { extent } else { 1.0 };
        Self { lo: lo.iter().map(|v| v - pad).collect(), hi: hi.iter().map(|v| v + pad).collect() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }
}

/// Options for [`extend`].
#[derive(Clone, Debug)]
pub struct ExtendOptions {
    pub max_generation: u32,
    /// Thresholds of the Whitney-field gate.
    pub config: RefinementConfig,
    /// Build even when the gate fails.
    pub force: bool,
}

impl ExtendOptions {
    pub fn from_config(cfg: &RefinementConfig) -> Self {
        Self { max_generation: cfg.max_generation, config: cfg.clone(), force: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKind {
    Nonnegative,
    Classical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// `y` is the sample with this index.
    Sample(usize),
    /// Blend over the Whitney cubes.
    Blend,
    /// Collar cell; the piece of this sample is used.
    Collar(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub region: Region,
}

/// Relative slack covering rounding in evaluated sums of pieces.
pub const BOUND_ROUNDING_GUARD: f64 = 1e-9;

/// Computable sup bounds on `|F|` and `|∇F|` over the root cube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupBounds {
    pub value: f64,
    pub gradient: f64,
}

/// The blended function `F`.
#[derive(Clone, Debug)]
pub struct ExtensionFunction {
    kind: ExtensionKind,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    jets: Vec<Jet>,
    witnesses: Vec<LocalWitness>,
    tree: KdTree,
    dec: Decomposition,
    domain: DomainBox,
    gate: Option<WhitneyFieldReport>,
}

/// Nonnegative extension of `s` with the prescribed `jets`.
///
/// Refuses jets that are not values of `f`, nonzero jets where `f = 0`, and,
/// unless `opts.force`, jet fields failing the Whitney-field gate.
pub fn extend(s: &SampleSet, jets: &[Jet], b: &DomainBox, opts: &ExtendOptions) -> Result<ExtensionFunction, WhitneyError> {
    if jets.len() != s.len() {
        return Err(WhitneyError::Length { jets: jets.len(), samples: s.len() });
    }
    let vscale = s.value_scale();
    let gscale = vscale / s.length_scale();
    let mut exact = Vec::with_capacity(jets.len());
    for (i, j) in jets.iter().enumerate() {
        let (x, fx) = (s.point(i), s.value(i));
        if j.base() != x {
            return Err(WhitneyError::Jet(JetError::BaseMismatch));
        }
        if (j.value() - fx).abs() > 1e-12 * vscale {
            return Err(WhitneyError::ValueMismatch { point: x.to_vec(), value: fx, jet_value: j.value() });
        }
        if fx == 0.0 {
            if j.gradient().iter().any(|g| g.abs() > 1e-12 * gscale) {
                return Err(WhitneyError::NonzeroJetAtZero { point: x.to_vec() });
            }
            exact.push(Jet::zero(x.to_vec()));
        } else {
            exact.push(Jet::new(x.to_vec(), fx, j.gradient().to_vec())?);
        }
    }
    let gate = check_whitney_field(&exact, s, &opts.config);
    if !gate.pass && !opts.force {
        let (i, j) = gate.worst_pair.unwrap_or((0, 0));
        return Err(WhitneyError::Incompatible {
            i,
            j,
            deviation: gate.worst_deviation,
            stat: gate.stat,
            threshold: gate.threshold,
        });
    }
    let witnesses =
        exact.iter().enumerate().map(|(i, j)| local_witness(s.point(i), s.value(i), j, vscale)).collect::<Result<_, _>>()?;
    let dec = Decomposition::build(s.points(), b, opts.max_generation)?;
    Ok(ExtensionFunction {
        kind: ExtensionKind::Nonnegative,
        points: s.points().to_vec(),
        values: s.values().to_vec(),
        jets: exact,
        witnesses,
        tree: KdTree::build(s.dim(), s.points()),
        dec,
        domain: b.clone(),
        gate: Some(gate),
    })
}

/// Signed extension reproducing arbitrary jets at finitely many points.
pub fn classical_extend_finite(
    points: &[Vec<f64>],
    jets: &[Jet],
    b: &DomainBox,
    max_generation: u32,
) -> Result<ExtensionFunction, WhitneyError> {
    if jets.len() != points.len() {
        return Err(WhitneyError::Length { jets: jets.len(), samples: points.len() });
    }
    for (p, j) in points.iter().zip(jets) {
        if j.base() != p.as_slice() {
            return Err(WhitneyError::Jet(JetError::BaseMismatch));
        }
    }
    let tree = KdTree::build(b.dim(), points);
    for (i, p) in points.iter().enumerate() {
        for k in tree.within(p, 0.0, true) {
            if k < i && jets[k] != jets[i] {
                return Err(WhitneyError::ConflictingDuplicate { first: k, second: i });
            }
        }
    }
    let dec = Decomposition::build(points, b, max_generation)?;
    Ok(ExtensionFunction {
        kind: ExtensionKind::Classical,
        points: points.to_vec(),
        values: jets.iter().map(|j| j.value()).collect(),
        jets: jets.to_vec(),
        witnesses: Vec::new(),
        tree,
        dec,
        domain: b.clone(),
        gate: None,
    })
}

fn sup_affine_on_box(j: &Jet, lo: &[f64], side: f64) -> f64 {
    let center: Vec<f64> = lo.iter().map(|l| l + 0.5 * side).collect();
    j.eval_unchecked(&center).abs() + j.gradient().iter().map(|g| g.abs() * 0.5 * side).sum::<f64>()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl ExtensionFunction {
    pub fn kind(&self) -> ExtensionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.dec
    }

    pub fn jets(&self) -> &[Jet] {
        &self.jets
    }

    pub fn witnesses(&self) -> &[LocalWitness] {
        &self.witnesses
    }

    /// Whitney-field statistics checked before construction.
    pub fn gate(&self) -> Option<&WhitneyFieldReport> {
        self.gate.as_ref()
    }

    fn piece(&self, r: usize, y: &[f64]) -> (f64, Vec<f64>) {
        match self.kind {
            ExtensionKind::Nonnegative => self.witnesses[r].eval(y),
            ExtensionKind::Classical => (self.jets[r].eval_unchecked(y), self.jets[r].gradient().to_vec()),
        }
    }

    /// Value and gradient at `y` (inside the root cube of the domain box).
    pub fn eval(&self, y: &[f64]) -> Result<Evaluation, WhitneyError> {
        let n = self.dim();
        if y.len() != n || !self.dec.in_root(y) {
            return Err(WhitneyError::OutsideDomain { point: y.to_vec() });
        }
        let Some((near, d)) = self.tree.nearest(y, None) else {
            return Ok(Evaluation { value: 0.0, gradient: vec![0.0; n], region: Region::Blend });
        };
        if d == 0.0 {
            let gradient = self.jets[near].gradient().to_vec();
            return Ok(Evaluation { value: self.values[near], gradient, region: Region::Sample(near) });
        }
        let Some(partition) = self.dec.partition_at(y) else {
            let (value, gradient) = self.piece(near, y);
            return Ok(Evaluation { value, gradient, region: Region::Collar(near) });
        };
        let mut value = 0.0;
        let mut gradient = vec![0.0; n];
        for (q, phi, dphi) in &partition.terms {
            let rep = self.dec.cubes()[*q].rep_index.expect("nonempty sample set");
            let (v, g) = self.piece(rep, y);
            value += phi * v;
            for k in 0..n {
                gradient[k] += dphi[k] * v + phi * g[k];
            }
        }
        Ok(Evaluation { value, gradient, region: Region::Blend })
    }

    pub fn value(&self, y: &[f64]) -> Result<f64, WhitneyError> {
        self.eval(y).map(|e| e.value)
    }

    /// Every summand `φ_Q·F_Q` is nonnegative by construction.
    pub fn analytic_nonnegativity(&self) -> bool {
        self.kind == ExtensionKind::Nonnegative && self.witnesses.iter().all(LocalWitness::nonnegative_by_construction)
    }

    /// Sup bounds of a classical extension from its jets and the cover.
    ///
    /// On a cube `Q′` only the cubes of `A(Q′)` (supports meeting `Q′`) are
    /// active, so `|F| ≤ max_A sup |P^{r_Q}|` and `|∇F| ≤ max_A |∇P^{r_Q}| +
    /// 2·Σ_A (6√n/side_Q)·max_A sup |P^{r_Q} − P^{r_Q′}|`.
    pub fn classical_bounds(&self) -> Option<SupBounds> {
        if self.kind != ExtensionKind::Classical || self.points.is_empty() {
            return None;
        }
        let n = self.dim();
        let sqrt_n = (n as f64).sqrt();
        let mut m0: f64 = 0.0;
        let mut m1: f64 = 0.0;
        let mut active = Vec::new();
        let cubes = self.dec.cubes();
        for q in cubes {
            let lo = q.lo();
            active.clear();
            self.dec.active_for_box(&lo, &q.hi(), &mut active);
            let own = &self.jets[q.rep_index.expect("nonempty sample set")];
            let mut spread: f64 = 0.0;
            let mut slope_sum = 0.0;
            for &a in &active {
                let other = &cubes[a];
                let jet = &self.jets[other.rep_index.expect("nonempty sample set")];
                m0 = m0.max(sup_affine_on_box(jet, &lo, q.side));
                m1 = m1.max(norm(jet.gradient()));
                let diff_grad: Vec<f64> = jet.gradient().iter().zip(own.gradient()).map(|(a, b)| a - b).collect();
                let center: Vec<f64> = lo.iter().map(|l| l + 0.5 * q.side).collect();
                let diff_center = jet.eval_unchecked(&center) - own.eval_unchecked(&center);
                spread = spread.max(diff_center.abs() + diff_grad.iter().map(|g| g.abs() * 0.5 * q.side).sum::<f64>());
                slope_sum += 6.0 * sqrt_n / other.side;
            }
            let gmax = active
                .iter()
                .map(|&a| norm(self.jets[cubes[a].rep_index.expect("nonempty sample set")].gradient()))
                .fold(0.0, f64::max);
            m1 = m1.max(gmax + 2.0 * slope_sum * spread);
        }
        for &c in self.dec.collar_cells() {
            let cell = self.dec.cell(c);
            let lo = self.dec.cell_lo(c);
            let center: Vec<f64> = lo.iter().map(|l| l + 0.5 * cell.side).collect();
            let reach = cell.dist + 1.5 * cell.side * sqrt_n;
            for r in self.tree.within(&center, reach, true) {
                m0 = m0.max(sup_affine_on_box(&self.jets[r], lo, cell.side));
                m1 = m1.max(norm(self.jets[r].gradient()));
            }
        }
        let guard = 1.0 + BOUND_ROUNDING_GUARD;
        Some(SupBounds { value: m0 * guard, gradient: m1 * guard })
    }

    /// Cells of the collar, as `(lo corner, side)`.
    pub fn collar(&self) -> Vec<(Vec<f64>, f64)> {
        self.dec.collar_cells().iter().map(|&c| (self.dec.cell_lo(c).to_vec(), self.dec.cell(c).side)).collect()
    }
}
