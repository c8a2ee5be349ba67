//! Glaeser fibers in 1-jet space.
//!
//! An affine fiber is `base + span(directions)` where the directions are
//! orthonormal in the scaled coordinates `z = (value, s·gradient)`. For m = 1
//! the proper ideals of the jet ring are the subspaces of
//! `m_x = {P : P(x) = 0}`, so a fiber is Glaeser iff it is the whole space or
//! every direction has a zero value component.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::SampleSet;
use crate::jet::{Jet, JetError};

/// Relative singular-value threshold for rank decisions on direction sets.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FiberError {
    #[error("value {0} is negative")]
    NegativeValue(f64),
    #[error("fiber is empty")]
    Empty,
    #[error("jet is anchored at a different base point than the fiber")]
    BaseMismatch,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("malformed fiber state: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineFiber {
    base: Jet,
    directions: Vec<Vec<f64>>,
    scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Fiber {
    Empty,
    Affine(AffineFiber),
}

fn is_orthonormal(dirs: &[Vec<f64>], tol: f64) -> bool {
    for (i, a) in dirs.iter().enumerate() {
        for (j, b) in dirs.iter().enumerate().skip(i) {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Orthonormal basis of `span(vectors)` with relative rank threshold [`RANK_RTOL`].
/// Already-orthonormal input is returned unchanged.
pub(crate) fn orthonormalize(vectors: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    if is_orthonormal(vectors, 1e-13) {
        return vectors.to_vec();
    }
    let m = DMatrix::from_fn(len, vectors.len(), |r, c| vectors[c][r]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    let in_ideal = vectors.iter().all(|v| v[0] == 0.0);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order
        .into_iter()
        .filter(|&k| svd.singular_values[k] > RANK_RTOL * smax)
        .map(|k| {
            let mut v: Vec<f64> = u.column(k).iter().cloned().collect();
            if in_ideal {
                v[0] = 0.0;
            }
            v
        })
        .collect()
}

impl AffineFiber {
    /// `base + span(directions)` with directions given in scaled coordinates.
    pub fn new(base: Jet, directions: Vec<Vec<f64>>, scale: f64) -> Result<Self, FiberError> {
        let len = base.dim() + 1;
        if let Some(bad) = directions.iter().find(|d| d.len() != len) {
            return Err(JetError::Dimension { expected: len, got: bad.len() }.into());
        }
        if directions.iter().flatten().any(|v| !v.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
            return Err(JetError::NonFinite.into());
        }
        let directions = orthonormalize(&directions, len);
        Ok(Self { base, directions, scale })
    }

    pub fn base(&self) -> &Jet {
        &self.base
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Subspace dimension `d`.
    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn is_whole_space(&self) -> bool {
        self.dim() == self.base.dim() + 1
    }

    pub(crate) fn base_z(&self) -> Vec<f64> {
        self.base.to_scaled(self.scale)
    }

    /// Residual of `z` after projecting onto the direction span.
    fn residual(&self, z: &[f64]) -> Vec<f64> {
        let mut r = z.to_vec();
        for d in &self.directions {
            let c: f64 = d.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (ri, di) in r.iter_mut().zip(d) {
                *ri -= c * di;
            }
        }
        r
    }

    fn offset(&self, j: &Jet) -> Result<Vec<f64>, FiberError> {
        if j.base() != self.base.base() {
            return Err(FiberError::BaseMismatch);
        }
        let z = j.to_scaled(self.scale);
        Ok(z.iter().zip(self.base_z()).map(|(a, b)| a - b).collect())
    }

    /// Jet-space distance from `j` to the fiber.
    pub fn distance(&self, j: &Jet) -> Result<f64, FiberError> {
        let r = self.residual(&self.offset(j)?);
        Ok(r.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    pub fn project(&self, j: &Jet) -> Result<Jet, FiberError> {
        let off = self.offset(j)?;
        let r = self.residual(&off);
        let z: Vec<f64> = j.to_scaled(self.scale).iter().zip(&r).map(|(a, b)| a - b).collect();
        Ok(Jet::from_scaled(self.base.base().to_vec(), &z, self.scale)?)
    }

    /// The jet `base + Σ c_k d_k`.
    pub fn point_at(&self, coeffs: &[f64]) -> Jet {
        let mut z = self.base_z();
        for (c, d) in coeffs.iter().zip(&self.directions) {
            for (zi, di) in z.iter_mut().zip(d) {
                *zi += c * di;
            }
        }
        Jet::from_scaled(self.base.base().to_vec(), &z, self.scale).expect("finite coefficients")
    }

    /// Orthonormal basis of `span(directions) ∩ m_x` (zero value component).
    pub(crate) fn ideal_part(directions: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
        let a: Vec<f64> = directions.iter().map(|d| d[0]).collect();
        let a2: f64 = a.iter().map(|v| v * v).sum();
        let cols: Vec<Vec<f64>> = if a2 <= RANK_RTOL * RANK_RTOL {
            directions.to_vec()
        } else {
            // D (I − a aᵀ/|a|²) spans the vectors of span(D) with zero value component.
            (0..directions.len())
                .map(|c| {
                    let mut v = vec![0.0; len];
                    for (k, d) in directions.iter().enumerate() {
                        let w = if k == c { 1.0 } else { 0.0 } - a[k] * a[c] / a2;
                        for (vi, di) in v.iter_mut().zip(d) {
                            *vi += w * di;
                        }
                    }
                    v
                })
                .collect()
        };
        let cols: Vec<Vec<f64>> = cols
            .into_iter()
            .map(|mut v| {
                v[0] = 0.0;
                v
            })
            .collect();
        orthonormalize(&cols, len)
    }
}

impl Fiber {
    pub fn is_empty(&self) -> bool {
        matches!(self, Fiber::Empty)
    }

    pub fn as_affine(&self) -> Option<&AffineFiber> {
        match self {
            Fiber::Affine(a) => Some(a),
            Fiber::Empty => None,
        }
    }

    /// Subspace dimension, `None` for the empty fiber.
    pub fn dim(&self) -> Option<usize> {
        self.as_affine().map(AffineFiber::dim)
    }

    pub fn contains(&self, j: &Jet, tol: f64) -> bool {
        match self {
            Fiber::Empty => false,
            Fiber::Affine(a) => a.distance(j).map(|d| d <= tol).unwrap_or(false),
        }
    }

    pub fn project(&self, j: &Jet) -> Result<Jet, FiberError> {
        match self {
            Fiber::Empty => Err(FiberError::Empty),
            Fiber::Affine(a) => a.project(j),
        }
    }

    pub fn is_glaeser(&self, tol: f64) -> bool {
        match self {
            Fiber::Empty => true,
            Fiber::Affine(a) => {
                is_orthonormal(&a.directions, tol)
                    && (a.is_whole_space() || a.directions.iter().all(|d| d[0].abs() <= tol))
            }
        }
    }
}

/// Same kind and dimension, mutual base containment and principal angles within `tol`.
pub fn fiber_equal(f1: &Fiber, f2: &Fiber, tol: f64) -> bool {
    match (f1, f2) {
        (Fiber::Empty, Fiber::Empty) => true,
        (Fiber::Affine(a), Fiber::Affine(b)) => {
            if a.dim() != b.dim() || a.base.dim() != b.base.dim() {
                return false;
            }
            let contained = |x: &AffineFiber, y: &AffineFiber| x.distance(&y.base).map(|d| d <= tol).unwrap_or(false);
            if !contained(a, b) || !contained(b, a) {
                return false;
            }
            if a.dim() == 0 {
                return true;
            }
            // sin of the largest principal angle = ‖(I − AAᵀ) B‖₂.
            let len = a.base.dim() + 1;
            let res: Vec<Vec<f64>> = b.directions.iter().map(|d| a.residual(d)).collect();
            let m = DMatrix::from_fn(len, res.len(), |r, c| res[c][r]);
            let sigma = m.singular_values().iter().cloned().fold(0.0, f64::max);
            sigma <= tol
        }
        _ => false,
    }
}

/// Initial nonnegative fiber with unit length scale.
pub fn gamma_initial(x: &[f64], fx: f64) -> Result<Fiber, FiberError> {
    gamma_initial_scaled(x, fx, 1.0)
}

/// `{P : P(x) = fx}` for `fx > 0`, the zero jet for `fx = 0`.
pub fn gamma_initial_scaled(x: &[f64], fx: f64, scale: f64) -> Result<Fiber, FiberError> {
    if fx < 0.0 || fx.is_nan() {
        return Err(FiberError::NegativeValue(fx));
    }
    let n = x.len();
    let base = Jet::constant(x.to_vec(), fx);
    let directions = if fx > 0.0 { gradient_directions(n) } else { Vec::new() };
    Ok(Fiber::Affine(AffineFiber::new(base, directions, scale)?))
}

/// `{P : P(x) = fx}` with no sign constraint.
pub fn classical_initial_scaled(x: &[f64], fx: f64, scale: f64) -> Result<Fiber, FiberError> {
    let base = Jet::constant(x.to_vec(), fx);
    Ok(Fiber::Affine(AffineFiber::new(base, gradient_directions(x.len()), scale)?))
}

fn gradient_directions(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let mut d = vec![0.0; n + 1];
            d[k + 1] = 1.0;
            d
        })
        .collect()
}

/// Fibers indexed like the sample set, plus the refinement round.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberField {
    pub fibers: Vec<Fiber>,
    pub round: usize,
    pub scale: f64,
}

#[derive(Serialize, Deserialize)]
struct FiberRecord {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    base: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    directions: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct FieldRecord {
    round: usize,
    scale: f64,
    fibers: Vec<FiberRecord>,
}

impl FiberField {
    /// `Γ_f` at every sample, with the sample length scale.
    pub fn gamma_initial(s: &SampleSet) -> Self {
        let scale = s.length_scale();
        let fibers = (0..s.len())
            .map(|i| gamma_initial_scaled(s.point(i), s.value(i), scale).expect("validated samples"))
            .collect();
        Self { fibers, round: 0, scale }
    }

    /// `H_f` at every sample, ignoring the sign of `f`.
    pub fn classical_initial(s: &SampleSet) -> Self {
        let scale = s.length_scale();
        let fibers = (0..s.len())
            .map(|i| classical_initial_scaled(s.point(i), s.value(i), scale).expect("validated samples"))
            .collect();
        Self { fibers, round: 0, scale }
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn equal(&self, other: &FiberField, tol: f64) -> bool {
        self.fibers.len() == other.fibers.len()
            && self.fibers.iter().zip(&other.fibers).all(|(a, b)| fiber_equal(a, b, tol))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let fibers = self
            .fibers
            .iter()
            .map(|f| match f {
                Fiber::Empty => FiberRecord { kind: "empty".into(), base: None, directions: None },
                Fiber::Affine(a) => {
                    let mut base = vec![a.base.value()];
                    base.extend_from_slice(a.base.gradient());
                    FiberRecord { kind: "affine".into(), base: Some(base), directions: Some(a.directions.clone()) }
                }
            })
            .collect();
        serde_json::to_value(FieldRecord { round: self.round, scale: self.scale, fibers }).expect("serializable")
    }

    pub fn from_json_value(value: serde_json::Value, s: &SampleSet) -> Result<Self, FiberError> {
        let rec: FieldRecord = serde_json::from_value(value).map_err(|e| FiberError::Malformed(e.to_string()))?;
        if rec.fibers.len() != s.len() {
            return Err(FiberError::Malformed(format!("{} fibers for {} samples", rec.fibers.len(), s.len())));
        }
        let mut fibers = Vec::with_capacity(rec.fibers.len());
        for (i, f) in rec.fibers.into_iter().enumerate() {
            let fiber = match f.kind.as_str() {
                "empty" => Fiber::Empty,
                "affine" => {
                    let base = f.base.ok_or_else(|| FiberError::Malformed(format!("fiber {i} lacks base")))?;
                    if base.len() != s.dim() + 1 {
                        return Err(FiberError::Malformed(format!("fiber {i} base has wrong length")));
                    }
                    let jet = Jet::new(s.point(i).to_vec(), base[0], base[1..].to_vec())?;
                    Fiber::Affine(AffineFiber::new(jet, f.directions.unwrap_or_default(), rec.scale)?)
                }
                other => return Err(FiberError::Malformed(format!("unknown fiber kind {other:?}"))),
            };
            fibers.push(fiber);
        }
        Ok(Self { fibers, round: rec.round, scale: rec.scale })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jet(base: &[f64], v: f64, g: &[f64]) -> Jet {
        Jet::new(base.to_vec(), v, g.to_vec()).unwrap()
    }

    #[test]
    fn gamma_initial_examples() {
        let f = gamma_initial(&[0.0], 2.0).unwrap();
        let a = f.as_affine().unwrap();
        assert_eq!(a.base(), &jet(&[0.0], 2.0, &[0.0]));
        assert_eq!(a.directions(), &[vec![0.0, 1.0]]);

        let f = gamma_initial(&[1.0, 1.0], 0.0).unwrap();
        assert_eq!(f.dim(), Some(0));
        assert_eq!(f.as_affine().unwrap().base(), &Jet::zero(vec![1.0, 1.0]));

        let f = gamma_initial(&[0.0, 0.0, 0.0], 5.0).unwrap();
        assert_eq!(f.dim(), Some(3));
        assert!(f.as_affine().unwrap().directions().iter().all(|d| d[0] == 0.0));
        assert!(f.is_glaeser(1e-12));

        assert!(matches!(gamma_initial(&[0.0], -1.0), Err(FiberError::NegativeValue(_))));
    }

    #[test]
    fn contains_examples() {
        let f = gamma_initial(&[0.0], 2.0).unwrap();
        assert!(f.contains(f.as_affine().unwrap().base(), 0.0));
        assert!(f.contains(&jet(&[0.0], 2.0, &[7.0]), 0.0));
        assert!(!f.contains(&jet(&[0.0], 3.0, &[0.0]), 1e-9));
        assert!((f.as_affine().unwrap().distance(&jet(&[0.0], 3.0, &[0.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!(!Fiber::Empty.contains(&jet(&[0.0], 0.0, &[0.0]), 1.0));
        assert!(!f.contains(&jet(&[1.0], 2.0, &[0.0]), 1.0));
    }

    #[test]
    fn project_examples() {
        let f = gamma_initial(&[0.0], 2.0).unwrap();
        let j = jet(&[0.0], 2.0, &[3.0]);
        assert_eq!(f.project(&j).unwrap(), j);
        assert_eq!(f.project(&jet(&[0.0], 5.0, &[4.0])).unwrap(), jet(&[0.0], 2.0, &[4.0]));
        let zero = gamma_initial(&[0.0], 0.0).unwrap();
        assert_eq!(zero.project(&jet(&[0.0], 5.0, &[4.0])).unwrap(), Jet::zero(vec![0.0]));
        assert!(matches!(Fiber::Empty.project(&j), Err(FiberError::Empty)));
    }

    #[test]
    fn glaeser_examples() {
        assert!(Fiber::Empty.is_glaeser(0.0));
        let line = AffineFiber::new(Jet::zero(vec![0.0]), vec![vec![1.0, 0.0]], 1.0).unwrap();
        assert!(!Fiber::Affine(line).is_glaeser(1e-8));
        let whole = AffineFiber::new(Jet::zero(vec![0.0]), vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        assert!(Fiber::Affine(whole).is_glaeser(1e-8));
    }

    #[test]
    fn equality_examples() {
        let f = gamma_initial(&[0.0, 0.0], 1.0).unwrap();
        assert!(fiber_equal(&f, &f, 1e-12));
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let rotated = AffineFiber::new(
            jet(&[0.0, 0.0], 1.0, &[3.0, -2.0]),
            vec![vec![0.0, c, c], vec![0.0, c, -c]],
            1.0,
        )
        .unwrap();
        assert!(fiber_equal(&f, &Fiber::Affine(rotated), 1e-12));
        let point = gamma_initial(&[0.0, 0.0], 0.0).unwrap();
        let line = AffineFiber::new(Jet::zero(vec![0.0, 0.0]), vec![vec![0.0, 1.0, 0.0]], 1.0).unwrap();
        assert!(!fiber_equal(&point, &Fiber::Affine(line), 1e-8));
        assert!(!fiber_equal(&point, &Fiber::Empty, 1e-8));
        assert!(fiber_equal(&Fiber::Empty, &Fiber::Empty, 0.0));
    }

    #[test]
    fn ideal_part_drops_value_direction() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = vec![vec![c, c, 0.0], vec![0.0, 0.0, 1.0]];
        let ideal = AffineFiber::ideal_part(&dirs, 3);
        assert_eq!(ideal.len(), 1);
        assert!((ideal[0][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_json_round_trip() {
        let s = SampleSet::parse_csv("0,0,1\n1,0,0\n0,1,2\n", 0.0).unwrap();
        let mut field = FiberField::gamma_initial(&s);
        field.fibers[1] = Fiber::Empty;
        field.round = 3;
        let v = field.to_json_value();
        let text = serde_json::to_string(&v).unwrap();
        let back = FiberField::from_json_value(serde_json::from_str(&text).unwrap(), &s).unwrap();
        assert_eq!(back, field);
    }

    fn arb_fiber() -> impl Strategy<Value = AffineFiber> {
        (
            prop::collection::vec(-3.0..3.0f64, 3),
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 0..3),
            any::<bool>(),
        )
            .prop_map(|(b, dirs, ideal)| {
                let base = Jet::new(vec![0.2, -0.4], b[0], b[1..].to_vec()).unwrap();
                let dirs: Vec<Vec<f64>> = if ideal {
                    dirs.into_iter().map(|mut d| { d[0] = 0.0; d }).collect()
                } else {
                    dirs
                };
                AffineFiber::new(base, dirs, 1.7).unwrap()
            })
    }

    proptest! {
        #[test]
        fn gamma_initial_is_glaeser(x in prop::collection::vec(-5.0..5.0f64, 1..4), fx in 0.0..10.0f64, zero in any::<bool>()) {
            let fx = if zero { 0.0 } else { fx };
            prop_assert!(gamma_initial(&x, fx).unwrap().is_glaeser(1e-12));
        }

        #[test]
        fn projection_laws(
            f in arb_fiber(),
            a in prop::collection::vec(-5.0..5.0f64, 3),
            b in prop::collection::vec(-5.0..5.0f64, 3),
        ) {
            let base = vec![0.2, -0.4];
            let j1 = Jet::new(base.clone(), a[0], a[1..].to_vec()).unwrap();
            let j2 = Jet::new(base.clone(), b[0], b[1..].to_vec()).unwrap();
            let p1 = f.project(&j1).unwrap();
            let p2 = f.project(&j2).unwrap();
            let fib = Fiber::Affine(f.clone());
            prop_assert!(fib.contains(&p1, 1e-10));
            let pp = f.project(&p1).unwrap();
            let dz = |x: &Jet, y: &Jet| {
                x.to_scaled(f.scale()).iter().zip(y.to_scaled(f.scale())).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
            };
            prop_assert!(dz(&pp, &p1) < 1e-10);
            prop_assert!(dz(&p1, &p2) <= dz(&j1, &j2) + 1e-10);
            if fib.contains(&j1, 0.0) {
                prop_assert!(dz(&p1, &j1) < 1e-10);
            }
        }

        #[test]
        fn ideal_closure(
            f in arb_fiber(),
            tau in prop::collection::vec(-5.0..5.0f64, 3),
        ) {
            let fib = Fiber::Affine(f.clone());
            prop_assume!(fib.is_glaeser(1e-10) && !f.is_whole_space());
            let base = f.base().base().to_vec();
            let t = Jet::new(base.clone(), tau[0], tau[1..].to_vec()).unwrap();
            for d in f.directions() {
                let phi = Jet::from_scaled(base.clone(), d, f.scale()).unwrap();
                let prod = phi.product(&t).unwrap();
                prop_assert!(prod.value().abs() < 1e-10);
                for e in f.directions() {
                    let psi = Jet::from_scaled(base.clone(), e, f.scale()).unwrap();
                    let pp = phi.product(&psi).unwrap();
                    prop_assert!(pp.value().abs() < 1e-12 && pp.gradient().iter().all(|g| g.abs() < 1e-12));
                }
            }
        }
    }
}
