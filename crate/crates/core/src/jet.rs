//! First-order jets: a value and a gradient anchored at a base point.
//!
//! A [`Jet`] is the degree-1 Taylor polynomial `P(y) = v + g·(y − x)` of a
//! C¹ function at `x`. Jets are stored anchored; [`Jet::reanchor`] moves the
//! anchor while keeping the polynomial.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("jet entries must be finite")]
    NonFinite,
    #[error("multi-index order {0} exceeds 1")]
    Order(u32),
    #[error("jets are anchored at different base points")]
    BaseMismatch,
}

/// A 1-jet `(base, value, gradient)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    base: Vec<f64>,
    value: f64,
    gradient: Vec<f64>,
}

/// Exponent vector of a partial derivative, restricted to order ≤ 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Result<Self, JetError> {
        let order: u32 = exponents.iter().sum();
        if order > 1 {
            return Err(JetError::Order(order));
        }
        Ok(Self(exponents))
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The first-order index `e_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), JetError> {
    if expected == got {
        Ok(())
    } else {
        Err(JetError::Dimension { expected, got })
    }
}

impl Jet {
    pub fn new(base: Vec<f64>, value: f64, gradient: Vec<f64>) -> Result<Self, JetError> {
        check_dim(base.len(), gradient.len())?;
        let finite = value.is_finite()
            && base.iter().all(|v| v.is_finite())
            && gradient.iter().all(|v| v.is_finite());
        if !finite {
            return Err(JetError::NonFinite);
        }
        Ok(Self { base, value, gradient })
    }

    /// The zero jet at `base`.
    pub fn zero(base: Vec<f64>) -> Self {
        let n = base.len();
        Self { base, value: 0.0, gradient: vec![0.0; n] }
    }

    /// The constant jet `c` at `base`.
    pub fn constant(base: Vec<f64>, c: f64) -> Self {
        let n = base.len();
        Self { base, value: c, gradient: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64, JetError> {
        check_dim(self.dim(), y.len())?;
        Ok(self.eval_unchecked(y))
    }

    pub(crate) fn eval_unchecked(&self, y: &[f64]) -> f64 {
        let mut acc = self.value;
        for ((g, yi), xi) in self.gradient.iter().zip(y).zip(&self.base) {
            acc += g * (yi - xi);
        }
        acc
    }

    /// `∂^α P` at the base point.
    pub fn derivative(&self, alpha: &MultiIndex) -> Result<f64, JetError> {
        check_dim(self.dim(), alpha.0.len())?;
        match alpha.0.iter().position(|&e| e == 1) {
            None => Ok(self.value),
            Some(i) => Ok(self.gradient[i]),
        }
    }

    /// Truncated product `J_x(PQ)` for jets sharing a base point.
    pub fn product(&self, other: &Jet) -> Result<Jet, JetError> {
        check_dim(self.dim(), other.dim())?;
        if self.base != other.base {
            return Err(JetError::BaseMismatch);
        }
        let gradient = self
            .gradient
            .iter()
            .zip(&other.gradient)
            .map(|(p, q)| self.value * q + other.value * p)
            .collect();
        Jet::new(self.base.clone(), self.value * other.value, gradient)
    }

    /// Same polynomial, anchored at `base`.
    pub fn reanchor(&self, base: &[f64]) -> Result<Jet, JetError> {
        check_dim(self.dim(), base.len())?;
        Jet::new(base.to_vec(), self.eval_unchecked(base), self.gradient.clone())
    }

    pub fn scale(&self, lambda: f64) -> Jet {
        Jet {
            base: self.base.clone(),
            value: lambda * self.value,
            gradient: self.gradient.iter().map(|g| lambda * g).collect(),
        }
    }

    /// Coordinates `(value, s·gradient)` in jet space with length scale `s`.
    pub fn to_scaled(&self, s: f64) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.dim() + 1);
        z.push(self.value);
        z.extend(self.gradient.iter().map(|g| g * s));
        z
    }

    /// Inverse of [`Jet::to_scaled`].
    pub fn from_scaled(base: Vec<f64>, z: &[f64], s: f64) -> Result<Jet, JetError> {
        check_dim(base.len() + 1, z.len())?;
        Jet::new(base, z[0], z[1..].iter().map(|v| v / s).collect())
    }
}

/// Symmetric Whitney deviation between `pi` (at its base) and `pj` (at its base).
///
/// `max(|ΔP(x_i)|/r, |ΔP(x_j)|/r, max_k |∂_k ΔP|)` with `ΔP = P_i − P_j` and
/// `r = |x_i − x_j|`. Coincident bases give 0 for equal jets and `+∞` otherwise.
pub fn whitney_deviation(pi: &Jet, pj: &Jet) -> Result<f64, JetError> {
    check_dim(pi.dim(), pj.dim())?;
    let r = distance(pi.base(), pj.base());
    if r == 0.0 {
        let same = pi.value == pj.value && pi.gradient == pj.gradient;
        return Ok(if same { 0.0 } else { f64::INFINITY });
    }
    let at_i = (pi.value - pj.eval_unchecked(pi.base())).abs() / r;
    let at_j = (pi.eval_unchecked(pj.base()) - pj.value).abs() / r;
    let grad = pi
        .gradient
        .iter()
        .zip(&pj.gradient)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(at_i.max(at_j).max(grad))
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jet(base: &[f64], v: f64, g: &[f64]) -> Jet {
        Jet::new(base.to_vec(), v, g.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let j = jet(&[0.0], 3.0, &[2.0]);
        assert_eq!(j.eval(&[0.0]).unwrap(), 3.0);
        assert_eq!(j.eval(&[1.0]).unwrap(), 5.0);
        let j = jet(&[1.0, 1.0], 0.0, &[1.0, -1.0]);
        assert_eq!(j.eval(&[2.0, 2.0]).unwrap(), 0.0);
        assert!(j.eval(&[1.0]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let j = jet(&[0.0], 3.0, &[2.0]);
        assert_eq!(j.derivative(&MultiIndex::zero(1)).unwrap(), 3.0);
        assert_eq!(j.derivative(&MultiIndex::unit(1, 0)).unwrap(), 2.0);
        let j = jet(&[0.0, 0.0], 1.0, &[4.0, 5.0]);
        assert_eq!(j.derivative(&MultiIndex::new(vec![0, 1]).unwrap()).unwrap(), 5.0);
        assert!(MultiIndex::new(vec![1, 1]).is_err());
        assert!(MultiIndex::new(vec![2]).is_err());
    }

    #[test]
    fn product_examples() {
        let p = jet(&[0.0], 1.5, &[-0.25]);
        let one = Jet::constant(vec![0.0], 1.0);
        assert_eq!(p.product(&one).unwrap(), p);
        let p = jet(&[0.0], 2.0, &[3.0]);
        let q = jet(&[0.0], 5.0, &[7.0]);
        assert_eq!(p.product(&q).unwrap(), jet(&[0.0], 10.0, &[29.0]));
        let y = jet(&[0.0], 0.0, &[1.0]);
        assert_eq!(y.product(&y).unwrap(), jet(&[0.0], 0.0, &[0.0]));
        let other = jet(&[1.0], 0.0, &[1.0]);
        assert_eq!(y.product(&other), Err(JetError::BaseMismatch));
    }

    #[test]
    fn deviation_examples() {
        let p = jet(&[0.0], 1.0, &[2.0]);
        let q = p.reanchor(&[0.7]).unwrap();
        assert!(whitney_deviation(&p, &q).unwrap() < 1e-15);

        let pi = jet(&[0.0], 0.0, &[1.0]);
        let pj = jet(&[1.0], 0.0, &[0.0]);
        assert_eq!(whitney_deviation(&pi, &pj).unwrap(), 1.0);

        for h in [0.1, 0.01, 0.001] {
            let pi = Jet::zero(vec![0.0]);
            let pj = Jet::constant(vec![h], h * h);
            let d = whitney_deviation(&pi, &pj).unwrap();
            assert!((d - h).abs() < 1e-15, "{d} vs {h}");
        }
    }

    #[test]
    fn coincident_points() {
        let p = jet(&[0.5], 1.0, &[2.0]);
        assert_eq!(whitney_deviation(&p, &p).unwrap(), 0.0);
        let q = jet(&[0.5], 1.0, &[2.5]);
        assert_eq!(whitney_deviation(&p, &q).unwrap(), f64::INFINITY);
    }

    #[test]
    fn scaled_round_trip() {
        let p = jet(&[1.0, 2.0], 3.0, &[4.0, -5.0]);
        let z = p.to_scaled(2.0);
        assert_eq!(z, vec![3.0, 8.0, -10.0]);
        assert_eq!(Jet::from_scaled(vec![1.0, 2.0], &z, 2.0).unwrap(), p);
    }

    #[test]
    fn rejects_bad_jets() {
        assert_eq!(Jet::new(vec![0.0], f64::NAN, vec![0.0]), Err(JetError::NonFinite));
        assert!(matches!(Jet::new(vec![0.0], 1.0, vec![]), Err(JetError::Dimension { .. })));
    }

    fn arb_jet(base: Vec<f64>) -> impl Strategy<Value = Jet> {
        let n = base.len();
        (-10.0..10.0f64, prop::collection::vec(-10.0..10.0f64, n))
            .prop_map(move |(v, g)| Jet::new(base.clone(), v, g).unwrap())
    }

    fn close(a: &Jet, b: &Jet) -> bool {
        (a.value - b.value).abs() <= 1e-12 * (1.0 + a.value.abs())
            && a.gradient.iter().zip(&b.gradient).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
    }

    proptest! {
        #[test]
        fn product_ring_laws(
            p in arb_jet(vec![0.3, -0.2]),
            q in arb_jet(vec![0.3, -0.2]),
            r in arb_jet(vec![0.3, -0.2]),
            a in -3.0..3.0f64,
        ) {
            let pq = p.product(&q).unwrap();
            prop_assert!(close(&pq, &q.product(&p).unwrap()));
            let left = pq.product(&r).unwrap();
            let right = p.product(&q.product(&r).unwrap()).unwrap();
            prop_assert!((left.value - right.value).abs() <= 1e-10 * (1.0 + left.value.abs()));
            for (x, y) in left.gradient.iter().zip(&right.gradient) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
            }
            let one = Jet::constant(p.base.clone(), 1.0);
            prop_assert!(close(&p.product(&one).unwrap(), &p));
            let ap = p.scale(a).product(&q).unwrap();
            prop_assert!(close(&ap, &pq.scale(a)));
        }

        #[test]
        fn deviation_seminorm(
            xi in prop::collection::vec(-1.0..1.0f64, 2),
            xj in prop::collection::vec(-1.0..1.0f64, 2),
            p in arb_jet(vec![0.0, 0.0]),
            q in arb_jet(vec![0.0, 0.0]),
            r in arb_jet(vec![0.0, 0.0]),
            lambda in -5.0..5.0f64,
        ) {
            prop_assume!(distance(&xi, &xj) > 1e-3);
            let pi = p.reanchor(&xi).unwrap();
            let rj = r.reanchor(&xj).unwrap();
            prop_assert_eq!(whitney_deviation(&pi, &p.reanchor(&xj).unwrap()).unwrap() < 1e-9, true);

            let d_pr = whitney_deviation(&pi, &rj).unwrap();
            let d_pq = whitney_deviation(&pi, &q.reanchor(&xj).unwrap()).unwrap();
            let d_qr = whitney_deviation(&q.reanchor(&xi).unwrap(), &rj).unwrap();
            prop_assert!(d_pr <= d_pq + d_qr + 1e-9 * (1.0 + d_pr));

            let scaled = whitney_deviation(&pi.scale(lambda), &rj.scale(lambda)).unwrap();
            prop_assert!((scaled - lambda.abs() * d_pr).abs() <= 1e-9 * (1.0 + d_pr));

            prop_assert_eq!(d_pr, whitney_deviation(&rj, &pi).unwrap());
        }
    }
}
