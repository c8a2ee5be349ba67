//! Nonnegative local witnesses `F^x = χ(|y − x|/δ)·P(y)`.

use super::bump::{profile, profile_derivative};
use super::WhitneyError;
use crate::jet::{distance, Jet};

/// Relative guard added to `2|∇P|` in the witness radius.
pub const WITNESS_GUARD: f64 = 1e-12;

/// Nonnegative C¹ function with prescribed jet at its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalWitness {
    jet: Jet,
    /// Support radius; the cutoff equals 1 on `|y − x| ≤ 2δ/3`.
    delta: f64,
}

/// Witness for the jet `j` at `x` with `f(x) = fx`; `value_scale` sizes the guard.
pub fn local_witness(x: &[f64], fx: f64, j: &Jet, value_scale: f64) -> Result<LocalWitness, WhitneyError> {
    if j.base() != x {
        return Err(WhitneyError::Jet(crate::jet::JetError::BaseMismatch));
    }
    if fx == 0.0 {
        if j.value() != 0.0 || j.gradient().iter().any(|g| *g != 0.0) {
            return Err(WhitneyError::NonzeroJetAtZero { point: x.to_vec() });
        }
        return Ok(LocalWitness { jet: j.clone(), delta: 0.0 });
    }
    if !(fx > 0.0) || j.value() != fx {
        return Err(WhitneyError::ValueMismatch { point: x.to_vec(), value: fx, jet_value: j.value() });
    }
    let slope = j.gradient().iter().map(|g| g * g).sum::<f64>().sqrt();
    let delta = fx / (2.0 * slope + WITNESS_GUARD * value_scale.max(f64::MIN_POSITIVE));
    Ok(LocalWitness { jet: j.clone(), delta })
}

impl LocalWitness {
    pub fn jet(&self) -> &Jet {
        &self.jet
    }

    pub fn radius(&self) -> f64 {
        self.delta
    }

    pub fn is_zero(&self) -> bool {
        self.delta == 0.0
    }

    /// Value and gradient at `y`.
    pub fn eval(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let n = y.len();
        if self.is_zero() {
            return (0.0, vec![0.0; n]);
        }
        let r = distance(y, self.jet.base());
        let t = r / self.delta;
        let chi = profile(t);
        if chi == 0.0 {
            return (0.0, vec![0.0; n]);
        }
        let p = self.jet.eval_unchecked(y);
        let dchi = profile_derivative(t) / self.delta;
        let grad = (0..n)
            .map(|k| {
                let radial = if r > 0.0 { dchi * (y[k] - self.jet.base()[k]) / r } else { 0.0 };
                radial * p + chi * self.jet.gradient()[k]
            })
            .collect();
        (chi * p, grad)
    }

    /// `P ≥ 0` on the support, so the witness is nonnegative everywhere.
    pub fn nonnegative_by_construction(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let slope = self.jet.gradient().iter().map(|g| g * g).sum::<f64>().sqrt();
        self.jet.value() - slope * self.delta >= 0.0
    }
}
