//! Whitney deviation terms as affine functions of fiber parameters, and the
//! exact min–max solver behind `infimum_deviation`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::fibers::{AffineFiber, Fiber};
use crate::jet::Jet;

/// Units used to make deviations dimensionless.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Frame {
    pub length: f64,
    pub value: f64,
}

/// A jet `ẑ = base + Σ c_k dirs_k` at a normalized point, in normalized
/// coordinates `ẑ = (value/V, gradient·L/V)`.
#[derive(Clone, Debug)]
pub(crate) struct Slot {
    pub x: Vec<f64>,
    pub base: Vec<f64>,
    pub dirs: Vec<Vec<f64>>,
}

impl Frame {
    pub const UNIT: Frame = Frame { length: 1.0, value: 1.0 };

    pub fn jet_slot(&self, j: &Jet) -> Slot {
        let x = j.base().iter().map(|v| v / self.length).collect();
        let mut base = vec![j.value() / self.value];
        base.extend(j.gradient().iter().map(|g| g * self.length / self.value));
        Slot { x, base, dirs: Vec::new() }
    }

    pub fn fiber_slot(&self, f: &AffineFiber) -> Slot {
        let mut slot = self.jet_slot(f.base());
        let gscale = self.length / (f.scale() * self.value);
        slot.dirs = f
            .directions()
            .iter()
            .map(|d| {
                let mut v = vec![d[0] / self.value];
                v.extend(d[1..].iter().map(|x| x * gscale));
                v
            })
            .collect();
        slot
    }
}

/// Stacked deviation terms `A c + r` over all slot pairs; slot `s` owns the
/// columns `offsets[s]..offsets[s] + dirs.len()`.
pub(crate) fn deviation_system(slots: &[&Slot]) -> (DMatrix<f64>, DVector<f64>) {
    let n = slots.first().map(|s| s.x.len()).unwrap_or(0);
    let mut offsets = Vec::with_capacity(slots.len());
    let mut cols = 0;
    for s in slots {
        offsets.push(cols);
        cols += s.dirs.len();
    }
    let pairs = slots.len() * slots.len().saturating_sub(1) / 2;
    let rows = pairs * (n + 2);
    let mut a = DMatrix::zeros(rows, cols);
    let mut r = DVector::zeros(rows);
    let mut row = 0;
    let mut ca = vec![0.0; n + 1];
    let mut cb = vec![0.0; n + 1];
    for ia in 0..slots.len() {
        for ib in ia + 1..slots.len() {
            let (sa, sb) = (slots[ia], slots[ib]);
            let u: Vec<f64> = sb.x.iter().zip(&sa.x).map(|(b, a)| b - a).collect();
            let dist = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            for term in 0..n + 2 {
                ca.iter_mut().for_each(|v| *v = 0.0);
                cb.iter_mut().for_each(|v| *v = 0.0);
                match term {
                    0 => {
                        ca[0] = 1.0 / dist;
                        cb[0] = -1.0 / dist;
                        for k in 0..n {
                            cb[k + 1] = u[k] / dist;
                        }
                    }
                    1 => {
                        ca[0] = 1.0 / dist;
                        cb[0] = -1.0 / dist;
                        for k in 0..n {
                            ca[k + 1] = u[k] / dist;
                        }
                    }
                    t => {
                        ca[t - 1] = 1.0;
                        cb[t - 1] = -1.0;
                    }
                }
                let dot = |c: &[f64], z: &[f64]| c.iter().zip(z).map(|(x, y)| x * y).sum::<f64>();
                r[row] = dot(&ca, &sa.base) + dot(&cb, &sb.base);
                for (k, d) in sa.dirs.iter().enumerate() {
                    a[(row, offsets[ia] + k)] = dot(&ca, d);
                }
                for (k, d) in sb.dirs.iter().enumerate() {
                    a[(row, offsets[ib] + k)] = dot(&cb, d);
                }
                row += 1;
            }
        }
    }
    (a, r)
}

/// Orthonormal basis of the column space of `a`.
fn range_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| smax > 0.0 && svd.singular_values[k] > 1e-12 * smax)
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

fn project_out(q: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    if q.ncols() == 0 {
        return m.clone();
    }
    m - q * (q.transpose() * m)
}

/// Deviation system of a tuple with the center slot's parameters separated:
/// terms are `a0 c0 + ar c + r`. The projected pair `(a0p, rp)` has the
/// neighbor parameters eliminated in least squares.
#[derive(Clone, Debug)]
pub(crate) struct TupleSystem {
    pub a0: DMatrix<f64>,
    pub ar: DMatrix<f64>,
    pub r: DVector<f64>,
    pub a0p: DMatrix<f64>,
    pub rp: DVector<f64>,
}

impl TupleSystem {
    pub fn new(center: &Slot, others: &[&Slot]) -> Self {
        let mut slots = vec![center];
        slots.extend_from_slice(others);
        let (a, r) = deviation_system(&slots);
        let d0 = center.dirs.len();
        let a0 = a.columns(0, d0).into_owned();
        let ar = a.columns(d0, a.ncols() - d0).into_owned();
        let q = range_basis(&ar);
        let a0p = project_out(&q, &a0);
        let rm = DMatrix::from_column_slice(r.len(), 1, r.as_slice());
        let rp = DVector::from_column_slice(project_out(&q, &rm).as_slice());
        Self { a0, ar, r, a0p, rp }
    }

    pub fn terms(&self) -> usize {
        self.r.len()
    }

    /// Quadratic form `H = a0pᵀ a0p` of the least-squares deviation in `c0`.
    pub fn form(&self) -> DMatrix<f64> {
        self.a0p.transpose() * &self.a0p
    }

    /// Linear part `g = a0pᵀ rp`.
    pub fn linear(&self) -> DVector<f64> {
        self.a0p.transpose() * &self.rp
    }

    /// Least-squares residual at `c0`, optimal over neighbor parameters.
    pub fn ls_residual(&self, c0: &DVector<f64>) -> DVector<f64> {
        if c0.is_empty() {
            self.rp.clone()
        } else {
            &self.a0p * c0 + &self.rp
        }
    }

    /// Exact `min_c max_i |(a0 c0 + ar c + r)_i|`.
    pub fn exact(&self, c0: &DVector<f64>) -> f64 {
        let b = if c0.is_empty() { self.r.clone() } else { &self.a0 * c0 + &self.r };
        min_max_with_ls(&self.ar, &b, &self.ls_residual(c0))
    }
}

/// `min_c ‖a c + b‖_∞`.
#[cfg(test)]
pub(crate) fn min_max(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let q = range_basis(a);
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let res = DVector::from_column_slice(project_out(&q, &bm).as_slice());
    min_max_with_ls(a, b, &res)
}

fn min_max_with_ls(a: &DMatrix<f64>, b: &DVector<f64>, ls_res: &DVector<f64>) -> f64 {
    if b.is_empty() {
        return 0.0;
    }
    let upper = ls_res.amax();
    if a.ncols() == 0 {
        return b.amax();
    }
    let lower = ls_res.norm() / (b.len() as f64).sqrt();
    if upper <= 1e-14 * (1.0 + b.amax()) || upper - lower <= 1e-15 * upper {
        return upper;
    }
    match solve_lp(a, b) {
        Some(v) => v.clamp(lower, upper),
        None => upper,
    }
}

fn solve_lp(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<f64> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..a.ncols()).map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t = p.add_var(1.0, (0.0, f64::INFINITY));
    for i in 0..a.nrows() {
        let w = a.row(i).amax().max(1.0);
        let mut expr: Vec<_> = vars
            .iter()
            .enumerate()
            .filter(|(j, _)| a[(i, *j)] != 0.0)
            .map(|(j, &v)| (v, a[(i, j)] / w))
            .collect();
        expr.push((t, -1.0 / w));
        p.add_constraint(expr.as_slice(), ComparisonOp::Le, -b[i] / w);
        if let Some(last) = expr.last_mut() {
            last.1 = 1.0 / w;
        }
        p.add_constraint(expr.as_slice(), ComparisonOp::Ge, -b[i] / w);
    }
    let sol = p.solve().ok()?;
    let v = sol.objective();
    v.is_finite().then_some(v.max(0.0))
}

/// Infimum over the tuple fibers of the largest pairwise Whitney deviation
/// among `p0` and one jet from each fiber. Empty fibers give `+∞`.
///
/// The value is exact up to LP tolerance and is in the units of
/// [`crate::jet::whitney_deviation`]. Tuple points must differ from the base of `p0`.
pub fn infimum_deviation(p0: &Jet, tuple: &[(&[f64], &Fiber)]) -> f64 {
    let center = Frame::UNIT.jet_slot(p0);
    let mut slots = Vec::with_capacity(tuple.len());
    for (x, f) in tuple {
        match f {
            Fiber::Empty => return f64::INFINITY,
            Fiber::Affine(a) => {
                debug_assert_eq!(a.base().base(), *x);
                slots.push(Frame::UNIT.fiber_slot(a));
            }
        }
    }
    let refs: Vec<&Slot> = slots.iter().collect();
    TupleSystem::new(&center, &refs).exact(&DVector::zeros(0))
}
