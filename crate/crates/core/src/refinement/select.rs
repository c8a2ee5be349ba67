//! Choice of one jet per fiber by a global convex least-squares problem.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::config::RefinementConfig;
use super::system::{deviation_system, Frame, Slot};
use crate::fibers::{gamma_initial_scaled, AffineFiber, Fiber, FiberField};
use crate::geometry::SampleSet;
use crate::jet::{distance, Jet};

/// Neighbors per point coupled in the selection objective.
const PAIR_CAP: usize = 16;
/// Largest parameter count solved with a dense factorization.
const DENSE_LIMIT: usize = 2500;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("fiber at sample {index} is empty; run the decision first")]
    EmptyFiber { index: usize },
    #[error("fiber field has {fibers} entries for {samples} samples")]
    Length { fibers: usize, samples: usize },
}

/// Undirected pairs `(i, j)`, `i < j`, where `j` is among the `cap` nearest
/// samples to `i` inside the finest populated schedule ball around `i`.
pub(crate) fn local_pairs(s: &SampleSet, radii: &[f64], cap: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..s.len() {
        let Some((_, nn)) = s.nearest_other(i) else { continue };
        let Some(&delta) = radii.iter().rev().find(|&&d| d > nn) else { continue };
        let mut nbrs = s.neighbors(s.point(i), delta);
        nbrs.sort_by(|&a, &b| {
            distance(s.point(a), s.point(i)).total_cmp(&distance(s.point(b), s.point(i))).then(a.cmp(&b))
        });
        for &j in nbrs.iter().take(cap) {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// One jet per sample from `field`, each inside its fiber, minimizing
/// inverse-distance weighted squared deviations over local pairs plus
/// `λ·|gradient|²` (normalized units).
pub fn select_jets(field: &FiberField, s: &SampleSet, cfg: &RefinementConfig) -> Result<Vec<Jet>, SelectError> {
    if field.len() != s.len() {
        return Err(SelectError::Length { fibers: field.len(), samples: s.len() });
    }
    let mut fibers = Vec::with_capacity(field.len());
    for (index, f) in field.fibers.iter().enumerate() {
        match f {
            Fiber::Empty => return Err(SelectError::EmptyFiber { index }),
            Fiber::Affine(a) => fibers.push(a.clone()),
        }
    }
    Ok(solve(&fibers, field.scale, s, cfg))
}

/// As [`select_jets`], with empty fibers replaced by the initial nonnegative fibers.
pub fn select_jets_forced(field: &FiberField, s: &SampleSet, cfg: &RefinementConfig) -> Vec<Jet> {
    let fibers: Vec<AffineFiber> = field
        .fibers
        .iter()
        .enumerate()
        .map(|(i, f)| match f {
            Fiber::Affine(a) => a.clone(),
            Fiber::Empty => match gamma_initial_scaled(s.point(i), s.value(i), field.scale) {
                Ok(Fiber::Affine(a)) => a,
                _ => unreachable!("validated samples give affine initial fibers"),
            },
        })
        .collect();
    solve(&fibers, field.scale, s, cfg)
}

fn solve(fibers: &[AffineFiber], scale: f64, s: &SampleSet, cfg: &RefinementConfig) -> Vec<Jet> {
    let frame = Frame { length: scale, value: s.value_scale() };
    let slots: Vec<Slot> = fibers.iter().map(|f| frame.fiber_slot(f)).collect();
    let mut offsets = Vec::with_capacity(slots.len());
    let mut p = 0;
    for sl in &slots {
        offsets.push(p);
        p += sl.dirs.len();
    }
    if p == 0 {
        return fibers.iter().map(|f| f.base().clone()).collect();
    }
    let radii = cfg.schedule(s).radii();
    let pairs = local_pairs(s, &radii, PAIR_CAP);

    // Normal equations N c = -b, assembled as dense blocks.
    let mut blocks: Vec<(usize, usize, DMatrix<f64>)> = Vec::new();
    let mut b = DVector::zeros(p);
    let mut diag = DVector::zeros(p);
    for &(i, j) in &pairs {
        let (di, dj) = (slots[i].dirs.len(), slots[j].dirs.len());
        if di + dj == 0 {
            continue;
        }
        let (a, r) = deviation_system(&[&slots[i], &slots[j]]);
        let w = 1.0 / distance(&slots[i].x, &slots[j].x);
        let ata = a.transpose() * &a * w;
        let atr = a.transpose() * &r * w;
        let idx = |k: usize| if k < di { offsets[i] + k } else { offsets[j] + k - di };
        for k in 0..di + dj {
            b[idx(k)] += atr[k];
            diag[idx(k)] += ata[(k, k)];
        }
        blocks.push((i, j, ata));
    }
    for (i, sl) in slots.iter().enumerate() {
        let mut e = vec![0.0; sl.base.len()];
        e[1..].copy_from_slice(&sl.base[1..]);
        for (k, d) in sl.dirs.iter().enumerate() {
            let dd: f64 = d.iter().map(|v| v * v).sum();
            let de: f64 = d.iter().zip(&e).map(|(x, y)| x * y).sum();
            diag[offsets[i] + k] += cfg.lambda * dd;
            b[offsets[i] + k] += cfg.lambda * de;
        }
    }
    let tikhonov = |out: &mut DMatrix<f64>| {
        for (i, sl) in slots.iter().enumerate() {
            for (k, dk) in sl.dirs.iter().enumerate() {
                for (l, dl) in sl.dirs.iter().enumerate() {
                    let v: f64 = dk.iter().zip(dl).map(|(x, y)| x * y).sum();
                    out[(offsets[i] + k, offsets[i] + l)] += cfg.lambda * v;
                }
            }
        }
    };
    let scatter = |out: &mut DMatrix<f64>| {
        for (i, j, ata) in &blocks {
            let di = slots[*i].dirs.len();
            let n = ata.nrows();
            let idx = |k: usize| if k < di { offsets[*i] + k } else { offsets[*j] + k - di };
            for r in 0..n {
                for c in 0..n {
                    out[(idx(r), idx(c))] += ata[(r, c)];
                }
            }
        }
    };
    let rhs = -b;
    let c = if p <= DENSE_LIMIT {
        let mut n = DMatrix::zeros(p, p);
        scatter(&mut n);
        tikhonov(&mut n);
        match n.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => n.svd(true, true).solve(&rhs, 1e-15).unwrap_or_else(|_| DVector::zeros(p)),
        }
    } else {
        conjugate_gradient(p, &rhs, &diag, |x, y| {
            y.fill(0.0);
            for (i, j, ata) in &blocks {
                let di = slots[*i].dirs.len();
                let idx = |k: usize| if k < di { offsets[*i] + k } else { offsets[*j] + k - di };
                for r in 0..ata.nrows() {
                    let mut acc = 0.0;
                    for cc in 0..ata.ncols() {
                        acc += ata[(r, cc)] * x[idx(cc)];
                    }
                    y[idx(r)] += acc;
                }
            }
            for (i, sl) in slots.iter().enumerate() {
                for (k, dk) in sl.dirs.iter().enumerate() {
                    let mut acc = 0.0;
                    for (l, dl) in sl.dirs.iter().enumerate() {
                        let v: f64 = dk.iter().zip(dl).map(|(a, b)| a * b).sum();
                        acc += v * x[offsets[i] + l];
                    }
                    y[offsets[i] + k] += cfg.lambda * acc;
                }
            }
        })
    };
    fibers
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let coeffs: Vec<f64> = (0..f.dim()).map(|k| c[offsets[i] + k]).collect();
            f.point_at(&coeffs)
        })
        .collect()
}

fn conjugate_gradient<F>(p: usize, rhs: &DVector<f64>, diag: &DVector<f64>, apply: F) -> DVector<f64>
where
    F: Fn(&DVector<f64>, &mut DVector<f64>),
{
    let precond = diag.map(|d| if d > 0.0 { 1.0 / d } else { 1.0 });
    let mut x = DVector::zeros(p);
    let mut r = rhs.clone();
    let mut z = r.component_mul(&precond);
    let mut dir = z.clone();
    let mut rz = r.dot(&z);
    let mut ad = DVector::zeros(p);
    let target = 1e-13 * rhs.norm();
    for _ in 0..20 * p {
        if r.norm() <= target {
            break;
        }
        apply(&dir, &mut ad);
        let alpha = rz / dir.dot(&ad);
        x.axpy(alpha, &dir, 1.0);
        r.axpy(-alpha, &ad, 1.0);
        z = r.component_mul(&precond);
        let rz_next = r.dot(&z);
        dir = &z + &dir * (rz_next / rz);
        rz = rz_next;
    }
    x
}
