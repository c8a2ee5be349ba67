//! Dyadic Whitney decomposition of a root cube minus a finite set.

use serde::{Deserialize, Serialize};

use super::{DomainBox, WhitneyError};
use crate::geometry::KdTree;

/// A cube `Q` of the cover with `(1/4)·diam ≤ dist(Q, E) ≤ 4·diam`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub center: Vec<f64>,
    pub side: f64,
    pub generation: u32,
    /// Nearest sample to the closed cube (lowest index on ties); `None` when `E` is empty.
    pub rep_index: Option<usize>,
    pub dist_to_e: f64,
}

impl WhitneyCube {
    pub fn diam(&self) -> f64 {
        self.side * (self.center.len() as f64).sqrt()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.center.iter().map(|c| c - 0.5 * self.side).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.center.iter().map(|c| c + 0.5 * self.side).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum CellKind {
    Split { first: usize },
    Cube(usize),
    /// Touches `E` below the finest generation.
    Collar,
}

#[derive(Clone, Debug)]
pub(crate) struct Cell {
    pub side: f64,
    pub generation: u32,
    pub dist: f64,
    pub kind: CellKind,
}

/// The cube list with its dyadic tree and the truncated collar cells.
#[derive(Clone, Debug)]
pub struct Decomposition {
    dim: usize,
    root_lo: Vec<f64>,
    root_side: f64,
    max_generation: u32,
    lo: Vec<f64>,
    cells: Vec<Cell>,
    cubes: Vec<WhitneyCube>,
    collar: Vec<usize>,
    degenerate: bool,
}

/// Root cube of `box`: anchored at `box.lo` with the longest box side.
fn root_of(b: &DomainBox) -> (Vec<f64>, f64) {
    let side = b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    (b.lo.clone(), side)
}

impl Decomposition {
    /// Splits dyadically every cell with `dist < diam/4` up to `max_generation`.
    pub fn build(points: &[Vec<f64>], b: &DomainBox, max_generation: u32) -> Result<Self, WhitneyError> {
        let dim = b.dim();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim || !b.contains(p) {
                return Err(WhitneyError::OutsideBox { index });
            }
        }
        let tree = KdTree::build(dim, points);
        let (root_lo, root_side) = root_of(b);
        let mut dec = Decomposition {
            dim,
            root_lo: root_lo.clone(),
            root_side,
            max_generation,
            lo: root_lo,
            cells: Vec::new(),
            cubes: Vec::new(),
            collar: Vec::new(),
            degenerate: points.is_empty(),
        };
        dec.cells.push(Cell { side: root_side, generation: 0, dist: 0.0, kind: CellKind::Collar });
        let children = 1usize << dim;
        let sqrt_n = (dim as f64).sqrt();
        let mut id = 0;
        while id < dec.cells.len() {
            let (side, generation) = (dec.cells[id].side, dec.cells[id].generation);
            let lo = dec.cell_lo(id).to_vec();
            let hi: Vec<f64> = lo.iter().map(|l| l + side).collect();
            let nearest = tree.nearest_to_box(&lo, &hi);
            let dist = nearest.map_or(f64::INFINITY, |(_, d)| d);
            dec.cells[id].dist = dist;
            if dist >= 0.25 * side * sqrt_n {
                let center = lo.iter().map(|l| l + 0.5 * side).collect();
                let cube = WhitneyCube { center, side, generation, rep_index: nearest.map(|(i, _)| i), dist_to_e: dist };
                dec.cells[id].kind = CellKind::Cube(dec.cubes.len());
                dec.cubes.push(cube);
            } else if generation >= max_generation {
                dec.cells[id].kind = CellKind::Collar;
                dec.collar.push(id);
            } else {
                let first = dec.cells.len();
                let half = 0.5 * side;
                for c in 0..children {
                    for (k, l) in lo.iter().enumerate() {
                        dec.lo.push(if c >> k & 1 == 1 { l + half } else { *l });
                    }
                    dec.cells.push(Cell { side: half, generation: generation + 1, dist: 0.0, kind: CellKind::Collar });
                }
                dec.cells[id].kind = CellKind::Split { first };
            }
            id += 1;
        }
        Ok(dec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cubes(&self) -> &[WhitneyCube] {
        &self.cubes
    }

    pub fn collar_len(&self) -> usize {
        self.collar.len()
    }

    /// Side of the finest generation; the collar lies within this distance of `E`.
    pub fn finest_side(&self) -> f64 {
        self.root_side / f64::powi(2.0, self.max_generation as i32)
    }

    /// `E` was empty: the root cube is emitted alone and the ratio bounds are waived.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn root(&self) -> (&[f64], f64) {
        (&self.root_lo, self.root_side)
    }

    pub(crate) fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub(crate) fn cell_lo(&self, id: usize) -> &[f64] {
        &self.lo[id * self.dim..(id + 1) * self.dim]
    }

    pub(crate) fn collar_cells(&self) -> &[usize] {
        &self.collar
    }

    pub fn in_root(&self, y: &[f64]) -> bool {
        y.iter().zip(&self.root_lo).all(|(v, l)| *v >= *l && *v <= l + self.root_side)
    }

    /// Leaf cell containing `y`; points on a shared face go to the upper cell.
    pub(crate) fn locate(&self, y: &[f64]) -> Option<usize> {
        if !self.in_root(y) {
            return None;
        }
        let mut id = 0;
        while let CellKind::Split { first } = self.cells[id].kind {
            let half = 0.5 * self.cells[id].side;
            let lo = self.cell_lo(id);
            let mut child = 0;
            for k in 0..self.dim {
                if y[k] >= lo[k] + half {
                    child |= 1 << k;
                }
            }
            id = first + child;
        }
        Some(id)
    }

    /// Cubes whose open support `(3/2)Q` meets the closed box `[lo, hi]`.
    pub(crate) fn active_for_box(&self, lo: &[f64], hi: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let cell = &self.cells[id];
            let margin = 0.25 * cell.side;
            let clo = self.cell_lo(id);
            let meets = (0..self.dim).all(|k| clo[k] - margin < hi[k] && lo[k] < clo[k] + cell.side + margin);
            if !meets {
                continue;
            }
            match cell.kind {
                CellKind::Split { first } => stack.extend(first..first + (1 << self.dim)),
                CellKind::Cube(c) => out.push(c),
                CellKind::Collar => {}
            }
        }
        out.sort_unstable();
    }

    /// Cubes whose open support `(3/2)Q` contains `y`.
    pub(crate) fn active_at(&self, y: &[f64], out: &mut Vec<usize>) {
        self.active_for_box(y, y, out);
    }

    /// Cubes as JSON `[{center, side, rep_index}, ...]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.cubes
                .iter()
                .map(|c| serde_json::json!({ "center": c.center, "side": c.side, "rep_index": c.rep_index }))
                .collect(),
        )
    }
}

/// Whitney cubes of `box` minus the sample points.
pub fn whitney_decompose(
    s: &crate::geometry::SampleSet,
    b: &DomainBox,
    max_generation: u32,
) -> Result<Vec<WhitneyCube>, WhitneyError> {
    Ok(Decomposition::build(s.points(), b, max_generation)?.cubes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_box_distance;

    fn ratio_ok(dec: &Decomposition, points: &[Vec<f64>]) {
        for q in dec.cubes() {
            let d = points.iter().map(|p| point_box_distance(p, &q.lo(), &q.hi())).fold(f64::INFINITY, f64::min);
            assert_eq!(d, q.dist_to_e);
            assert!(0.25 * q.diam() <= d && d <= 4.0 * q.diam(), "{q:?}");
            let rep = q.rep_index.unwrap();
            assert_eq!(point_box_distance(&points[rep], &q.lo(), &q.hi()), d);
        }
    }

    #[test]
    fn single_point_accumulates_geometrically() {
        let pts = vec![vec![0.0]];
        let b = DomainBox::new(vec![-1.0], vec![1.0]).unwrap();
        let dec = Decomposition::build(&pts, &b, 12).unwrap();
        ratio_ok(&dec, &pts);
        let mut sides: Vec<f64> = dec.cubes().iter().filter(|q| q.center[0] > 0.0).map(|q| q.side).collect();
        sides.sort_by(f64::total_cmp);
        sides.dedup();
        assert!(sides.len() >= 10);
        for w in sides.windows(2) {
            assert_eq!(w[1], 2.0 * w[0]);
        }
        assert!(dec.collar_len() > 0);
    }

    #[test]
    fn two_points_shrink_toward_both() {
        let pts = vec![vec![0.0], vec![1.0]];
        let b = DomainBox::new(vec![-1.0], vec![3.0]).unwrap();
        let dec = Decomposition::build(&pts, &b, 14).unwrap();
        ratio_ok(&dec, &pts);
        let mid = dec.cubes().iter().filter(|q| (q.center[0] - 0.5).abs() < 0.25).map(|q| q.side).fold(0.0, f64::max);
        let near = dec.cubes().iter().filter(|q| q.center[0] > 0.0 && q.center[0] < 0.01).map(|q| q.side).fold(0.0, f64::max);
        assert!(mid > 10.0 * near);
    }

    #[test]
    fn empty_set_is_one_cube() {
        let b = DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let dec = Decomposition::build(&[], &b, 10).unwrap();
        assert!(dec.is_degenerate());
        assert_eq!(dec.cubes().len(), 1);
        assert_eq!(dec.cubes()[0].rep_index, None);
    }

    #[test]
    fn planar_cover_tiles_the_root() {
        let pts = vec![vec![0.2, 0.3], vec![0.7, 0.6], vec![0.71, 0.6]];
        let b = DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let dec = Decomposition::build(&pts, &b, 10).unwrap();
        ratio_ok(&dec, &pts);
        let cube_area: f64 = dec.cubes().iter().map(|q| q.side * q.side).sum();
        let collar_area: f64 = dec.collar_cells().iter().map(|&c| dec.cell(c).side.powi(2)).sum();
        assert!((cube_area + collar_area - 1.0).abs() < 1e-12);
        let mut act = Vec::new();
        dec.active_at(&[0.5, 0.5], &mut act);
        let leaf = dec.locate(&[0.5, 0.5]).unwrap();
        let CellKind::Cube(c) = dec.cell(leaf).kind else { panic!("collar at a far point") };
        assert!(act.contains(&c));
    }

    #[test]
    fn samples_outside_are_rejected() {
        let b = DomainBox::new(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(Decomposition::build(&[vec![2.0]], &b, 5), Err(WhitneyError::OutsideBox { index: 0 })));
    }
}
