//! Static kd-tree over a point cloud with exact radius and nearest queries.

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
struct Node {
    lo: usize,
    hi: usize,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
    children: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

fn point_box_dist2(p: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((&x, &a), &b) in p.iter().zip(lo).zip(hi) {
        let d = if x < a {
            a - x
        } else if x > b {
            x - b
        } else {
            0.0
        };
        acc += d * d;
    }
    acc
}

fn box_box_dist2(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..alo.len() {
        let d = if ahi[k] < blo[k] {
            blo[k] - ahi[k]
        } else if bhi[k] < alo[k] {
            alo[k] - bhi[k]
        } else {
            0.0
        };
        acc += d * d;
    }
    acc
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KdTree {
    pub fn build(dim: usize, points: &[Vec<f64>]) -> Self {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            coords.extend_from_slice(p);
        }
        let mut tree = Self { dim, coords, perm: (0..points.len()).collect(), nodes: Vec::new() };
        if !points.is_empty() {
            tree.build_node(0, points.len());
        }
        tree
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build_node(&mut self, lo: usize, hi: usize) -> usize {
        let mut bbox_lo = vec![f64::INFINITY; self.dim];
        let mut bbox_hi = vec![f64::NEG_INFINITY; self.dim];
        for &i in &self.perm[lo..hi] {
            let p = &self.coords[i * self.dim..(i + 1) * self.dim];
            for k in 0..self.dim {
                bbox_lo[k] = bbox_lo[k].min(p[k]);
                bbox_hi[k] = bbox_hi[k].max(p[k]);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, bbox_lo: bbox_lo.clone(), bbox_hi: bbox_hi.clone(), children: None });
        if hi - lo <= LEAF_SIZE {
            return id;
        }
        let axis = (0..self.dim)
            .max_by(|&a, &b| (bbox_hi[a] - bbox_lo[a]).total_cmp(&(bbox_hi[b] - bbox_lo[b])))
            .unwrap_or(0);
        if bbox_hi[axis] <= bbox_lo[axis] {
            return id;
        }
        let mid = lo + (hi - lo) / 2;
        let (dim, coords) = (self.dim, &self.coords);
        self.perm[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            coords[a * dim + axis].total_cmp(&coords[b * dim + axis]).then(a.cmp(&b))
        });
        let left = self.build_node(lo, mid);
        let right = self.build_node(mid, hi);
        self.nodes[id].children = Some((left, right));
        id
    }

    /// Indices with `|p − center| < radius` (or `≤` when `closed`), ascending.
    pub fn within(&self, center: &[f64], radius: f64, closed: bool) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let r2 = radius * radius;
        let inside = |d2: f64| if closed { d2 <= r2 } else { d2 < r2 };
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !inside(point_box_dist2(center, &node.bbox_lo, &node.bbox_hi)) {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
                None => {
                    for &i in &self.perm[node.lo..node.hi] {
                        if inside(dist2(self.point(i), center)) {
                            out.push(i);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn best_by<P, B>(&self, exclude: Option<usize>, point_d2: P, bound_d2: B) -> Option<(usize, f64)>
    where
        P: Fn(&[f64]) -> f64,
        B: Fn(&Node) -> f64,
    {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![(0usize, bound_d2(&self.nodes[0]))];
        while let Some((id, bound)) = stack.pop() {
            if let Some((_, bd)) = best {
                if bound > bd {
                    continue;
                }
            }
            let node = &self.nodes[id];
            match node.children {
                Some((l, r)) => {
                    let bl = bound_d2(&self.nodes[l]);
                    let br = bound_d2(&self.nodes[r]);
                    if bl <= br {
                        stack.push((r, br));
                        stack.push((l, bl));
                    } else {
                        stack.push((l, bl));
                        stack.push((r, br));
                    }
                }
                None => {
                    for &i in &self.perm[node.lo..node.hi] {
                        if Some(i) == exclude {
                            continue;
                        }
                        let d2 = point_d2(self.point(i));
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d2 < bd || (d2 == bd && i < bi),
                        };
                        if better {
                            best = Some((i, d2));
                        }
                    }
                }
            }
        }
        best.map(|(i, d2)| (i, d2.sqrt()))
    }

    /// Nearest point to `center`; ties resolve to the lowest index.
    pub fn nearest(&self, center: &[f64], exclude: Option<usize>) -> Option<(usize, f64)> {
        self.best_by(exclude, |p| dist2(p, center), |n| point_box_dist2(center, &n.bbox_lo, &n.bbox_hi))
    }

    /// Nearest point to the closed box `[lo, hi]`; ties resolve to the lowest index.
    pub fn nearest_to_box(&self, lo: &[f64], hi: &[f64]) -> Option<(usize, f64)> {
        self.best_by(None, |p| point_box_dist2(p, lo, hi), |n| box_box_dist2(lo, hi, &n.bbox_lo, &n.bbox_hi))
    }
}

#[cfg(test)]
pub(crate) fn point_box_distance(p: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    point_box_dist2(p, lo, hi).sqrt()
}
