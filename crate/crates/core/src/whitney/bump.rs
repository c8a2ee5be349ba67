//! C¹ bump profile and the normalized partition of unity over a cover.

use super::cover::{CellKind, Decomposition, WhitneyCube};

/// Plateau end of the profile.
const PLATEAU: f64 = 2.0 / 3.0;

/// `q(t)`: 1 on `[0, 2/3]`, cubic smoothstep down to 0 on `[2/3, 1]`, 0 beyond.
pub fn profile(t: f64) -> f64 {
    if t <= PLATEAU {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let u = 3.0 * (t - PLATEAU);
        1.0 - u * u * (3.0 - 2.0 * u)
    }
}

/// `q′(t)`, with `|q′| ≤ 9/2`.
pub fn profile_derivative(t: f64) -> f64 {
    if t <= PLATEAU || t >= 1.0 {
        0.0
    } else {
        let u = 3.0 * (t - PLATEAU);
        -18.0 * u * (1.0 - u)
    }
}

/// Raw tensor bump `θ_Q(y) = Π q(|y_i − c_i| / (3/4·side))`, supported in `(3/2)Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpFunction {
    pub cube: WhitneyCube,
}

impl BumpFunction {
    /// Value and gradient of the raw bump.
    pub fn raw(&self, y: &[f64]) -> (f64, Vec<f64>) {
        raw_bump(&self.cube, y)
    }

    /// Bound on `|∇θ_Q|`: `6√n / side`.
    pub fn gradient_bound(&self) -> f64 {
        6.0 * (self.cube.center.len() as f64).sqrt() / self.cube.side
    }
}

pub(crate) fn raw_bump(q: &WhitneyCube, y: &[f64]) -> (f64, Vec<f64>) {
    let n = y.len();
    let reach = 0.75 * q.side;
    let mut vals = vec![0.0; n];
    let mut ders = vec![0.0; n];
    for i in 0..n {
        let d = y[i] - q.center[i];
        let t = d.abs() / reach;
        vals[i] = profile(t);
        ders[i] = profile_derivative(t) * d.signum() / reach;
    }
    let value: f64 = vals.iter().product();
    let grad = (0..n)
        .map(|i| {
            if ders[i] == 0.0 {
                return 0.0;
            }
            ders[i] * (0..n).filter(|&j| j != i).map(|j| vals[j]).product::<f64>()
        })
        .collect();
    (value, grad)
}

/// One bump per cube.
pub fn partition_of_unity(cubes: &[WhitneyCube]) -> Vec<BumpFunction> {
    cubes.iter().map(|c| BumpFunction { cube: c.clone() }).collect()
}

/// Normalized partition at one point: `(cube, φ_Q, ∇φ_Q)` for every cube whose
/// support contains the point.
#[derive(Clone, Debug, Default)]
pub struct PartitionAt {
    pub terms: Vec<(usize, f64, Vec<f64>)>,
}

impl PartitionAt {
    pub fn sum(&self) -> f64 {
        self.terms.iter().map(|t| t.1).sum()
    }

    pub fn gradient_sum(&self) -> Vec<f64> {
        let n = self.terms.first().map_or(0, |t| t.2.len());
        let mut g = vec![0.0; n];
        for (_, _, d) in &self.terms {
            for (a, b) in g.iter_mut().zip(d) {
                *a += b;
            }
        }
        g
    }
}

impl Decomposition {
    /// Normalized partition at `y`; `None` outside the root cube or inside the collar.
    pub fn partition_at(&self, y: &[f64]) -> Option<PartitionAt> {
        let leaf = self.locate(y)?;
        if self.cell(leaf).kind == CellKind::Collar {
            return None;
        }
        let mut active = Vec::new();
        self.active_at(y, &mut active);
        let raws: Vec<(usize, f64, Vec<f64>)> = active
            .into_iter()
            .map(|c| {
                let (v, g) = raw_bump(&self.cubes()[c], y);
                (c, v, g)
            })
            .filter(|t| t.1 > 0.0 || t.2.iter().any(|g| *g != 0.0))
            .collect();
        let total: f64 = raws.iter().map(|t| t.1).sum();
        let mut total_grad = vec![0.0; y.len()];
        for (_, _, g) in &raws {
            for (a, b) in total_grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        let terms = raws
            .into_iter()
            .map(|(c, v, g)| {
                let phi = v / total;
                let grad = g.iter().zip(&total_grad).map(|(gi, si)| gi / total - v * si / (total * total)).collect();
                (c, phi, grad)
            })
            .collect();
        Some(PartitionAt { terms })
    }

    /// `max_Q max(φ_Q, |∂_k φ_Q|·diam Q)` over the given points.
    pub fn measure_bump_constant(&self, points: &[Vec<f64>]) -> f64 {
        let mut c: f64 = 0.0;
        for y in points {
            if let Some(p) = self.partition_at(y) {
                for (q, phi, g) in &p.terms {
                    let diam = self.cubes()[*q].diam();
                    c = c.max(*phi);
                    for gk in g {
                        c = c.max(gk.abs() * diam);
                    }
                }
            }
        }
        c
    }
}
