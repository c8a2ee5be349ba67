//! Scenario generators shared by the integration tests.
#![allow(dead_code)]

use glaeser::geometry::SampleSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn samples(dim: usize, points: Vec<Vec<f64>>, values: Vec<f64>) -> SampleSet {
    SampleSet::new(dim, points, values, 1e-12).expect("valid scenario")
}

/// `{0} ∪ {1/k : 1 ≤ k ≤ K}` with `f(1/k) = c·k^{-power}` and `f(0) = 0`.
pub fn e_k(k_max: usize, power: i32, c: f64) -> SampleSet {
    let mut pts = vec![vec![0.0]];
    let mut vals = vec![0.0];
    for k in 1..=k_max {
        let x = 1.0 / k as f64;
        pts.push(vec![x]);
        vals.push(c * x.powi(power));
    }
    samples(1, pts, vals)
}

pub fn single_point(x: &[f64], f: f64) -> SampleSet {
    samples(x.len(), vec![x.to_vec()], vec![f])
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect()).collect()
}

/// Restriction of a positive affine function to random points of `[0,1]^dim`.
pub fn affine_positive(dim: usize, n: usize, seed: u64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = uniform(&mut rng, n, dim);
    let slope: Vec<f64> = (0..dim).map(|k| 0.5 - 0.3 * k as f64).collect();
    let vals = pts.iter().map(|p| 2.0 + p.iter().zip(&slope).map(|(x, a)| x * a).sum::<f64>()).collect();
    samples(dim, pts, vals)
}

/// `N` equally spaced points on the unit circle with `f ≡ 1`.
pub fn circle(n: usize) -> SampleSet {
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    samples(2, pts, vec![1.0; n])
}

/// `f(x) = 1 + x²` on `n` equally spaced points of `[0, 1]`.
pub fn dense_parabola(n: usize) -> SampleSet {
    let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
    let vals = pts.iter().map(|p| 1.0 + p[0] * p[0]).collect();
    samples(1, pts, vals)
}

/// `f ≡ 0` on a segment in the plane.
pub fn zero_segment(n: usize) -> SampleSet {
    let pts = (0..n).map(|i| vec![i as f64 / (n - 1) as f64, 0.5 * i as f64 / (n - 1) as f64]).collect();
    samples(2, pts, vec![0.0; n])
}

/// `f(x) = |x|²` on a jittered grid of `[-1,1]²` containing the origin.
pub fn paraboloid_with_zero(side: usize, seed: u64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![vec![0.0, 0.0]];
    let h = 2.0 / (side - 1) as f64;
    for i in 0..side {
        for j in 0..side {
            let x = -1.0 + h * i as f64 + rng.random_range(-0.2..0.2) * h;
            let y = -1.0 + h * j as f64 + rng.random_range(-0.2..0.2) * h;
            if x * x + y * y > 1e-6 {
                pts.push(vec![x, y]);
            }
        }
    }
    let vals = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
    samples(2, pts, vals)
}

/// Smooth positive data on random points of `[0,1]^dim`.
pub fn smooth_positive(dim: usize, n: usize, seed: u64, floor: f64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = uniform(&mut rng, n, dim);
    let phase: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..3.0)).collect();
    let vals = pts
        .iter()
        .map(|p| floor + 0.5 + 0.5 * p.iter().zip(&phase).map(|(x, a)| (2.0 * x + a).sin()).sum::<f64>() / dim as f64)
        .collect();
    samples(dim, pts, vals)
}

/// Random data with `min f ≥ floor`.
pub fn random_positive(dim: usize, n: usize, seed: u64, floor: f64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = uniform(&mut rng, n, dim);
    let vals = (0..n).map(|_| floor + rng.random_range(0.0..1.0)).collect();
    samples(dim, pts, vals)
}

/// Affine data on a grid-like point set in one dimension.
pub fn affine_line(n: usize) -> SampleSet {
    let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
    let vals = pts.iter().map(|p| 1.5 - p[0]).collect();
    samples(1, pts, vals)
}

/// Named scenarios with `n ∈ {1, 2, 3}`.
pub fn suite() -> Vec<(&'static str, SampleSet)> {
    vec![
        ("single_1d", single_point(&[0.0], 4.0)),
        ("ek50_slope", e_k(50, 1, 1.0)),
        ("ek50_quadratic", e_k(50, 2, 1.0)),
        ("ek200_quadratic", e_k(200, 2, 1.0)),
        ("parabola", dense_parabola(40)),
        ("affine_line", affine_line(30)),
        ("circle", circle(64)),
        ("affine_2d", affine_positive(2, 60, 1)),
        ("zero_segment", zero_segment(20)),
        ("paraboloid_zero", paraboloid_with_zero(9, 3)),
        ("smooth_2d", smooth_positive(2, 100, 4, 0.2)),
        ("single_3d", single_point(&[0.1, 0.2, 0.3], 1.0)),
        ("affine_3d", affine_positive(3, 60, 2)),
        ("smooth_3d", smooth_positive(3, 80, 5, 0.2)),
    ]
}
