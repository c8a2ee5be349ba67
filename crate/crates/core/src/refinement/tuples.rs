//! Choice of neighbor tuples per scale.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::SampleSet;
use crate::jet::distance;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator keyed by `(seed, point, level)` so results do not depend on scheduling.
pub(crate) fn level_rng(seed: u64, point: usize, level: usize) -> ChaCha8Rng {
    let key = splitmix(splitmix(splitmix(seed) ^ point as u64) ^ level as u64);
    ChaCha8Rng::seed_from_u64(key)
}

fn binomial_capped(m: usize, k: usize, cap: usize) -> usize {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(m - i) / (i + 1);
        if acc > cap {
            return cap + 1;
        }
    }
    acc
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Neighbors ordered by greedy farthest-point seeding from `center`, starting
/// with the nearest one.
fn farthest_point_order(s: &SampleSet, center: &[f64], nbrs: &[usize], len: usize) -> Vec<usize> {
    let mut gap: Vec<f64> = nbrs.iter().map(|&i| distance(s.point(i), center)).collect();
    let mut used = vec![false; nbrs.len()];
    let mut order = Vec::with_capacity(len);
    let first = (0..nbrs.len()).min_by(|&a, &b| gap[a].total_cmp(&gap[b]).then(a.cmp(&b)));
    let Some(mut pick) = first else { return order };
    while order.len() < len {
        used[pick] = true;
        order.push(nbrs[pick]);
        for (j, &i) in nbrs.iter().enumerate() {
            if !used[j] {
                gap[j] = gap[j].min(distance(s.point(i), s.point(nbrs[pick])));
            }
        }
        match (0..nbrs.len()).filter(|&j| !used[j]).max_by(|&a, &b| gap[a].total_cmp(&gap[b]).then(b.cmp(&a))) {
            Some(j) => pick = j,
            None => break,
        }
    }
    order
}

/// Tuples of size `min(k, |nbrs|)` drawn from `nbrs`: every combination when
/// there are at most `worst + random` of them, otherwise `worst` consecutive
/// windows of the farthest-point order plus `random` uniform draws.
pub(crate) fn sample_tuples(
    s: &SampleSet,
    center: &[f64],
    nbrs: &[usize],
    k: usize,
    worst: usize,
    random: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let m = nbrs.len();
    if m == 0 || k == 0 {
        return Vec::new();
    }
    let k = k.min(m);
    let budget = worst + random;
    if binomial_capped(m, k, budget) <= budget {
        return combinations(nbrs, k);
    }
    let order = farthest_point_order(s, center, nbrs, (worst + k - 1).min(m));
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(budget);
    let mut push = |mut t: Vec<usize>, out: &mut Vec<Vec<usize>>| {
        t.sort_unstable();
        if seen.insert(t.clone()) {
            out.push(t);
        }
    };
    for w in order.windows(k).take(worst) {
        push(w.to_vec(), &mut out);
    }
    for _ in 0..random {
        let pick = index::sample(rng, m, k);
        push(pick.iter().map(|i| nbrs[i]).collect(), &mut out);
    }
    out
}
