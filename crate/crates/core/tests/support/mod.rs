//! Independent oracles and fixtures for integration and acceptance tests.
//!
//! Nothing here calls into the matching, bounds or McNemar code paths it is
//! used to check.
#![allow(dead_code)]

use featbounds_core::Image;
use rand::Rng;

pub type Pt = (f64, f64);

fn dist(a: Pt, b: Pt) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Greedy rule re-executed literally: repeatedly take the globally closest
/// unused pair within `eps` (ties: lower ref index, then lower target index).
pub fn naive_greedy(refs: &[Pt], targets: &[Pt], eps: f64) -> usize {
    let mut ref_used = vec![false; refs.len()];
    let mut tgt_used = vec![false; targets.len()];
    let mut matched = 0;
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, &r) in refs.iter().enumerate() {
            if ref_used[i] {
                continue;
            }
            for (j, &t) in targets.iter().enumerate() {
                if tgt_used[j] {
                    continue;
                }
                let d = dist(r, t);
                if d > eps {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bd, bi, bj)) => d < bd || (d == bd && (i, j) < (bi, bj)),
                };
                if better {
                    best = Some((d, i, j));
                }
            }
        }
        match best {
            None => return matched,
            Some((_, i, j)) => {
                ref_used[i] = true;
                tgt_used[j] = true;
                matched += 1;
            }
        }
    }
}

/// Maximum-cardinality one-to-one matching by exhaustive search over
/// (reference index, used-target set), memoized.
pub fn max_bipartite(refs: &[Pt], targets: &[Pt], eps: f64) -> usize {
    assert!(targets.len() <= 16, "exhaustive oracle is for small instances");
    let n_masks = 1usize << targets.len();
    let mut memo = vec![vec![usize::MAX; n_masks]; refs.len() + 1];
    fn go(i: usize, mask: usize, refs: &[Pt], targets: &[Pt], eps: f64, memo: &mut Vec<Vec<usize>>) -> usize {
        if i == refs.len() {
            return 0;
        }
        if memo[i][mask] != usize::MAX {
            return memo[i][mask];
        }
        let mut best = go(i + 1, mask, refs, targets, eps, memo);
        for (j, &t) in targets.iter().enumerate() {
            if mask & (1 << j) == 0 && dist(refs[i], t) <= eps {
                best = best.max(1 + go(i + 1, mask | (1 << j), refs, targets, eps, memo));
            }
        }
        memo[i][mask] = best;
        best
    }
    go(0, 0, refs, targets, eps, &mut memo)
}

/// Every reference point has a unique nearest target within `eps`, and is
/// itself the unique nearest reference of that target.
pub fn mutual_nearest_unique(refs: &[Pt], targets: &[Pt], eps: f64) -> bool {
    let nearest = |p: Pt, set: &[Pt]| -> Option<usize> {
        let mut ds: Vec<(f64, usize)> = set.iter().enumerate().map(|(k, &q)| (dist(p, q), k)).collect();
        ds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        match ds.as_slice() {
            [] => None,
            [only] => Some(only.1),
            [a, b, ..] if a.0 < b.0 => Some(a.1),
            _ => None,
        }
    };
    refs.iter().all(|&r| match nearest(r, targets) {
        Some(j) if dist(r, targets[j]) <= eps => nearest(targets[j], refs).is_some_and(|i| refs[i] == r),
        _ => false,
    })
}

/// Two-tailed normal tail `2 (1 - Phi(z))` by composite Simpson integration
/// of the density over `[0, z]`.
pub fn two_tailed_p_by_quadrature(z: f64) -> f64 {
    let n = 20_000;
    let h = z / n as f64;
    let pdf = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(z);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pdf(k as f64 * h);
    }
    let half_mass = s * h / 3.0;
    2.0 * (0.5 - half_mass)
}

/// Random rectangles and discs over a mid-gray background.
pub fn textured_image(rng: &mut impl Rng, w: usize, h: usize) -> Image {
    let mut px = vec![rng.random_range(60u8..190); w * h];
    for _ in 0..(w * h / 600).max(8) {
        let v: u8 = rng.random();
        if rng.random_bool(0.6) {
            let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
            let (rw, rh) = (rng.random_range(4..w / 3), rng.random_range(4..h / 3));
            for y in y0..(y0 + rh).min(h) {
                for x in x0..(x0 + rw).min(w) {
                    px[y * w + x] = v;
                }
            }
        } else {
            let (cx, cy) = (rng.random_range(0..w) as f64, rng.random_range(0..h) as f64);
            let r = rng.random_range(3.0..(w.min(h) as f64 / 6.0));
            for y in 0..h {
                for x in 0..w {
                    if (x as f64 - cx).hypot(y as f64 - cy) <= r {
                        px[y * w + x] = v;
                    }
                }
            }
        }
    }
    Image::new(w, h, px).unwrap()
}

/// Random score rows in [0, 1].
pub fn random_rows(rng: &mut impl Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect()
}
