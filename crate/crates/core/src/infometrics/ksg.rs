//! Kraskov-Stoegbauer-Grassberger mutual information, first variant.

use std::collections::BinaryHeap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::digamma::digamma_unchecked;
use crate::error::{Error, Result};

/// Mutual information estimate in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Estimate clipped at zero.
    pub value: f64,
    /// Estimate before clipping; may be slightly negative.
    pub raw: f64,
    pub k: usize,
    pub n: usize,
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Chebyshev distance to the `k`-th nearest neighbour of every point.
///
/// Points are scanned outward in x order from each query; a direction stops
/// once the x gap alone reaches the current k-th best distance.
fn kth_neighbour_distances(x: &[f64], y: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut eps = vec![0.0; n];
    let mut heap: BinaryHeap<Dist> = BinaryHeap::with_capacity(k + 1);
    for (rank, &i) in order.iter().enumerate() {
        heap.clear();
        let (xi, yi) = (x[i], y[i]);
        let mut left = rank;
        let mut right = rank + 1;
        loop {
            let bound = if heap.len() == k {
                heap.peek().map_or(f64::INFINITY, |d| d.0)
            } else {
                f64::INFINITY
            };
            let dl = (left > 0).then(|| xi - x[order[left - 1]]).filter(|&d| d < bound);
            let dr = (right < n).then(|| x[order[right]] - xi).filter(|&d| d < bound);
            let j = match (dl, dr) {
                (None, None) => break,
                (Some(a), Some(b)) if a <= b => {
                    left -= 1;
                    order[left]
                }
                (Some(_), None) => {
                    left -= 1;
                    order[left]
                }
                _ => {
                    right += 1;
                    order[right - 1]
                }
            };
            let d = (x[j] - xi).abs().max((y[j] - yi).abs());
            if heap.len() < k {
                heap.push(Dist(d));
            } else if d < bound {
                heap.pop();
                heap.push(Dist(d));
            }
        }
        eps[i] = heap.peek().map_or(0.0, |d| d.0);
    }
    eps
}

/// Number of other points whose coordinate lies strictly within `eps` of `v`.
fn count_within(sorted: &[f64], v: f64, eps: f64) -> usize {
    if eps <= 0.0 {
        return 0;
    }
    let lo = sorted.partition_point(|&s| s < v && v - s >= eps);
    let hi = sorted.partition_point(|&s| s <= v || s - v < eps);
    hi - lo - 1
}

/// KSG estimator with max-norm joint neighbourhoods and strict marginal counts:
/// `psi(k) + psi(n) - mean(psi(n_x + 1) + psi(n_y + 1))`.
pub fn ksg_mi(x: &[f64], y: &[f64], k: usize) -> Result<MiEstimate> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("x has {} samples, y has {}", x.len(), y.len())));
    }
    let n = x.len();
    if k == 0 || n <= k {
        return Err(Error::InsufficientSamples { k, n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Data(
            "mutual information input contains NaN or infinite values".into(),
        ));
    }
    let eps = kth_neighbour_distances(x, y, k);
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    for i in 0..n {
        let nx = count_within(&xs, x[i], eps[i]);
        let ny = count_within(&ys, y[i], eps[i]);
        acc += digamma_unchecked(nx as f64 + 1.0) + digamma_unchecked(ny as f64 + 1.0);
    }
    let raw = digamma_unchecked(k as f64) + digamma_unchecked(n as f64) - acc / n as f64;
    Ok(MiEstimate {
        value: raw.max(0.0),
        raw,
        k,
        n,
    })
}

/// Adds uniform noise of amplitude `1e-10 * range` to break exact ties.
pub fn jitter(values: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    let amp = 1e-10 * range;
    values.iter().map(|&v| v + amp * rng.gen_range(-1.0..1.0)).collect()
}

/// SplitMix64 finalizer used to derive independent seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// [`ksg_mi`] after jittering both inputs with a generator seeded from `seed`.
pub fn ksg_mi_jittered(x: &[f64], y: &[f64], k: usize, seed: u64) -> Result<MiEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xj = jitter(x, &mut rng);
    let yj = jitter(y, &mut rng);
    ksg_mi(&xj, &yj, k)
}
