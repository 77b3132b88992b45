#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsqueue::paths::GridPath;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Step path with `k` knots, positive spacing and values in `[-5, 5]`.
pub fn random_step_path(r: &mut ChaCha8Rng, k: usize) -> GridPath {
    let mut t = 0.0;
    let mut knots = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for _ in 0..k {
        knots.push(t);
        values.push(r.random_range(-5.0..5.0));
        t += r.random_range(0.01..1.0);
    }
    GridPath::step(knots, values).unwrap()
}

/// Kolmogorov-Smirnov distance of `samples` to `U[0,1]`.
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}
