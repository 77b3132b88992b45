use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::paths::RefinableBrownianPath;
use crate::special::{binomial_quantile, norm_cdf};

/// Default maximum dyadic depth.
pub const DEFAULT_J_MAX: u32 = 40;

/// `H_m`: the Bin(m, 1/2) quantile, with `H_0 = 0`.
pub fn binom_half_quantile(m: u64, u: f64) -> u64 {
    binomial_quantile(m, 0.5, u)
}

/// One dyadic cell `[index/2^level, (index+1)/2^level)` and its count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicNode {
    pub level: u32,
    pub index: u64,
    pub count: u64,
    /// No further split; points were placed inside the cell.
    pub terminal: bool,
}

/// The cell counts produced by one run of the construction.
#[derive(Clone, Debug, Default)]
pub struct DyadicCounts {
    pub n: u64,
    pub nodes: Vec<DyadicNode>,
}

impl DyadicCounts {
    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|c| c.level).max().unwrap_or(0)
    }

    /// Counts at `level`, in index order. Terminal cells above the level
    /// contribute their count to the leftmost descendant position.
    pub fn level_counts(&self, level: u32) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = self
            .nodes
            .iter()
            .filter(|c| c.level == level || (c.terminal && c.level < level))
            .map(|c| (c.index << (level - c.level), c.count))
            .collect();
        out.sort_unstable();
        out
    }

    /// Total count at `level`.
    pub fn level_sum(&self, level: u32) -> u64 {
        self.level_counts(level).iter().map(|c| c.1).sum()
    }

    /// Checks `Σ level = n` at every level and `N_{i0} + N_{i1} = N_i` at
    /// every split.
    pub fn check(&self) -> Result<()> {
        for j in 0..=self.depth() {
            let s = self.level_sum(j);
            if s != self.n {
                return Err(Error::Invariant(format!("level {j} holds {s} points, expected {}", self.n)));
            }
        }
        let find = |level: u32, index: u64| {
            self.nodes
                .iter()
                .find(|c| c.level == level && c.index == index)
                .map(|c| c.count)
        };
        for c in self.nodes.iter().filter(|c| !c.terminal) {
            let l = find(c.level + 1, 2 * c.index);
            let r = find(c.level + 1, 2 * c.index + 1);
            match (l, r) {
                (Some(l), Some(r)) if l + r == c.count => {}
                _ => {
                    return Err(Error::Invariant(format!(
                        "cell ({}, {}) does not split into its children",
                        c.level, c.index
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Output of [`uniforms_from_bridge`].
#[derive(Clone, Debug)]
pub struct BridgeUniforms {
    /// Order statistics `U_(1) <= … <= U_(n)`.
    pub sorted: Vec<f64>,
    /// `permutation[i]` is the rank of the `i`-th output.
    pub permutation: Vec<usize>,
    /// `values[i] = sorted[permutation[i]]`.
    pub values: Vec<f64>,
    pub counts: DyadicCounts,
    pub warnings: Vec<String>,
}

/// Builds `n` iid uniforms from a Brownian bridge by dyadic splitting.
///
/// A cell at level `j` with count `N` splits into `H_N(Φ(Z))` points on the
/// left and the rest on the right, where
/// `Z = 2^{j/2}(2B(mid) − B(left) − B(right))`. The root always splits;
/// deeper cells stop at count one or at depth `j_max`, and their points are
/// placed uniformly inside the cell using `aux`. The order statistics are
/// then shuffled with `aux`.
pub fn uniforms_from_bridge(
    n: u64,
    bridge: &mut RefinableBrownianPath,
    aux: &mut ChaCha8Rng,
    j_max: u32,
) -> Result<BridgeUniforms> {
    if !bridge.is_bridge() {
        return Err(Error::param("uniforms need a Brownian bridge driver"));
    }
    if j_max == 0 || j_max > 60 {
        return Err(Error::param(format!("maximum depth {j_max} outside 1..=60")));
    }
    let mut sorted = Vec::with_capacity(n as usize);
    let mut counts = DyadicCounts {
        n,
        nodes: Vec::new(),
    };
    let mut warnings = Vec::new();
    // depth-first, left child first, so placements come out in order
    let mut stack = vec![(0u32, 0u64, n)];
    while let Some((level, index, count)) = stack.pop() {
        let width = (-(level as f64)).exp2();
        let left = index as f64 * width;
        let split = count >= 2 || (level == 0 && count >= 1);
        if !split || level == j_max {
            if split {
                warnings.push(format!(
                    "cell ({level}, {index}) still holds {count} points at the depth limit"
                ));
            }
            counts.nodes.push(DyadicNode {
                level,
                index,
                count,
                terminal: true,
            });
            let start = sorted.len();
            for _ in 0..count {
                let u: f64 = aux.random();
                sorted.push(left + u * width);
            }
            sorted[start..].sort_by(f64::total_cmp);
            continue;
        }
        counts.nodes.push(DyadicNode {
            level,
            index,
            count,
            terminal: false,
        });
        let b_l = bridge.value(left)?;
        let b_m = bridge.value(left + 0.5 * width)?;
        let b_r = bridge.value(left + width)?;
        let z = (level as f64 * 0.5).exp2() * (2.0 * b_m - b_l - b_r);
        let n0 = binom_half_quantile(count, norm_cdf(z));
        stack.push((level + 1, 2 * index + 1, count - n0));
        stack.push((level + 1, 2 * index, n0));
    }
    let mut permutation: Vec<usize> = (0..sorted.len()).collect();
    permutation.shuffle(aux);
    let values = permutation.iter().map(|&r| sorted[r]).collect();
    Ok(BridgeUniforms {
        sorted,
        permutation,
        values,
        counts,
        warnings,
    })
}

/// `sup_{t∈[0,1]} |n·F_n(t) − n·t − √n·B(t)|`, i.e. `√n` times the sup
/// distance between the uniform empirical process and the bridge, with the
/// bridge interpolated linearly between its cached times.
pub fn empirical_bridge_distance(sorted: &[f64], bridge: &RefinableBrownianPath) -> f64 {
    let n = sorted.len() as f64;
    let rn = n.sqrt();
    let b = bridge.to_grid_path();
    // between bridge knots and sample points the difference is linear, so
    // both one-sided values at those points suffice
    let mut best = 0.0f64;
    let mut j = 0usize;
    for &t in b.knots() {
        while j < sorted.len() && sorted[j] < t {
            j += 1;
        }
        let below = j as f64;
        let mut k = j;
        while k < sorted.len() && sorted[k] <= t {
            k += 1;
        }
        let d_left = below - n * t - rn * b.eval(t);
        let d_right = k as f64 - n * t - rn * b.eval(t);
        best = best.max(d_left.abs()).max(d_right.abs());
    }
    for &x in sorted {
        let bx = rn * b.eval(x);
        let below = sorted.partition_point(|&y| y < x) as f64;
        let upto = sorted.partition_point(|&y| y <= x) as f64;
        best = best
            .max((below - n * x - bx).abs())
            .max((upto - n * x - bx).abs());
    }
    best
}
