use crate::dist::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::paths::RefinableBrownianPath;
use crate::special::{beta_quantile, binomial_quantile, gamma_quantile, hypergeometric_quantile, norm_cdf};

/// Increment laws whose dyadic conditionals are tractable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WalkFamily {
    Gaussian { mean: f64, sd: f64 },
    Bernoulli { p: f64 },
    Gamma { shape: f64, scale: f64 },
    /// Every increment equals `value`.
    Deterministic { value: f64 },
}

impl WalkFamily {
    pub fn from_spec(spec: &DistributionSpec) -> Result<Self> {
        match spec.family() {
            Family::Gaussian { mean, sd } => Ok(WalkFamily::Gaussian { mean: *mean, sd: *sd }),
            Family::Bernoulli { p } => Ok(WalkFamily::Bernoulli { p: *p }),
            Family::Gamma { shape, scale } => Ok(WalkFamily::Gamma {
                shape: *shape,
                scale: *scale,
            }),
            Family::Exponential { rate } => Ok(WalkFamily::Gamma {
                shape: 1.0,
                scale: 1.0 / rate,
            }),
            Family::Deterministic { value } => Ok(WalkFamily::Deterministic { value: *value }),
            other => Err(Error::Unsupported(format!(
                "no tractable dyadic conditional for {other:?}"
            ))),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            WalkFamily::Gaussian { mean, .. } => mean,
            WalkFamily::Bernoulli { p } => p,
            WalkFamily::Gamma { shape, scale } => shape * scale,
            WalkFamily::Deterministic { value } => value,
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            WalkFamily::Gaussian { sd, .. } => sd,
            WalkFamily::Bernoulli { p } => (p * (1.0 - p)).sqrt(),
            WalkFamily::Gamma { shape, scale } => shape.sqrt() * scale,
            WalkFamily::Deterministic { .. } => 0.0,
        }
    }
}

/// `F^{-1}(Φ(z))` for the sum of `m` increments, with the upper tail
/// handled through `Φ(−z)`.
fn block_sum(family: WalkFamily, m: u64, z: f64) -> f64 {
    let (p, q) = (norm_cdf(z), norm_cdf(-z));
    match family {
        WalkFamily::Bernoulli { p: prob } => binomial_quantile(m, prob, p) as f64,
        WalkFamily::Gamma { shape, scale } => scale * gamma_quantile(m as f64 * shape, p, q),
        WalkFamily::Gaussian { .. } | WalkFamily::Deterministic { .. } => unreachable!(),
    }
}

/// First-half sum of a block of `2h` increments with total `s`, at level
/// `Φ(z)` of its conditional law given the total.
fn split(family: WalkFamily, h: u64, s: f64, z: f64) -> f64 {
    let (p, q) = (norm_cdf(z), norm_cdf(-z));
    match family {
        WalkFamily::Bernoulli { .. } => {
            let succ = s.round() as u64;
            hypergeometric_quantile(2 * h, succ, h, p) as f64
        }
        WalkFamily::Gamma { shape, .. } => {
            let a = h as f64 * shape;
            s * beta_quantile(a, a, p, q)
        }
        WalkFamily::Gaussian { .. } | WalkFamily::Deterministic { .. } => unreachable!(),
    }
}

/// Builds `2^levels` iid increments from a Brownian motion.
///
/// With `B̃_k = B(k·unit)/√unit`, the whole block sum is the quantile
/// transform of `B̃_N/√N`. Each block of `2h` is then split by drawing the
/// first-half sum from its conditional law given the block sum, driven by
/// the standardized difference of the two half-block increments of `B̃`.
/// Gaussian increments are read off `B̃` directly.
///
/// The Brownian motion is queried at `k·unit` for `k = 1..=N` in increasing
/// order before anything else.
pub fn walk_from_bm(
    levels: u32,
    bm: &mut RefinableBrownianPath,
    family: WalkFamily,
    unit: f64,
) -> Result<Vec<f64>> {
    if levels > 40 {
        return Err(Error::Resource(format!("2^{levels} walk increments")));
    }
    if !(unit > 0.0) || !unit.is_finite() {
        return Err(Error::param(format!("walk time unit must be positive, got {unit}")));
    }
    if bm.is_bridge() {
        return Err(Error::param("walks need a Brownian motion driver, not a bridge"));
    }
    let n = 1u64 << levels;
    let scale = unit.sqrt().recip();
    let mut b = Vec::with_capacity(n as usize + 1);
    b.push(0.0);
    for k in 1..=n {
        b.push(bm.value(k as f64 * unit)? * scale);
    }
    match family {
        WalkFamily::Deterministic { value } => return Ok(vec![value; n as usize]),
        WalkFamily::Gaussian { mean, sd } => {
            return Ok(b.windows(2).map(|w| mean + sd * (w[1] - w[0])).collect());
        }
        WalkFamily::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
            return Err(Error::param(format!("Bernoulli parameter {p}")))
        }
        _ => {}
    }
    // partial sums at block boundaries, refined level by level
    let mut sums = vec![0.0; n as usize + 1];
    sums[n as usize] = block_sum(family, n, b[n as usize] / (n as f64).sqrt());
    let mut block = n;
    while block > 1 {
        let h = block / 2;
        let mut start = 0;
        while start < n {
            let (s0, s2) = (start as usize, (start + block) as usize);
            let total = sums[s2] - sums[s0];
            let mid = s0 + h as usize;
            let diff = (b[mid] - b[s0]) - (b[s2] - b[mid]);
            let first = split(family, h, total, diff / (block as f64).sqrt());
            sums[mid] = sums[s0] + first;
            start += block;
        }
        block = h;
    }
    Ok(sums.windows(2).map(|w| w[1] - w[0]).collect())
}
