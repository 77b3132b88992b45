use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::grid::GridPath;
use crate::error::{Error, Result};
use crate::rng::StreamId;

/// Largest dyadic depth `sample_bridge_dyadic` will materialize.
pub const MAX_DYADIC_LEVELS: u32 = 24;

/// A Brownian path sampled lazily.
///
/// Values are cached by time. A query between two cached times draws from
/// the Brownian-bridge law pinned at the neighbours; a query past the last
/// cached time draws a Gaussian increment. Bridges are pinned at 1 and
/// refuse queries beyond it.
///
/// The cache mutates on every new query, so a path belongs to one worker at
/// a time; call [`RefinableBrownianPath::to_grid_path`] to share it.
#[derive(Clone, Debug)]
pub struct RefinableBrownianPath {
    cache: BTreeMap<u64, f64>,
    scale: f64,
    end: Option<f64>,
    rng: ChaCha8Rng,
    id: StreamId,
}

fn key(t: f64) -> u64 {
    // non-negative floats order like their bit patterns
    (t + 0.0).to_bits()
}

fn time(k: u64) -> f64 {
    f64::from_bits(k)
}

impl RefinableBrownianPath {
    /// Standard Brownian motion with only `B(0) = 0` cached.
    pub fn new(id: StreamId) -> Self {
        let mut cache = BTreeMap::new();
        cache.insert(key(0.0), 0.0);
        Self {
            cache,
            scale: 1.0,
            end: None,
            rng: id.rng(),
            id,
        }
    }

    /// Standard Brownian bridge on `[0, 1]` with both endpoints cached at 0.
    pub fn bridge(id: StreamId) -> Self {
        let mut p = Self::new(id);
        p.cache.insert(key(1.0), 0.0);
        p.end = Some(1.0);
        p
    }

    /// Sets the variance rate.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::param(format!("variance rate must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn stream(&self) -> StreamId {
        self.id
    }

    pub fn is_bridge(&self) -> bool {
        self.end.is_some()
    }

    /// Number of cached times.
    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        time(*self.cache.keys().next_back().unwrap())
    }

    /// Cached value at `t`, without drawing.
    pub fn cached(&self, t: f64) -> Option<f64> {
        self.cache.get(&key(t)).copied()
    }

    /// Path value at `t`, drawing and caching it on first use.
    pub fn value(&mut self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("Brownian path queried at {t}")));
        }
        let k = key(t);
        if let Some(&v) = self.cache.get(&k) {
            return Ok(v);
        }
        let (&k0, &v0) = self.cache.range(..k).next_back().expect("origin is cached");
        let t0 = time(k0);
        let z: f64 = self.rng.sample(StandardNormal);
        let v = match self.cache.range(k..).next() {
            Some((&k1, &v1)) => {
                let t1 = time(k1);
                let w = (t - t0) / (t1 - t0);
                let var = self.scale * (t - t0) * (t1 - t) / (t1 - t0);
                v0 + w * (v1 - v0) + var.sqrt() * z
            }
            None => {
                if let Some(end) = self.end {
                    return Err(Error::Domain(format!("bridge pinned at {end} queried at {t}")));
                }
                v0 + (self.scale * (t - t0)).sqrt() * z
            }
        };
        self.cache.insert(k, v);
        Ok(v)
    }

    /// Cached times in increasing order.
    pub fn times(&self) -> Vec<f64> {
        self.cache.keys().map(|&k| time(k)).collect()
    }

    /// Linear interpolation of the cached values.
    pub fn to_grid_path(&self) -> GridPath {
        let (knots, values): (Vec<f64>, Vec<f64>) =
            self.cache.iter().map(|(&k, &v)| (time(k), v)).unzip();
        GridPath::linear(knots, values).expect("cache keys are strictly increasing")
    }

    /// Turns a Brownian motion observed on `[0, 1]` into the bridge
    /// `t ↦ B(t) − t·B(1)`.
    ///
    /// Further refinement stays exact: conditioned on its values at two
    /// times, a Brownian bridge has the same interpolating law as a
    /// Brownian motion.
    pub fn bridge_from_bm(bm: RefinableBrownianPath) -> Result<Self> {
        if bm.is_bridge() {
            return Err(Error::param("input is already a bridge"));
        }
        let b1 = bm
            .cached(1.0)
            .ok_or_else(|| Error::param("Brownian motion has no value cached at t = 1"))?;
        if bm.last_time() > 1.0 {
            return Err(Error::param(format!(
                "Brownian motion domain [0, {}] is not [0, 1]",
                bm.last_time()
            )));
        }
        let cache = bm
            .cache
            .iter()
            .map(|(&k, &v)| (k, v - time(k) * b1))
            .collect();
        Ok(Self {
            cache,
            scale: bm.scale,
            end: Some(1.0),
            rng: bm.rng,
            id: bm.id,
        })
    }
}

/// Brownian motion on `[0, horizon]` with `grid` equally spaced knots.
pub fn sample_bm(horizon: f64, grid: usize, id: StreamId) -> Result<RefinableBrownianPath> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::param(format!("horizon must be positive, got {horizon}")));
    }
    if grid < 2 {
        return Err(Error::param("initial grid needs at least two knots"));
    }
    let mut p = RefinableBrownianPath::new(id);
    for i in 1..grid {
        let t = if i + 1 == grid {
            horizon
        } else {
            horizon * i as f64 / (grid - 1) as f64
        };
        p.value(t)?;
    }
    Ok(p)
}

/// Brownian bridge at every `k / 2^levels`, built level by level through
/// midpoint conditioning.
pub fn sample_bridge_dyadic(levels: u32, id: StreamId) -> Result<GridPath> {
    if levels == 0 {
        return Err(Error::param("need at least one dyadic level"));
    }
    if levels > MAX_DYADIC_LEVELS {
        return Err(Error::Resource(format!(
            "2^{levels} dyadic points exceed the limit of 2^{MAX_DYADIC_LEVELS}"
        )));
    }
    let mut p = RefinableBrownianPath::bridge(id);
    for j in 1..=levels {
        let cells = 1u64 << (j - 1);
        let width = 1.0 / (1u64 << j) as f64;
        for k in 0..cells {
            p.value((2 * k + 1) as f64 * width)?;
        }
    }
    Ok(p.to_grid_path())
}

/// `t ↦ p(tau(t))` on the knots of `tau`, keeping `tau`'s interpolation.
/// Left limits of `tau` map to values of `p` at those limits.
pub fn time_change(p: &mut RefinableBrownianPath, tau: &GridPath) -> Result<GridPath> {
    let mut values = Vec::with_capacity(tau.len());
    let mut left = Vec::with_capacity(tau.len());
    for (&v, &l) in tau.values().iter().zip(tau.left_limits()) {
        if v < 0.0 || l < 0.0 {
            return Err(Error::Domain(format!("time change takes negative value {}", v.min(l))));
        }
        values.push(p.value(v)?);
        left.push(if l == v { *values.last().unwrap() } else { p.value(l)? });
    }
    let out = match tau.mode() {
        super::Interp::Step => GridPath::step(tau.knots().to_vec(), values),
        super::Interp::Linear => GridPath::linear_with_jumps(tau.knots().to_vec(), values, left),
    }?;
    out.with_domain_end(tau.domain_end())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Role;

    fn id(rep: u64) -> StreamId {
        StreamId::new(99, 1, rep, Role::Plain)
    }

    #[test]
    fn unit_grid_has_two_knots() {
        let p = sample_bm(1.0, 2, id(0)).unwrap();
        assert_eq!(p.times(), vec![0.0, 1.0]);
        assert_eq!(p.cached(0.0), Some(0.0));
    }

    #[test]
    fn repeated_queries_hit_the_cache() {
        let mut p = sample_bm(1.0, 2, id(1)).unwrap();
        let a = p.value(0.5).unwrap();
        let b = p.value(0.5).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn same_stream_same_path() {
        let mut a = sample_bm(2.0, 5, id(2)).unwrap();
        let mut b = sample_bm(2.0, 5, id(2)).unwrap();
        for t in [0.3, 1.7, 5.0, 0.01] {
            assert_eq!(a.value(t).unwrap().to_bits(), b.value(t).unwrap().to_bits());
        }
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        let mut p = RefinableBrownianPath::new(id(3));
        assert!(matches!(p.value(-0.1), Err(Error::Domain(_))));
        assert!(matches!(sample_bm(0.0, 3, id(3)), Err(Error::Parameter(_))));
    }

    #[test]
    fn bridge_endpoints_pinned() {
        let bm = sample_bm(1.0, 9, id(4)).unwrap();
        let mut br = RefinableBrownianPath::bridge_from_bm(bm).unwrap();
        assert_eq!(br.value(0.0).unwrap(), 0.0);
        assert_eq!(br.value(1.0).unwrap(), 0.0);
        assert!(matches!(br.value(1.5), Err(Error::Domain(_))));
        let long = sample_bm(2.0, 3, id(5)).unwrap();
        assert!(RefinableBrownianPath::bridge_from_bm(long).is_err());
    }

    #[test]
    fn dyadic_bridge_levels() {
        let g = sample_bridge_dyadic(1, id(6)).unwrap();
        assert_eq!(g.knots(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.values()[0], 0.0);
        assert_eq!(g.values()[2], 0.0);
        assert_eq!(sample_bridge_dyadic(5, id(6)).unwrap().len(), 33);
        assert!(matches!(sample_bridge_dyadic(40, id(6)), Err(Error::Resource(_))));
    }

    #[test]
    fn time_change_examples() {
        let mut p = sample_bm(1.0, 5, id(7)).unwrap();
        let zero = GridPath::step(vec![0.0, 1.0, 2.0], vec![0.0; 3]).unwrap();
        assert!(time_change(&mut p, &zero).unwrap().values().iter().all(|&v| v == 0.0));
        let knots = p.times();
        let ident = GridPath::linear(knots.clone(), knots.clone()).unwrap();
        let out = time_change(&mut p, &ident).unwrap();
        for (t, v) in knots.iter().zip(out.values()) {
            assert_eq!(p.cached(*t).unwrap(), *v);
        }
        let c = GridPath::step(vec![0.0, 1.0], vec![0.3, 0.3]).unwrap();
        let out = time_change(&mut p, &c).unwrap();
        assert_eq!(out.values()[0].to_bits(), out.values()[1].to_bits());
        let neg = GridPath::step(vec![0.0], vec![-1.0]).unwrap();
        assert!(matches!(time_change(&mut p, &neg), Err(Error::Domain(_))));
    }
}
