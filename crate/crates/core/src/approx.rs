//! Approximating diffusions built from the drivers of a coupled sample.
//!
//! With `G` the limiting arrival law, `B^br` the bridge, `B̂` the dropout
//! Brownian motion and `B` the service Brownian motion:
//!
//! * `H_n(t) = np(G(t) + r_n) + √n (p B^br(G(t)) + √(p(1−p)) B̂(G(t)))`
//! * `R_n(t) = √n σ B(pG(t)) + μ H_n(t)`
//! * `Ẽ_n(t) = p(G(t) + r_n) − c_n t/(nμ)`, `E_n(t) = c_n t/(nμ) + inf_{s≤t} Ẽ_n(s)`
//! * `X_n(t) = H_n(t) − c_n t/μ + √n (σ/μ) B(E_n(t))`
//! * `Ŷ_n(t) = H_n(t)/√n − c_n t/(√n μ) + (σ/μ) B(E_n(t))`
//!
//! `r_n` is zero for a fixed arrival law. Every process is a [`GridPath`]
//! sampled on a shared grid and interpolated linearly in between.

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::kmt::{Branch, CoupledSample};
use crate::paths::{reflect, running_infimum, time_change, GridPath, RefinableBrownianPath};
use crate::queue::{QueueInputs, QueueTrace};
use crate::rng::StreamId;

/// Default number of δ-grid divisions of the horizon.
pub const DEFAULT_DIVISIONS: usize = 4096;

/// Parameters the approximants depend on.
#[derive(Clone, Copy, Debug)]
pub struct ApproxParams {
    pub n: usize,
    pub p: f64,
    pub mu: f64,
    pub sigma: f64,
    pub c_n: f64,
    pub r_n: f64,
}

impl ApproxParams {
    pub fn from_inputs(inputs: &QueueInputs, r_n: f64) -> Self {
        Self {
            n: inputs.n,
            p: inputs.p,
            mu: inputs.service.mean(),
            sigma: inputs.service.sd(),
            c_n: inputs.c_n,
            r_n,
        }
    }

    fn sqrt_n(&self) -> f64 {
        (self.n as f64).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct ApproximantSet {
    pub grid: Vec<f64>,
    pub h: GridPath,
    pub h_hat: GridPath,
    pub r: GridPath,
    pub r_hat: GridPath,
    pub e: GridPath,
    pub e_tilde: GridPath,
    pub x: GridPath,
    pub y_hat: GridPath,
    pub branch: Branch,
    /// Streams of the bridge, `B̂` and `B` that were consumed.
    pub streams: [StreamId; 3],
}

/// Event times of the trace together with a uniform grid of `divisions`
/// steps over `[0, horizon]`.
pub fn shared_grid(trace: &QueueTrace, divisions: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(divisions + 1 + trace.queue.len());
    for k in 0..=divisions {
        g.push(trace.horizon * k as f64 / divisions as f64);
    }
    g.extend_from_slice(trace.queue.knots());
    g.extend_from_slice(trace.arrivals.knots());
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn grid_path(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<GridPath> {
    GridPath::linear(grid.to_vec(), grid.iter().map(|&t| f(t)).collect())
}

/// `H_n` on `grid`.
pub fn build_h(
    bridge: &mut RefinableBrownianPath,
    dropout_bm: &mut RefinableBrownianPath,
    g: &DistributionSpec,
    prm: &ApproxParams,
    grid: &[f64],
) -> Result<GridPath> {
    let tau = grid_path(grid, |t| g.cdf(t))?;
    let br = time_change(bridge, &tau)?;
    let np = prm.n as f64 * prm.p;
    let drift = tau.map_values(|u| np * (u + prm.r_n));
    let mut h = GridPath::combine(&drift, &br, 1.0, prm.sqrt_n() * prm.p);
    let k = (prm.p * (1.0 - prm.p)).sqrt();
    if k > 0.0 {
        let bh = time_change(dropout_bm, &tau)?;
        h = GridPath::combine(&h, &bh, 1.0, prm.sqrt_n() * k);
    }
    Ok(h)
}

/// `R_n = √n σ B(pG) + μ H_n` on the knots of `h`.
pub fn build_r(
    h: &GridPath,
    service_bm: &mut RefinableBrownianPath,
    g: &DistributionSpec,
    prm: &ApproxParams,
) -> Result<GridPath> {
    let scaled = h.scale(prm.mu);
    if prm.sigma == 0.0 {
        return Ok(scaled);
    }
    let tau = grid_path(h.knots(), |t| prm.p * g.cdf(t))?;
    let b = time_change(service_bm, &tau)?;
    Ok(GridPath::combine(&scaled, &b, 1.0, prm.sqrt_n() * prm.sigma))
}

/// `(E_n, Ẽ_n)` on `grid`.
///
/// The infimum over `s <= t` includes `s = t`, so `E_n(0) = Ẽ_n(0) + 0`.
pub fn build_e(g: &DistributionSpec, prm: &ApproxParams, grid: &[f64]) -> Result<(GridPath, GridPath)> {
    let rate = prm.c_n / (prm.n as f64 * prm.mu);
    let e_tilde = grid_path(grid, |t| prm.p * (g.cdf(t) + prm.r_n) - rate * t)?;
    let inf = running_infimum(&e_tilde);
    let mut e = inf.add_affine(rate, 0.0);
    let lowest = e.values().iter().copied().fold(f64::INFINITY, f64::min);
    if lowest < -1e-9 {
        return Err(Error::Invariant(format!("time change E_n reaches {lowest}")));
    }
    e = e.map_values(|v| v.max(0.0));
    Ok((e, e_tilde))
}

/// `X_n = H_n − c_n t/μ + √n (σ/μ) B(E_n)`.
pub fn build_x(
    h: &GridPath,
    service_bm: &mut RefinableBrownianPath,
    e: &GridPath,
    prm: &ApproxParams,
) -> Result<GridPath> {
    let drifted = h.add_affine(-prm.c_n / prm.mu, 0.0);
    if prm.sigma == 0.0 {
        return Ok(drifted);
    }
    let b = time_change(service_bm, e)?;
    Ok(GridPath::combine(&drifted, &b, 1.0, prm.sqrt_n() * prm.sigma / prm.mu))
}

/// `Ŷ_n = Ĥ_n − c_n t/(√n μ) + (σ/μ) B(E_n)`.
pub fn build_y_hat(
    h_hat: &GridPath,
    service_bm: &mut RefinableBrownianPath,
    e: &GridPath,
    prm: &ApproxParams,
) -> Result<GridPath> {
    let drifted = h_hat.add_affine(-prm.c_n / (prm.sqrt_n() * prm.mu), 0.0);
    if prm.sigma == 0.0 {
        return Ok(drifted);
    }
    let b = time_change(service_bm, e)?;
    Ok(GridPath::combine(&drifted, &b, 1.0, prm.sigma / prm.mu))
}

/// `φ(X_n)` or `φ(Ŷ_n)`.
pub fn approx_queue_length(x: &GridPath) -> GridPath {
    reflect(x)
}

/// Builds every approximant from the sample's drivers on the shared grid of
/// the trace.
pub fn build_approximants(
    sample: &mut CoupledSample,
    inputs: &QueueInputs,
    trace: &QueueTrace,
    divisions: usize,
) -> Result<ApproximantSet> {
    if divisions == 0 {
        return Err(Error::param("grid needs at least one division"));
    }
    let prm = ApproxParams::from_inputs(inputs, sample.r_n);
    let g = inputs.arrivals.limit();
    let grid = shared_grid(trace, divisions);
    let h = build_h(&mut sample.bridge, &mut sample.dropout_bm, g, &prm, &grid)?
        .with_domain_end(trace.horizon)?;
    let r = build_r(&h, &mut sample.service_bm, g, &prm)?;
    let (e, e_tilde) = build_e(g, &prm, &grid)?;
    let x = build_x(&h, &mut sample.service_bm, &e, &prm)?;
    let h_hat = h.scale(1.0 / prm.sqrt_n());
    let y_hat = build_y_hat(&h_hat, &mut sample.service_bm, &e, &prm)?;
    Ok(ApproximantSet {
        grid,
        r_hat: r.scale(1.0 / prm.sqrt_n()),
        h,
        h_hat,
        r,
        e,
        e_tilde,
        x,
        y_hat,
        branch: sample.branch,
        streams: sample.driver_streams(),
    })
}

impl ApproximantSet {
    /// Writes one CSV per process into `dir`.
    pub fn write_csv(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, p) in [
            ("H", &self.h),
            ("H_hat", &self.h_hat),
            ("R", &self.r),
            ("R_hat", &self.r_hat),
            ("E", &self.e),
            ("E_tilde", &self.e_tilde),
            ("X", &self.x),
            ("Y_hat", &self.y_hat),
        ] {
            let file = dir.join(format!("{name}.csv"));
            std::fs::write(&file, p.to_csv()).map_err(|e| Error::io(&file, e))?;
        }
        Ok(())
    }
}
