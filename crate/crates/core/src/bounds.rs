//! Tail-bound evaluators and the Monte Carlo statistics used to check them.

use std::fmt::Write as _;

use crate::dist::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::special::{gamma_pq, norm_cdf};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

/// Relative tolerance of the bisection for `m`.
pub const RATE_TOL: f64 = 1e-9;

/// Sub-exponential parameters of a law: `E e^{λ(X−μ)} ≤ e^{ν²λ²/2}` for
/// `|λ| < 1/m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubExpParams {
    pub nu: f64,
    pub m: f64,
    pub mean: f64,
    pub variance: f64,
}

impl SubExpParams {
    pub fn new(nu: f64, m: f64, mean: f64, variance: f64) -> Result<Self> {
        if !(nu > 0.0 && m > 0.0) || !nu.is_finite() || !m.is_finite() {
            return Err(Error::param(format!("sub-exponential parameters ({nu}, {m})")));
        }
        Ok(SubExpParams { nu, m, mean, variance })
    }

    /// Parameters of `X / s`.
    pub fn scaled(&self, s: f64) -> Self {
        SubExpParams {
            nu: self.nu / s,
            m: self.m / s,
            mean: self.mean / s,
            variance: self.variance / (s * s),
        }
    }

    /// Deviation level where the two tail regimes meet.
    pub fn crossover(&self) -> f64 {
        self.nu * self.nu / self.m
    }
}

fn abs_mgf_family(f: &Family, c: f64, a: f64) -> f64 {
    match f {
        Family::Gaussian { mean, sd } => {
            let d = mean - c;
            let v = sd * sd;
            if *sd > 0.0 {
                (a * d + 0.5 * a * a * v).exp() * norm_cdf((d + a * v) / sd)
                    + (-a * d + 0.5 * a * a * v).exp() * norm_cdf((-d + a * v) / sd)
            } else {
                (a * d.abs()).exp()
            }
        }
        Family::Gamma { shape, scale } => gamma_abs_mgf(*shape, *scale, c, a),
        Family::Exponential { rate } => gamma_abs_mgf(1.0, 1.0 / rate, c, a),
        Family::Bernoulli { p } => p * (a * (1.0 - c).abs()).exp() + (1.0 - p) * (a * c.abs()).exp(),
        Family::Deterministic { value } => (a * (value - c).abs()).exp(),
        Family::Uniform01 => {
            // ∫_0^1 e^{a|x − c|} dx
            let seg = |lo: f64, hi: f64, sign: f64| -> f64 {
                if hi <= lo {
                    return 0.0;
                }
                let k = a * sign;
                if (k * (hi - lo)).abs() < 1e-12 {
                    (hi - lo) * (k * (lo - c)).exp()
                } else {
                    ((k * (hi - c)).exp() - (k * (lo - c)).exp()) / k
                }
            };
            let cc = c.clamp(0.0, 1.0);
            seg(0.0, cc, -1.0) + seg(cc, 1.0, 1.0)
        }
        Family::Table(t) => t.abs_mgf(c, a),
        Family::Mixture { base, alt, weight } => {
            (1.0 - weight) * abs_mgf_family(base, c, a) + weight * abs_mgf_family(alt, c, a)
        }
    }
}

fn gamma_abs_mgf(k: f64, theta: f64, c: f64, a: f64) -> f64 {
    if a * theta >= 1.0 {
        return f64::INFINITY;
    }
    let up = (-a * c).exp() * (1.0 - a * theta).powf(-k);
    if c <= 0.0 {
        return up;
    }
    let (_, q_up) = gamma_pq(k, c * (1.0 - a * theta) / theta);
    let (p_dn, _) = gamma_pq(k, c * (1.0 + a * theta) / theta);
    up * q_up + (a * c).exp() * (1.0 + a * theta).powf(-k) * p_dn
}

/// `E[e^{a|X − μ|}]`, infinite where it diverges.
pub fn centered_abs_mgf(spec: &DistributionSpec, a: f64) -> f64 {
    abs_mgf_family(spec.family(), spec.mean(), a)
}

/// `ν = √(2 Var X)` and `m = 1/λ*` where `E[e^{2λ*|X−μ|}] = 4`.
pub fn subexp_params(spec: &DistributionSpec) -> Result<SubExpParams> {
    let var = spec.variance();
    if !(var > 0.0) {
        return Err(Error::Unsupported("degenerate law has no finite rate parameter".into()));
    }
    let f = |lam: f64| centered_abs_mgf(spec, 2.0 * lam);
    let mut hi = 1.0;
    let mut lo = 0.0;
    let mut steps = 0;
    while f(hi) < 4.0 {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 200 {
            return Err(Error::Domain("absolute mgf stays below 4".into()));
        }
    }
    if !f(1e-12).is_finite() {
        return Err(Error::Unsupported("moment generating function diverges near 0".into()));
    }
    while hi - lo > RATE_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 4.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    SubExpParams::new((2.0 * var).sqrt(), 1.0 / (0.5 * (lo + hi)), spec.mean(), var)
}

/// Two-regime bound on `P(|S_n − nμ| ≥ nt)`, equally valid for the running
/// maximum over `k ≤ n`.
pub fn subexp_tail_bound(params: &SubExpParams, n: u64, t: f64) -> f64 {
    let n = n as f64;
    let nu2 = params.nu * params.nu;
    if t <= params.crossover() {
        2.0 * (-n * t * t / (2.0 * nu2)).exp()
    } else {
        2.0 * (-n * t / (2.0 * params.m)).exp()
    }
}

/// Constants of the empirical-process coupling bound.
pub const KMT_C: f64 = 100.0;
pub const KMT_K: f64 = 10.0;
pub const KMT_LAMBDA: f64 = 1.0 / 50.0;

/// `(threshold, tail)` with threshold `C log n + x` and tail `K e^{−λx}`.
pub fn dkw_emp_bound(n: u64, x: f64) -> (f64, f64) {
    (KMT_C * (n as f64).ln() + x, KMT_K * (-KMT_LAMBDA * x).exp())
}

/// `2 e^{−2nε²}`.
pub fn dkw_classical(n: u64, eps: f64) -> f64 {
    2.0 * (-2.0 * n as f64 * eps * eps).exp()
}

/// Bound on `P(sup_s |Â_n(s)/n − ps| > ε)` for uniform epochs: the
/// empirical cdf and the dropout walk each take half of `ε`.
pub fn arrival_combined_bound(p: f64, n: u64, eps: f64) -> Result<f64> {
    let dkw = dkw_classical(n, eps / (2.0 * p));
    if p >= 1.0 {
        return Ok(dkw);
    }
    let walk = subexp_params(&DistributionSpec::bernoulli(p)?)?;
    Ok(dkw + subexp_tail_bound(&walk, n, eps / 2.0))
}

/// Constants for bounds on a Brownian motion run along a random clock `Ξ_n`
/// instead of its fluid limit `ξ_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeChangeBoundParams {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub gamma: f64,
    /// Extra threshold shift, in units of `1/n`.
    pub shift: f64,
    /// Lipschitz constant of `ξ_n`.
    pub c_xi: f64,
    pub l_n: f64,
    /// `sup_s E|Ξ_n(s) − ξ_n(s)|`.
    pub upsilon_sq: f64,
    /// Leading constant of the threshold.
    pub c: f64,
}

impl Default for TimeChangeBoundParams {
    fn default() -> Self {
        TimeChangeBoundParams {
            k0: 0.0,
            k1: 2.0,
            k2: 1.0,
            k3: 1.0,
            gamma: 1.0,
            shift: 0.0,
            c_xi: 1.0,
            l_n: 1.0,
            upsilon_sq: 1.0,
            c: 1.0,
        }
    }
}

impl TimeChangeBoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 4.0) {
            return Err(Error::param(format!("gamma = {} outside (0, 4)", self.gamma)));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.k3 > 0.0 && self.k0 >= 0.0) {
            return Err(Error::param("fluid-limit tail constants must be positive"));
        }
        if !(self.upsilon_sq > 0.0 && self.c_xi > 0.0 && self.l_n > 0.0) {
            return Err(Error::param("variance proxy, Lipschitz constant and horizon must be positive"));
        }
        Ok(())
    }

    /// `ε + k0 log n / n + shift / n`.
    pub fn fluid_threshold(&self, n: u64, eps: f64) -> f64 {
        let nf = n as f64;
        eps + (self.k0 * nf.ln() + self.shift) / nf
    }

    /// `k1 exp(−(k2 n^γ ε² ∧ k3 n^γ ε))`.
    pub fn fluid_tail(&self, n: u64, eps: f64) -> f64 {
        let ng = (n as f64).powf(self.gamma);
        self.k1 * (-(self.k2 * ng * eps * eps).min(self.k3 * ng * eps)).exp()
    }
}

/// `(threshold, tail)` for `sup|B(Ξ_n) − B(ξ_n)|`: threshold
/// `C √log((c_ξ L_n) ∨ n) / n^{1/4} + x`, tail `2 e^{−x²/(2υ_n²)}`.
pub fn timechanged_bm_bound(params: &TimeChangeBoundParams, n: u64, x: f64) -> (f64, f64) {
    let nf = n as f64;
    let scale = (params.c_xi * params.l_n).max(nf).ln().max(0.0).sqrt() / nf.powf(0.25);
    (
        params.c * scale + x,
        (2.0 * (-x * x / (2.0 * params.upsilon_sq)).exp()).min(2.0),
    )
}

/// Exceedance frequency with a 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exceedance {
    pub hits: u64,
    pub total: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    /// Binomial standard error of `estimate`.
    pub se: f64,
}

impl Exceedance {
    pub fn from_counts(hits: u64, total: u64) -> Result<Self> {
        if total == 0 || hits > total {
            return Err(Error::param(format!("{hits} exceedances out of {total}")));
        }
        let nf = total as f64;
        let q = hits as f64 / nf;
        let se = (q * (1.0 - q) / nf).sqrt();
        let (lo, hi) = if hits == 0 {
            (0.0, (3.0 / nf).min(1.0))
        } else {
            let z2 = Z95 * Z95;
            let denom = 1.0 + z2 / nf;
            let centre = (q + z2 / (2.0 * nf)) / denom;
            let half = Z95 * (q * (1.0 - q) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
            ((centre - half).max(0.0), (centre + half).min(1.0))
        };
        Ok(Exceedance {
            hits,
            total,
            estimate: q,
            lo,
            hi,
            se,
        })
    }

    /// `estimate ≤ bound + 3 SE`; bounds at or above one always hold.
    pub fn dominated_by(&self, bound: f64) -> bool {
        bound >= 1.0 || self.estimate <= bound + 3.0 * self.se
    }
}

/// Fraction of `samples` strictly above `threshold`.
pub fn empirical_exceedance(samples: &[f64], threshold: f64) -> Result<Exceedance> {
    let hits = samples.iter().filter(|&&s| s > threshold).count() as u64;
    Exceedance::from_counts(hits, samples.len() as u64)
}

/// `sup_{k≤n} |Σ_{i≤k} x_i − kμ|`.
pub fn partial_sum_max_deviation(xs: &[f64], mean: f64) -> f64 {
    let mut s = 0.0;
    let mut best = 0.0f64;
    for (k, x) in xs.iter().enumerate() {
        s += x;
        best = best.max((s - (k + 1) as f64 * mean).abs());
    }
    best
}

/// `sup_{s∈[0,1]} |Â_n(s)/n − ps|` for epochs on `[0, 1]`.
pub fn arrival_fluid_deviation(epochs: &[f64], zeta: &[bool], p: f64) -> f64 {
    let n = epochs.len() as f64;
    let mut kept: Vec<f64> = epochs
        .iter()
        .zip(zeta)
        .filter(|(_, &z)| z)
        .map(|(&t, _)| t)
        .collect();
    kept.sort_by(f64::total_cmp);
    let mut best = 0.0f64;
    for (j, &t) in kept.iter().enumerate() {
        let fl = p * t;
        best = best.max((j as f64 / n - fl).abs()).max(((j + 1) as f64 / n - fl).abs());
    }
    best.max((kept.len() as f64 / n - p).abs())
}

/// `sup_u |#{k: S_k ≤ u}/n − (u/(nμ) ∧ 1)|`, the renewal statistic with the
/// service rate scaled out.
pub fn renewal_fluid_deviation(service: &[f64], mean: f64) -> f64 {
    let n = service.len() as f64;
    let fluid = |u: f64| (u / (n * mean)).min(1.0);
    let mut s = 0.0;
    let mut best = 0.0f64;
    let mut below_kink = 0usize;
    for (k, v) in service.iter().enumerate() {
        s += v;
        let f = fluid(s);
        best = best.max((k as f64 / n - f).abs()).max(((k + 1) as f64 / n - f).abs());
        if s <= n * mean {
            below_kink = k + 1;
        }
    }
    best.max((1.0 - below_kink as f64 / n).abs())
}

/// Exceedance counts of a statistic at one `(n, ε)` probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub n: u64,
    pub eps: f64,
    pub hits: u64,
    pub total: u64,
}

/// Fits `k2, k3` in `k1 e^{−(k2 n^γ ε² ∧ k3 n^γ ε)}` so the bound sits at or
/// above the upper 95% limit of every probe that saw an exceedance; among the
/// admissible pairs the one with the smallest summed bound over those probes
/// is returned. Probes without exceedances do not constrain the fit.
pub fn fit_fluid_constants(probes: &[Probe], k1: f64, gamma: f64) -> Result<(f64, f64)> {
    if probes.is_empty() {
        return Err(Error::param("no probes to fit"));
    }
    let mut cons = Vec::with_capacity(probes.len());
    for pr in probes {
        let upper = Exceedance::from_counts(pr.hits, pr.total)?.hi;
        if pr.hits == 0 {
            continue;
        }
        if upper >= k1 {
            return Err(Error::Domain(format!(
                "k1 = {k1} cannot dominate exceedance {upper} at n = {}",
                pr.n
            )));
        }
        let ng = (pr.n as f64).powf(gamma);
        if !(pr.eps > 0.0) {
            return Err(Error::param("probe levels must be positive"));
        }
        // (n^γ ε², n^γ ε, log(k1/upper))
        cons.push((ng * pr.eps * pr.eps, ng * pr.eps, (k1 / upper).ln()));
    }
    if cons.is_empty() {
        return Err(Error::Domain("no probe saw an exceedance".into()));
    }
    let mut k2s: Vec<f64> = cons.iter().map(|c| c.2 / c.0).collect();
    k2s.push(f64::INFINITY);
    k2s.sort_by(f64::total_cmp);
    let mut best: Option<(f64, f64, f64)> = None;
    for &k2 in &k2s {
        let k3 = cons
            .iter()
            .filter(|c| k2 * c.0 > c.2)
            .map(|c| c.2 / c.1)
            .fold(f64::INFINITY, f64::min);
        if !k2.is_finite() && !k3.is_finite() {
            continue;
        }
        let total: f64 = cons
            .iter()
            .map(|c| k1 * (-(k2 * c.0).min(k3 * c.1)).exp())
            .sum();
        if best.is_none_or(|b| total < b.2) {
            best = Some((k2, k3, total));
        }
    }
    let (k2, k3, _) = best.ok_or_else(|| Error::Domain("no admissible constants".into()))?;
    // an infinite constant means that branch never binds; cap it at the
    // other branch's implied value so both stay finite
    let k2 = if k2.is_finite() { k2 } else { cons.iter().map(|c| c.2 / c.0).fold(0.0, f64::max) };
    let k3 = if k3.is_finite() { k3 } else { cons.iter().map(|c| c.2 / c.1).fold(0.0, f64::max) };
    Ok((k2, k3))
}

/// Smallest `C` with `P̂(S > C·r + x) ≤ tail(x)` at every probed `x`, where
/// `r = √log((c_ξ L_n) ∨ n)/n^{1/4}`. Negative fits are clamped to zero.
pub fn fit_timechange_constant(
    params: &TimeChangeBoundParams,
    n: u64,
    samples: &[f64],
    xs: &[f64],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::param("no samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let unit = TimeChangeBoundParams { c: 1.0, ..*params };
    let r = timechanged_bm_bound(&unit, n, 0.0).0;
    if !(r > 0.0) {
        return Err(Error::Domain("threshold scale vanishes".into()));
    }
    let big_n = sorted.len();
    let mut c = 0.0f64;
    for &x in xs {
        let tail = timechanged_bm_bound(params, n, x).1;
        // allowed number of samples above the threshold
        let allowed = (tail * big_n as f64).floor() as usize;
        if allowed >= big_n {
            continue;
        }
        let q = sorted[big_n - 1 - allowed];
        c = c.max((q - x) / r);
    }
    Ok(c)
}

/// One line of a bound-validation report.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub name: String,
    pub n: u64,
    pub threshold: f64,
    pub bound: f64,
    pub empirical: Exceedance,
    pub pass: bool,
}

impl ValidationRow {
    pub fn new(name: impl Into<String>, n: u64, threshold: f64, bound: f64, empirical: Exceedance) -> Self {
        ValidationRow {
            name: name.into(),
            n,
            threshold,
            bound,
            pass: empirical.dominated_by(bound),
            empirical,
        }
    }
}

pub const VALIDATION_HEADER: &str = "bound,n,threshold,bound_value,empirical,ci_low,ci_high,pass";

/// Renders rows with [`VALIDATION_HEADER`].
pub fn validation_csv(rows: &[ValidationRow]) -> String {
    let mut out = format!("{VALIDATION_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.name, r.n, r.threshold, r.bound, r.empirical.estimate, r.empirical.lo, r.empirical.hi, r.pass
        );
    }
    out
}
