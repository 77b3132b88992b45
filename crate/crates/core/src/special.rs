//! Special functions used by the quantile transforms.
//!
//! Normal cdf and quantile, regularized incomplete gamma and beta functions
//! with their inverses, and exact quantiles of the binomial and
//! hypergeometric laws. The incomplete functions use Stirling-corrected
//! prefactors so that large shape parameters (tens of thousands) keep
//! close to full double precision.

use std::f64::consts::{PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Standard normal cdf.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile.
///
/// Rational starting approximation followed by one Halley step against
/// `erfc`. The upper half is reflected so that `1 - p` is exact.
pub fn norm_inv(p: f64) -> f64 {
    if p.is_nan() {
        return f64::NAN;
    }
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -norm_inv_lower(1.0 - p);
    }
    norm_inv_lower(p)
}

#[allow(clippy::excessive_precision)]
fn norm_inv_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let mut x = x;
    for _ in 0..2 {
        let e = norm_cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        let step = u / (1.0 + 0.5 * x * u);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Stirling remainder `ln Γ(x) - ((x - 1/2) ln x - x + ln √(2π))`.
pub fn stirling_err(x: f64) -> f64 {
    if x < 10.0 {
        return ln_gamma(x) - ((x - 0.5) * x.ln() - x + LN_SQRT_2PI);
    }
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0
                    - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360360.0 - r2 / 156.0))))))
}

/// `ln(1 + x) - x`, accurate for small `x`.
pub fn log1pmx(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // alternating series -x^2/2 + x^3/3 - ...
        let mut term = x;
        let mut sum = 0.0;
        for k in 2..60 {
            term *= -x;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        x.ln_1p() - x
    }
}

/// `x^a e^{-x} / Γ(a)`.
fn gamma_prefactor(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if a < 10.0 {
        return (a * x.ln() - x - ln_gamma(a)).exp();
    }
    let d = (x - a) / a;
    (a * log1pmx(d) - stirling_err(a)).exp() * (a / (2.0 * PI)).sqrt()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    gamma_pq(a, x).0
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    gamma_pq(a, x).1
}

/// Both `P(a, x)` and `Q(a, x)`, each computed without cancellation.
pub fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let front = gamma_prefactor(a, x);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..100_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let p = (front * sum).min(1.0);
        (p, 1.0 - p)
    } else {
        // modified Lentz on the continued fraction for Q
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let q = (front * h).min(1.0);
        (1.0 - q, q)
    }
}

/// Gamma(a, 1) density.
pub fn gamma_pdf(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if a == 1.0 && x == 0.0 { 1.0 } else { 0.0 };
    }
    gamma_prefactor(a, x) / x
}

/// Quantile of Gamma(a, 1) at lower probability `p` with complement `q`.
///
/// Passing the complement separately keeps upper-tail accuracy when `p`
/// rounds to 1.
pub fn gamma_quantile(a: f64, p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if q <= 0.0 {
        return f64::INFINITY;
    }
    let upper = p > 0.5;
    let z = if upper { -norm_inv(q) } else { norm_inv(p) };
    let mut x = {
        let c = 1.0 / (9.0 * a);
        let w = 1.0 - c + z * c.sqrt();
        let wh = a * w * w * w;
        if wh > 0.0 && a > 0.5 {
            wh
        } else {
            // small-x expansion of P(a, x) ~ x^a / Γ(a + 1)
            (p.ln() + ln_gamma(a + 1.0)).exp().powf(1.0 / a).max(1e-300)
        }
    };
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..200 {
        let (pp, qq) = gamma_pq(a, x);
        // residual signed so that it increases with x
        let r = if upper { q - qq } else { pp - p };
        if r == 0.0 {
            return x;
        }
        if r > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let f = gamma_pdf(a, x);
        let mut next = if f > 0.0 { x - r / f } else { f64::NAN };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x.max(1.0)
            };
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

/// `x^a (1-x)^b / B(a, b)`, with `y = 1 - x` supplied exactly.
fn beta_prefactor(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    if a < 10.0 || b < 10.0 {
        let ln_b = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
        return (a * x.ln() + b * y.ln() - ln_b).exp();
    }
    let s = a + b;
    let x0 = a / s;
    let y0 = b / s;
    let e = if x < 0.5 { x - x0 } else { y0 - y };
    let expo = a * log1pmx(e / x0) + b * log1pmx(-e / y0)
        - (stirling_err(a) + stirling_err(b) - stirling_err(s));
    expo.exp() * (a * b / (2.0 * PI * s)).sqrt()
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..200_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    beta_inc_pq(a, b, x, 1.0 - x).0
}

/// `(I_x(a, b), 1 - I_x(a, b))` with `y = 1 - x` supplied exactly.
pub fn beta_inc_pq(a: f64, b: f64, x: f64, y: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    let front = beta_prefactor(a, b, x, y);
    if x < (a + 1.0) / (a + b + 2.0) {
        let p = (front * beta_cf(a, b, x) / a).min(1.0);
        (p, 1.0 - p)
    } else {
        let q = (front * beta_cf(b, a, y) / b).min(1.0);
        (1.0 - q, q)
    }
}

/// Beta(a, b) density.
pub fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    let y = 1.0 - x;
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    beta_prefactor(a, b, x, y) / (x * y)
}

/// Quantile of Beta(a, b) at lower probability `p` with complement `q`.
pub fn beta_quantile(a: f64, b: f64, p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if q <= 0.0 {
        return 1.0;
    }
    let upper = p > 0.5;
    let s = a + b;
    let mean = a / s;
    let sd = (a * b / (s * s * (s + 1.0))).sqrt();
    let z = if upper { -norm_inv(q) } else { norm_inv(p) };
    let mut x = mean + z * sd;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(x > 0.0 && x < 1.0) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..300 {
        let (pp, qq) = beta_inc_pq(a, b, x, 1.0 - x);
        let r = if upper { q - qq } else { pp - p };
        if r == 0.0 {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let f = beta_pdf(a, b, x);
        let mut next = if f > 0.0 { x - r / f } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.max(1e-300) || hi - lo <= f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

/// Smallest `k` in `[lo, hi]` whose cdf reaches `u`, for a unimodal pmf
/// given by its mode and successive ratios `pmf(k+1)/pmf(k)`.
///
/// Weights are built outward from the mode and normalized by their sum, so
/// no absolute pmf value is ever needed.
fn unimodal_quantile(lo: u64, hi: u64, mode: u64, ratio: impl Fn(u64) -> f64, u: f64) -> u64 {
    if lo == hi {
        return lo;
    }
    const CUT: f64 = 1e-22;
    let mut left = Vec::new();
    let mut w = 1.0;
    let mut k = mode;
    while k > lo {
        w /= ratio(k - 1);
        if w < CUT {
            break;
        }
        k -= 1;
        left.push(w);
    }
    let first = k;
    let mut weights: Vec<f64> = left.into_iter().rev().collect();
    weights.push(1.0);
    let mut w = 1.0;
    let mut k = mode;
    while k < hi {
        w *= ratio(k);
        if w < CUT {
            break;
        }
        k += 1;
        weights.push(w);
    }
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut cum = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cum += w;
        if cum >= target {
            return first + i as u64;
        }
    }
    first + weights.len() as u64 - 1
}

/// Smallest `k` with `P(Bin(m, prob) <= k) >= u`.
pub fn binomial_quantile(m: u64, prob: f64, u: f64) -> u64 {
    if m == 0 || u <= 0.0 || prob <= 0.0 {
        return 0;
    }
    if prob >= 1.0 {
        return m;
    }
    let mode = (((m + 1) as f64) * prob).floor().min(m as f64) as u64;
    let odds = prob / (1.0 - prob);
    let mf = m as f64;
    unimodal_quantile(
        0,
        m,
        mode,
        |k| (mf - k as f64) / (k as f64 + 1.0) * odds,
        u.min(1.0),
    )
}

/// Smallest `k` with `P(Hyp(pop, succ, draws) <= k) >= u`, where `k` counts
/// successes among `draws` items taken without replacement.
pub fn hypergeometric_quantile(pop: u64, succ: u64, draws: u64, u: f64) -> u64 {
    assert!(succ <= pop && draws <= pop, "hypergeometric parameters");
    let lo = (draws + succ).saturating_sub(pop);
    let hi = draws.min(succ);
    if u <= 0.0 {
        return lo;
    }
    let mode = (((draws + 1) as f64) * ((succ + 1) as f64) / ((pop + 2) as f64)).floor() as u64;
    let mode = mode.clamp(lo, hi);
    let (n, k, d) = (pop as f64, succ as f64, draws as f64);
    unimodal_quantile(
        lo,
        hi,
        mode,
        |j| {
            let j = j as f64;
            (k - j) * (d - j) / ((j + 1.0) * (n - k - d + j + 1.0))
        },
        u.min(1.0),
    )
}
