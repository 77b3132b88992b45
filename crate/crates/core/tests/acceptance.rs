//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use common::{ks_uniform, mean_var, random_step_path, rng};
use rsqueue::approx::{approx_queue_length, build_approximants};
use rsqueue::bounds::ValidationRow;
use rsqueue::dist::{ArrivalModel, DistributionSpec};
use rsqueue::harness::{
    fit_all, ladder_checks, run_coupled_replication, run_ladder, slope_band, validate_bounds, Correction,
    ExperimentConfig, ExperimentKind, LawConfig, Metric,
};
use rsqueue::kmt::{build_coupled_sample, uniforms_from_bridge, DEFAULT_J_MAX};
use rsqueue::paths::{reflect, running_infimum, sup_distance, RefinableBrownianPath};
use rsqueue::queue::{remaining_workload, simulate, truncated_renewal, QueueInputs};
use rsqueue::rng::{Role, StreamId};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn inputs(n: usize, p: f64, service: DistributionSpec, c_n: f64) -> QueueInputs {
    QueueInputs {
        n,
        p,
        arrivals: ArrivalModel::Fixed(DistributionSpec::uniform01()),
        service,
        c_n,
    }
}

fn c1_exact_identities() -> Outcome {
    let mut r = rng(101);
    for case in 0..1000 {
        let p = random_step_path(&mut r, 1000);
        let phi = reflect(&p);
        let v = p.values();
        for (i, &t) in p.knots().iter().enumerate() {
            let m = v[..=i].iter().copied().fold(f64::INFINITY, f64::min);
            ensure(phi.eval(t) == v[i] - m && phi.eval(t) >= 0.0, || {
                format!("reflection mismatch on path {case} at knot {i}")
            })?;
        }
    }
    for case in 0..1000 {
        let f = random_step_path(&mut r, 200);
        let g = random_step_path(&mut r, 200);
        let d = sup_distance(&f, &g, 1e6).map_err(|e| e.to_string())?;
        let di = sup_distance(&running_infimum(&f), &running_infimum(&g), 1e6).map_err(|e| e.to_string())?;
        let dr = sup_distance(&reflect(&f), &reflect(&g), 1e6).map_err(|e| e.to_string())?;
        ensure(di <= d + 1e-12 && dr <= 2.0 * d + 1e-12, || {
            format!("inf-stability fails on pair {case}: {di} / {dr} vs {d}")
        })?;
    }
    for n in 1..=64u64 {
        for rep in 0..20 {
            let key = StreamId::new(5, n, rep, Role::Bridge);
            let mut br = RefinableBrownianPath::bridge(key);
            let mut aux = key.with_role(Role::Placement).rng();
            let u = uniforms_from_bridge(n, &mut br, &mut aux, DEFAULT_J_MAX).map_err(|e| e.to_string())?;
            u.counts.check().map_err(|e| format!("n = {n}: {e}"))?;
            ensure((0..=u.counts.depth()).all(|j| u.counts.level_sum(j) == n), || {
                format!("level sums differ from {n}")
            })?;
        }
    }
    let gamma = DistributionSpec::gamma(2.0, 1.0).unwrap();
    let g = ArrivalModel::Fixed(DistributionSpec::uniform01());
    for seed in 0..100 {
        let n = 20 + (seed as usize * 7) % 80;
        let inp = inputs(n, 0.7, gamma.clone(), n as f64 * 1.4 * (0.5 + (seed % 3) as f64 * 0.5));
        let mut s = build_coupled_sample(n, 0.7, &g, &gamma, seed, 0).map_err(|e| e.to_string())?;
        let tr = simulate(&inp, &s).map_err(|e| e.to_string())?;
        let mut ts: Vec<f64> = tr.queue.knots().iter().chain(tr.busy.knots()).copied().collect();
        ts.sort_by(f64::total_cmp);
        let mids: Vec<f64> = ts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        ts.extend(mids);
        for &t in &ts {
            let m = truncated_renewal(&s.service, inp.c_n, tr.busy.eval(t)) as f64;
            ensure(tr.queue.eval(t) == tr.arrivals.eval(t) - m, || {
                format!("Q = A − M∘D fails for instance {seed} at t = {t}")
            })?;
        }
        if seed < 20 {
            let ap = build_approximants(&mut s, &inp, &tr, 1024).map_err(|e| e.to_string())?;
            let rn = (n as f64).sqrt();
            for &t in ap.x.knots() {
                let (a, b) = (rn * ap.y_hat.eval(t), ap.x.eval(t));
                ensure((a - b).abs() <= 1e-10 * (1.0 + b.abs()), || {
                    format!("√n·Ŷ = {a} but X = {b} at t = {t}")
                })?;
            }
        }
    }
    Ok("reflection 1000×1000 knots, inf-stability 1000 pairs, counts n = 1..64, queue identity 100 instances, √n·Ŷ = X".into())
}

fn c2_marginals() -> Outcome {
    let gamma = DistributionSpec::gamma(2.0, 1.0).unwrap();
    let g = ArrivalModel::Fixed(DistributionSpec::uniform01());
    let p = 0.7;
    let (mut u, mut z, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for rep in 0..500 {
        let s = build_coupled_sample(64, p, &g, &gamma, 202, rep).map_err(|e| e.to_string())?;
        u.extend(s.uniforms);
        z.extend(s.zeta.iter().map(|&b| f64::from(u8::from(b))));
        v.extend(s.service);
    }
    let ks = ks_uniform(&u);
    ensure(ks < 0.01, || format!("pooled KS {ks:.5} ≥ 0.01"))?;
    let k = z.len() as f64;
    let (zm, _) = mean_var(&z);
    let zse = (p * (1.0 - p) / k).sqrt();
    ensure((zm - p).abs() <= 3.0 * zse, || format!("ζ mean {zm:.5}, p {p}, SE {zse:.5}"))?;
    let (vm, vv) = mean_var(&v);
    let vse = (2.0 / k).sqrt();
    // central fourth moment of gamma(2,1) is 24
    let vvse = ((24.0 - 4.0) / k).sqrt();
    ensure((vm - 2.0).abs() <= 3.0 * vse, || format!("V mean {vm:.5}, SE {vse:.5}"))?;
    ensure((vv - 2.0).abs() <= 3.0 * vvse, || format!("V variance {vv:.5}, SE {vvse:.5}"))?;
    Ok(format!(
        "KS {ks:.5}; ζ mean {zm:.4} ({:.2} SE); V mean {vm:.4} ({:.2} SE), var {vv:.4} ({:.2} SE)",
        (zm - p) / zse,
        (vm - 2.0) / vse,
        (vv - 2.0) / vvse
    ))
}

fn c3_kmt() -> Outcome {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::KmtEmpirical,
        ladder: (4..=12).map(|j| 1usize << j).collect(),
        replications: 200,
        ..Default::default()
    };
    let recs = run_ladder(&cfg).map_err(|e| e.to_string())?;
    let checks = ladder_checks(&recs, &[]);
    let c = checks.iter().find(|c| c.name.starts_with("kmt")).ok_or("no kmt check")?;
    if c.pass {
        Ok(c.detail.clone())
    } else {
        Err(c.detail.clone())
    }
}

fn coupling_slope(report: &Result<Vec<rsqueue::harness::FitRow>, String>, metrics: &[Metric]) -> Outcome {
    let fits = report.as_ref().map_err(|e| e.clone())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for &m in metrics {
        let f = fits
            .iter()
            .find(|f| f.metric == m && f.correction == Correction::SqrtLogN.name())
            .ok_or_else(|| format!("no fit for {}", m.name()))?;
        let (lo, hi) = slope_band(m).unwrap();
        let pass = (lo..=hi).contains(&f.fit.slope);
        ok &= pass;
        parts.push(format!(
            "{} slope {:.4} ± {:.4} in [{lo}, {hi}]: {}",
            m.name(),
            f.fit.slope,
            f.fit.stderr,
            if pass { "yes" } else { "no" }
        ));
    }
    if ok {
        Ok(parts.join("; "))
    } else {
        Err(parts.join("; "))
    }
}

fn c7_bounds() -> Outcome {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::ValidateBounds,
        ..Default::default()
    };
    let b = validate_bounds(&cfg).map_err(|e| e.to_string())?;
    let kinds = ["subexp", "dkw-classical", "arrival-fluid", "renewal-fluid"];
    for k in kinds {
        ensure(b.rows.iter().any(|r| r.name.starts_with(k)), || format!("no {k} rows"))?;
    }
    let failing: Vec<&ValidationRow> = b.rows.iter().filter(|r| !r.pass).collect();
    let fits: Vec<String> = b
        .fits
        .iter()
        .map(|f| format!("{} k2 {:.4} k3 {:.4}", f.name, f.params.k2, f.params.k3))
        .collect();
    let detail = format!("{} of {} rows dominated; {}", b.rows.len() - failing.len(), b.rows.len(), fits.join(", "));
    if failing.is_empty() {
        Ok(detail)
    } else {
        let first: Vec<String> = failing
            .iter()
            .take(5)
            .map(|r| format!("{} n={} thr={:.4} bound={:.4} est={:.4}", r.name, r.n, r.threshold, r.bound, r.empirical.estimate))
            .collect();
        Err(format!("{detail}; failing: {}", first.join(" | ")))
    }
}

fn c8_degenerate() -> Outcome {
    let g = ArrivalModel::Fixed(DistributionSpec::uniform01());
    let gamma = DistributionSpec::gamma(2.0, 1.0).unwrap();
    for n in [1usize, 2, 7, 64, 500] {
        for rep in 0..10 {
            let s = build_coupled_sample(n, 1.0, &g, &gamma, 303, rep).map_err(|e| e.to_string())?;
            ensure(s.zeta.iter().all(|&z| z), || format!("p = 1 dropped a customer at n = {n}"))?;
        }
    }

    let mu = 1.5;
    let cfg = ExperimentConfig {
        p: 1.0,
        service: LawConfig::Deterministic { value: mu },
        divisions: 1024,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for n in [4usize, 32, 256, 1024] {
        for rep in 0..5 {
            let r = run_coupled_replication(&cfg, n, rep).map_err(|e| e.to_string())?;
            let get = |m: Metric| r.iter().find(|x| x.metric == m).map(|x| x.error).unwrap();
            let (a, w) = (get(Metric::Arrival), get(Metric::Workload));
            worst = worst.max((w - mu * a).abs() / (1.0 + w));
        }
    }
    ensure(worst <= 1e-10, || format!("σ = 0: workload vs μ × arrival error differs by {worst:e}"))?;

    for n in [1usize, 10, 100] {
        let inp = inputs(n, 0.5, gamma.clone(), n as f64);
        let mut s = build_coupled_sample(n, 0.5, &g, &gamma, 304, 0).map_err(|e| e.to_string())?;
        s.zeta = vec![false; n];
        let tr = simulate(&inp, &s).map_err(|e| e.to_string())?;
        ensure(tr.queue.values().iter().all(|&q| q == 0.0), || "queue not identically zero".into())?;
        ensure(tr.arrivals.values().iter().all(|&a| a == 0.0), || "arrivals not zero".into())?;
        let phi = remaining_workload(&tr, inp.c_n);
        ensure(phi.values().iter().all(|&x| x == 0.0), || "reflected workload not zero".into())?;
        for &t in tr.busy.knots() {
            ensure(tr.busy.eval(t) == 0.0 && (tr.idle.eval(t) - t).abs() < 1e-12, || {
                format!("server worked at t = {t} with nobody present")
            })?;
        }
        let ap = build_approximants(&mut s, &inp, &tr, 256).map_err(|e| e.to_string())?;
        let q = approx_queue_length(&ap.x);
        ensure(q.values().iter().all(|&x| x >= 0.0) && q.eval(0.0) == 0.0, || "φ(X) inconsistent".into())?;
        let direct = reflect(&ap.x);
        let d = sup_distance(&q, &direct, 1.0).map_err(|e| e.to_string())?;
        ensure(d == 0.0, || format!("φ(X) differs from reflect(X) by {d}"))?;
    }
    Ok(format!("ζ ≡ 1 at p = 1; σ = 0 relative gap {worst:.1e}; all-dropout Q ≡ 0"))
}

fn report(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let out = f();
    let dt = t0.elapsed();
    let over = limit.is_some_and(|l| dt > l);
    let (pass, detail) = match out {
        Ok(d) if over => (false, format!("{d}; runtime {:.1}s over limit {:?}", dt.as_secs_f64(), limit.unwrap())),
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    println!(
        "{} criterion {id} ({name}) [{:.1}s]: {detail}",
        if pass { "PASS" } else { "FAIL" },
        dt.as_secs_f64()
    );
    pass
}

fn main() {
    let mut all = true;
    all &= report(1, "exact identities", Some(Duration::from_secs(30)), c1_exact_identities);
    all &= report(2, "marginal laws", Some(Duration::from_secs(60)), c2_marginals);
    all &= report(3, "KMT empirical-process scale", None, c3_kmt);

    let t0 = Instant::now();
    let ladder_cfg = ExperimentConfig::default();
    let fits = run_ladder(&ladder_cfg)
        .and_then(|r| fit_all(&ladder_cfg, &r))
        .map_err(|e| e.to_string());
    println!("  shared coupling ladder {:?}, R = {}: {:.1}s", ladder_cfg.ladder, ladder_cfg.replications, t0.elapsed().as_secs_f64());
    all &= report(4, "arrival coupling rate", None, || coupling_slope(&fits, &[Metric::Arrival]));
    all &= report(5, "workload coupling rate", None, || {
        coupling_slope(&fits, &[Metric::Workload, Metric::ReflectedWorkload])
    });
    all &= report(6, "queue-length coupling rate", None, || coupling_slope(&fits, &[Metric::Queue]));

    all &= report(7, "bound domination", None, c7_bounds);
    all &= report(8, "degenerate cases", None, c8_degenerate);
    if !all {
        std::process::exit(1);
    }
}
