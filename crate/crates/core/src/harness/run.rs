use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, Metric};
use super::records::{fit_rate, fit_rate_by, records_to_csv, summarize, Correction, LadderRecord, RateFit};
use crate::approx::{approx_queue_length, build_approximants};
use crate::bounds::{
    arrival_combined_bound, arrival_fluid_deviation, dkw_classical, empirical_exceedance, fit_fluid_constants,
    partial_sum_max_deviation, renewal_fluid_deviation, subexp_params, subexp_tail_bound, validation_csv, Probe,
    TimeChangeBoundParams, ValidationRow,
};
use crate::dist::{ks_statistic, ArrivalModel, DistributionSpec};
use crate::error::{Error, Result};
use crate::kmt::{
    build_coupled_sample, empirical_bridge_distance, uniforms_from_bridge, walk_from_bm, walk_levels, WalkFamily,
    DEFAULT_J_MAX,
};
use crate::paths::{reflect, sup_distance, RefinableBrownianPath};
use crate::queue::{remaining_workload, simulate, QueueInputs, QueueTrace};
use crate::rng::{splitmix64, Role, StreamId};

/// Slope bands for the coupling metrics under the `√log n` correction.
pub fn slope_band(metric: Metric) -> Option<(f64, f64)> {
    match metric {
        Metric::Arrival | Metric::Workload | Metric::ReflectedWorkload => Some((0.15, 0.35)),
        Metric::Queue => Some((0.12, 0.40)),
        Metric::Kmt => None,
    }
}

/// Largest allowed ratio between the extremes of `m(n)/log n`.
pub const KMT_RATIO_LIMIT: f64 = 4.0;

fn elapsed_ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

/// One replication of the coupled system at population `n`: builds the
/// sample, simulates the queue, builds the approximants from the same
/// drivers and records the sup-norm error of each metric the experiment
/// asks for (all four for kinds that are not coupling experiments).
pub fn run_coupled_replication(cfg: &ExperimentConfig, n: usize, rep: u64) -> Result<Vec<LadderRecord>> {
    let t0 = Instant::now();
    let model = cfg.arrival_model()?;
    let service = cfg.service_law()?;
    let mut sample = build_coupled_sample(n, cfg.p, &model, &service, cfg.seed, rep)?;
    let inputs = QueueInputs {
        n,
        p: cfg.p,
        arrivals: model,
        service,
        c_n: cfg.c_n(n)?,
    };
    let trace = simulate(&inputs, &sample)?;
    let ap = build_approximants(&mut sample, &inputs, &trace, cfg.divisions)?;
    let delta = trace.horizon / cfg.divisions as f64;
    let metrics = if cfg.kind.is_coupling() {
        cfg.kind.metrics()
    } else {
        ExperimentKind::CoupleAll.metrics()
    };
    let mut errors = Vec::with_capacity(metrics.len());
    for &m in metrics {
        let e = match m {
            Metric::Arrival => sup_distance(&trace.arrivals, &ap.h, delta)?,
            Metric::Workload => sup_distance(&trace.workload, &ap.r, delta)?,
            Metric::ReflectedWorkload => {
                let rr = reflect(&ap.r.add_affine(-inputs.c_n, 0.0));
                sup_distance(&remaining_workload(&trace, inputs.c_n), &rr, delta)?
            }
            Metric::Queue => sup_distance(&trace.queue, &approx_queue_length(&ap.x), delta)?,
            Metric::Kmt => unreachable!("not a coupling metric"),
        };
        errors.push((m, e));
    }
    let ms = elapsed_ms(t0);
    Ok(errors
        .into_iter()
        .map(|(metric, error)| LadderRecord {
            n,
            rep,
            metric,
            error,
            runtime_ms: ms,
            seed: cfg.seed,
        })
        .collect())
}

/// `sup_t √n|α_n(t) − B^{br}(t)|` for one replication, from the same bridge
/// stream a coupled sample with this key would use.
pub fn run_kmt_replication(seed: u64, n: usize, rep: u64) -> Result<LadderRecord> {
    let t0 = Instant::now();
    let key = StreamId::new(seed, n as u64, rep, Role::Bridge);
    let mut bridge = RefinableBrownianPath::bridge(key);
    let mut aux = key.with_role(Role::Placement).rng();
    let u = uniforms_from_bridge(n as u64, &mut bridge, &mut aux, DEFAULT_J_MAX)?;
    let error = empirical_bridge_distance(&u.sorted, &bridge);
    Ok(LadderRecord {
        n,
        rep,
        metric: Metric::Kmt,
        error,
        runtime_ms: elapsed_ms(t0),
        seed,
    })
}

/// All `(n, rep)` replications of a ladder, in ladder-then-replication order.
pub fn run_ladder(cfg: &ExperimentConfig) -> Result<Vec<LadderRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, u64)> = cfg
        .ladder
        .iter()
        .flat_map(|&n| (0..cfg.replications as u64).map(move |r| (n, r)))
        .collect();
    let kmt = cfg.kind == ExperimentKind::KmtEmpirical;
    let out: Result<Vec<Vec<LadderRecord>>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            if kmt {
                run_kmt_replication(cfg.seed, n, rep).map(|r| vec![r])
            } else {
                run_coupled_replication(cfg, n, rep)
            }
        })
        .collect();
    Ok(out?.into_iter().flatten().collect())
}

/// Fitted `k1 e^{−(k2 n ε² ∧ k3 n ε)}` constants of one statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidFit {
    pub name: String,
    pub params: TimeChangeBoundParams,
}

#[derive(Clone, Debug, Default)]
pub struct BoundsReport {
    pub rows: Vec<ValidationRow>,
    pub fits: Vec<FluidFit>,
    pub notes: Vec<String>,
}

impl BoundsReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn exceedance_rows(
    name: &str,
    n: usize,
    stats: &[f64],
    probes: impl IntoIterator<Item = (f64, f64)>,
) -> Result<Vec<ValidationRow>> {
    probes
        .into_iter()
        .map(|(thr, bound)| Ok(ValidationRow::new(name, n as u64, thr, bound, empirical_exceedance(stats, thr)?)))
        .collect()
}

fn subexp_rows(cfg: &ExperimentConfig, service: &DistributionSpec, report: &mut BoundsReport) -> Result<()> {
    let b = &cfg.bounds;
    let params = match subexp_params(service) {
        Ok(p) => p,
        Err(Error::Unsupported(msg)) => {
            report.notes.push(format!("partial-sum check skipped: {msg}"));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let family = WalkFamily::from_spec(service)?;
    let levels = walk_levels(b.n);
    let unit = 1.0 / b.n as f64;
    let mu = service.mean();
    let stats: Result<Vec<f64>> = (0..b.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut bm = RefinableBrownianPath::new(StreamId::new(cfg.seed, b.n as u64, rep, Role::Custom(1)));
            let w = walk_from_bm(levels, &mut bm, family, unit)?;
            Ok(partial_sum_max_deviation(&w[..b.n], mu) / b.n as f64)
        })
        .collect();
    let stats = stats?;
    report.rows.extend(exceedance_rows(
        "subexp-max",
        b.n,
        &stats,
        b.subexp_levels.iter().map(|&t| (t, subexp_tail_bound(&params, b.n as u64, t))),
    )?);
    Ok(())
}

fn dkw_rows(cfg: &ExperimentConfig, report: &mut BoundsReport) -> Result<()> {
    let b = &cfg.bounds;
    let unif = DistributionSpec::uniform01();
    let stats: Result<Vec<f64>> = (0..b.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let key = StreamId::new(cfg.seed, b.n as u64, rep, Role::Custom(2));
            let mut bridge = RefinableBrownianPath::bridge(key);
            let mut aux = key.with_role(Role::Custom(3)).rng();
            let u = uniforms_from_bridge(b.n as u64, &mut bridge, &mut aux, DEFAULT_J_MAX)?;
            ks_statistic(&u.values, &unif)
        })
        .collect();
    let stats = stats?;
    report.rows.extend(exceedance_rows(
        "dkw-classical",
        b.n,
        &stats,
        b.dkw_levels.iter().map(|&e| (e, dkw_classical(b.n as u64, e))),
    )?);
    Ok(())
}

/// Statistics of the arrival and renewal fluid deviations at one `n`,
/// split into calibration and held-out halves.
struct FluidSamples {
    n: usize,
    arrival: [Vec<f64>; 2],
    renewal: [Vec<f64>; 2],
}

fn fluid_samples(cfg: &ExperimentConfig, service: &DistributionSpec, n: usize) -> Result<FluidSamples> {
    let reps = cfg.bounds.fit_reps as u64;
    let master = splitmix64(cfg.seed ^ 0xb0_0d5);
    let model = ArrivalModel::Fixed(DistributionSpec::uniform01());
    let mu = service.mean();
    let pairs: Result<Vec<(f64, f64)>> = (0..2 * reps)
        .into_par_iter()
        .map(|rep| {
            let s = build_coupled_sample(n, cfg.p, &model, service, master, rep)?;
            Ok((
                arrival_fluid_deviation(&s.arrivals, &s.zeta, cfg.p),
                renewal_fluid_deviation(&s.service, mu),
            ))
        })
        .collect();
    let pairs = pairs?;
    let (cal, held) = pairs.split_at(reps as usize);
    Ok(FluidSamples {
        n,
        arrival: [cal.iter().map(|p| p.0).collect(), held.iter().map(|p| p.0).collect()],
        renewal: [cal.iter().map(|p| p.1).collect(), held.iter().map(|p| p.1).collect()],
    })
}

fn fit_and_validate(
    name: &str,
    shift: f64,
    samples: &[(usize, &[f64], &[f64])],
    cfg: &ExperimentConfig,
    report: &mut BoundsReport,
) -> Result<()> {
    let levels = &cfg.bounds.fit_levels;
    let k1 = cfg.bounds.k1;
    let mut probes = Vec::new();
    for &(n, cal, _) in samples {
        for &a in levels {
            let eps = a / (n as f64).sqrt();
            let thr = eps + shift / n as f64;
            let e = empirical_exceedance(cal, thr)?;
            probes.push(Probe {
                n: n as u64,
                eps,
                hits: e.hits,
                total: e.total,
            });
        }
    }
    let (k2, k3) = fit_fluid_constants(&probes, k1, 1.0)?;
    let params = TimeChangeBoundParams {
        k1,
        k2,
        k3,
        shift,
        ..Default::default()
    };
    for &(n, _, held) in samples {
        report.rows.extend(exceedance_rows(
            name,
            n,
            held,
            levels.iter().map(|&a| {
                let eps = a / (n as f64).sqrt();
                (params.fluid_threshold(n as u64, eps), params.fluid_tail(n as u64, eps))
            }),
        )?);
    }
    report.fits.push(FluidFit {
        name: name.to_string(),
        params,
    });
    Ok(())
}

/// Monte Carlo checks of every closed-form bound, plus fitted exponential
/// tails for the arrival and renewal fluid deviations (fitted on one half of
/// the replications, checked on the other).
pub fn validate_bounds(cfg: &ExperimentConfig) -> Result<BoundsReport> {
    cfg.validate()?;
    let service = cfg.service_law()?;
    let mut report = BoundsReport::default();
    subexp_rows(cfg, &service, &mut report)?;
    dkw_rows(cfg, &mut report)?;

    if WalkFamily::from_spec(&service).is_err() {
        report
            .notes
            .push("fluid-deviation checks skipped: service law has no walk construction".into());
        return Ok(report);
    }
    let fluid: Vec<FluidSamples> = cfg
        .ladder
        .iter()
        .map(|&n| fluid_samples(cfg, &service, n))
        .collect::<Result<_>>()?;

    for fs in &fluid {
        let all: Vec<f64> = fs.arrival.concat();
        let mut probes = Vec::new();
        for &a in &cfg.bounds.fit_levels {
            let eps = a / (fs.n as f64).sqrt();
            probes.push((eps, arrival_combined_bound(cfg.p, fs.n as u64, eps)?));
        }
        report.rows.extend(exceedance_rows("arrival-combined", fs.n, &all, probes)?);
    }
    let arr: Vec<(usize, &[f64], &[f64])> = fluid
        .iter()
        .map(|f| (f.n, f.arrival[0].as_slice(), f.arrival[1].as_slice()))
        .collect();
    fit_and_validate("arrival-fluid-fit", 0.0, &arr, cfg, &mut report)?;
    let ren: Vec<(usize, &[f64], &[f64])> = fluid
        .iter()
        .map(|f| (f.n, f.renewal[0].as_slice(), f.renewal[1].as_slice()))
        .collect();
    fit_and_validate("renewal-fluid-fit", 2.0, &ren, cfg, &mut report)?;
    Ok(report)
}

/// A named pass/fail outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// One line of `fit.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitRow {
    pub metric: Metric,
    pub correction: String,
    pub fit: RateFit,
}

/// Everything one experiment produced.
#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub records: Vec<LadderRecord>,
    pub fits: Vec<FitRow>,
    pub bounds: Option<BoundsReport>,
    pub simulation: Vec<String>,
    pub checks: Vec<Check>,
    pub summary: String,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Rate fits for every metric present, under every correction; queue
/// lengths also get the `√log c_n` normalization.
pub fn fit_all(cfg: &ExperimentConfig, records: &[LadderRecord]) -> Result<Vec<FitRow>> {
    let mut rows = Vec::new();
    for metric in Metric::ALL {
        if !records.iter().any(|r| r.metric == metric) {
            continue;
        }
        for c in Correction::ALL {
            match fit_rate(records, metric, c) {
                Ok(fit) => rows.push(FitRow {
                    metric,
                    correction: c.name().into(),
                    fit,
                }),
                Err(Error::Parameter(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if metric == Metric::Queue {
            let mu = cfg.service_law()?.mean();
            let cn = cfg.cn;
            let p = cfg.p;
            let factor = move |n: f64| cn.eval(n as usize, mu, p).ln().max(f64::MIN_POSITIVE).sqrt();
            if let Ok(fit) = fit_rate_by(records, metric, factor) {
                rows.push(FitRow {
                    metric,
                    correction: "sqrt-log-cn".into(),
                    fit,
                });
            }
        }
    }
    Ok(rows)
}

/// Acceptance checks that apply to the records of a ladder.
pub fn ladder_checks(records: &[LadderRecord], fits: &[FitRow]) -> Vec<Check> {
    let mut checks = Vec::new();
    for f in fits.iter().filter(|f| f.correction == Correction::SqrtLogN.name()) {
        if let Some((lo, hi)) = slope_band(f.metric) {
            checks.push(Check {
                name: format!("{} rate", f.metric.name()),
                pass: (lo..=hi).contains(&f.fit.slope),
                detail: format!("slope {:.4} (stderr {:.4}), band [{lo}, {hi}]", f.fit.slope, f.fit.stderr),
            });
        }
    }
    let kmt = summarize(records, Metric::Kmt);
    if kmt.len() >= 2 {
        let ratios: Vec<f64> = kmt.iter().map(|l| l.median / (l.n as f64).ln()).collect();
        let max = ratios.iter().copied().fold(f64::MIN, f64::max);
        let min = ratios.iter().copied().fold(f64::MAX, f64::min);
        checks.push(Check {
            name: "kmt log-n scale".into(),
            pass: max <= KMT_RATIO_LIMIT * min,
            detail: format!("max m(n)/log n = {max:.4}, min = {min:.4}, limit ratio {KMT_RATIO_LIMIT}"),
        });
    }
    checks
}

/// Summary rows, and the replication-0 trace at each ladder point.
type SimulationOutput = (Vec<String>, Vec<(usize, QueueTrace)>);

fn simulate_only(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    let model = cfg.arrival_model()?;
    let service = cfg.service_law()?;
    let jobs: Vec<(usize, u64)> = cfg
        .ladder
        .iter()
        .flat_map(|&n| (0..cfg.replications as u64).map(move |r| (n, r)))
        .collect();
    let traces: Result<Vec<(usize, u64, QueueTrace)>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let s = build_coupled_sample(n, cfg.p, &model, &service, cfg.seed, rep)?;
            let inputs = QueueInputs {
                n,
                p: cfg.p,
                arrivals: model.clone(),
                service: service.clone(),
                c_n: cfg.c_n(n)?,
            };
            Ok((n, rep, simulate(&inputs, &s)?))
        })
        .collect();
    let mut rows = Vec::new();
    let mut first = Vec::new();
    for (n, rep, tr) in traces? {
        rows.push(format!("{rep},{}", tr.summary_row(n, cfg.p)));
        if rep == 0 {
            first.push((n, tr));
        }
    }
    Ok((rows, first))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let file = dir.join(name);
    std::fs::write(&file, text).map_err(|e| Error::io(&file, e))
}

fn fits_csv(fits: &[FitRow]) -> String {
    let mut out = String::from("metric,correction,slope,intercept,stderr,points\n");
    for f in fits {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            f.metric.name(),
            f.correction,
            f.fit.slope,
            f.fit.intercept,
            f.fit.stderr,
            f.fit.points
        );
    }
    out
}

fn render_summary(cfg: &ExperimentConfig, rep: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {:?}", cfg.kind);
    let _ = writeln!(
        s,
        "seed {}  replications {}  p {}  ladder {:?}",
        cfg.seed, cfg.replications, cfg.p, cfg.ladder
    );
    for metric in Metric::ALL {
        let levels = summarize(&rep.records, metric);
        if levels.is_empty() {
            continue;
        }
        let _ = writeln!(s, "\n{} error", metric.name());
        let _ = writeln!(s, "{:>8} {:>6} {:>12} {:>12}", "n", "reps", "median", "q90");
        for l in levels {
            let _ = writeln!(s, "{:>8} {:>6} {:>12.6} {:>12.6}", l.n, l.count, l.median, l.q90);
        }
    }
    if !rep.fits.is_empty() {
        let _ = writeln!(s, "\nrate fits (log median/correction vs log n)");
        for f in &rep.fits {
            let _ = writeln!(
                s,
                "  {:<20} {:<12} slope {:>8.4}  stderr {:.4}",
                f.metric.name(),
                f.correction,
                f.fit.slope,
                f.fit.stderr
            );
        }
    }
    if let Some(b) = &rep.bounds {
        let _ = writeln!(s, "\nbound validation: {} rows, {} failing", b.rows.len(), b.rows.iter().filter(|r| !r.pass).count());
        for f in &b.fits {
            let _ = writeln!(
                s,
                "  fitted {}: k1 {} k2 {:.5} k3 {:.5} gamma {} shift {}/n",
                f.name, f.params.k1, f.params.k2, f.params.k3, f.params.gamma, f.params.shift
            );
        }
        for note in &b.notes {
            let _ = writeln!(s, "  note: {note}");
        }
    }
    if !rep.simulation.is_empty() {
        let _ = writeln!(s, "\nsimulated {} replications", rep.simulation.len());
    }
    let _ = writeln!(s, "\nchecks");
    if rep.checks.is_empty() {
        let _ = writeln!(s, "  (none apply)");
    }
    for c in &rep.checks {
        let _ = writeln!(s, "  {} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    s
}

/// Runs the experiment and writes its report files into `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::default();
    let out = cfg.out.as_path();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut first_traces = Vec::new();
    match cfg.kind {
        ExperimentKind::ValidateBounds => {
            let b = validate_bounds(cfg)?;
            report.checks.push(Check {
                name: "bound domination".into(),
                pass: b.all_pass(),
                detail: format!("{} of {} rows dominated", b.rows.iter().filter(|r| r.pass).count(), b.rows.len()),
            });
            write(out, "bounds.csv", &validation_csv(&b.rows))?;
            report.bounds = Some(b);
        }
        ExperimentKind::SimulateOnly => {
            let (rows, first) = simulate_only(cfg)?;
            let mut text = format!("rep,{}\n", QueueTrace::SUMMARY_HEADER);
            for r in &rows {
                text.push_str(r);
                text.push('\n');
            }
            write(out, "simulation.csv", &text)?;
            report.simulation = rows;
            first_traces = first;
        }
        _ => {
            report.records = run_ladder(cfg)?;
            report.fits = fit_all(cfg, &report.records)?;
            report.checks = ladder_checks(&report.records, &report.fits);
            write(out, "records.csv", &records_to_csv(&report.records))?;
            write(out, "fit.csv", &fits_csv(&report.fits))?;
        }
    }
    for (n, tr) in &first_traces {
        tr.write_csv(&out.join(format!("trace_n{n}")))?;
    }
    report.summary = render_summary(cfg, &report);
    write(out, "summary.txt", &report.summary)?;
    Ok(report)
}

/// Writes the sample, queue paths and approximants of one replication.
pub fn write_replication(cfg: &ExperimentConfig, n: usize, rep: u64, dir: &Path) -> Result<()> {
    let model = cfg.arrival_model()?;
    let service = cfg.service_law()?;
    let mut sample = build_coupled_sample(n, cfg.p, &model, &service, cfg.seed, rep)?;
    let inputs = QueueInputs {
        n,
        p: cfg.p,
        arrivals: model,
        service,
        c_n: cfg.c_n(n)?,
    };
    let trace = simulate(&inputs, &sample)?;
    let ap = build_approximants(&mut sample, &inputs, &trace, cfg.divisions)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, "sample.csv", &sample.to_csv())?;
    trace.write_csv(&dir.join("queue"))?;
    ap.write_csv(&dir.join("approx"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            ladder: vec![8, 16, 32],
            replications: 3,
            divisions: 256,
            ..Default::default()
        }
    }

    #[test]
    fn single_customer_emits_four_records() {
        let r = run_coupled_replication(&small(ExperimentKind::CoupleAll), 1, 0).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|x| x.error >= 0.0 && x.error.is_finite()));
    }

    #[test]
    fn replications_are_deterministic() {
        let cfg = small(ExperimentKind::CoupleAll);
        let a = run_coupled_replication(&cfg, 20, 2).unwrap();
        let b = run_coupled_replication(&cfg, 20, 2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.metric, x.error), (y.metric, y.error));
        }
        let k = run_kmt_replication(3, 40, 1).unwrap();
        assert_eq!(k.error, run_kmt_replication(3, 40, 1).unwrap().error);
    }

    #[test]
    fn single_metric_kinds() {
        let r = run_coupled_replication(&small(ExperimentKind::CoupleQueue), 10, 0).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].metric, Metric::Queue);
    }

    #[test]
    fn ladder_order_and_checks() {
        let cfg = small(ExperimentKind::KmtEmpirical);
        let recs = run_ladder(&cfg).unwrap();
        assert_eq!(recs.len(), 9);
        assert_eq!((recs[0].n, recs[0].rep), (8, 0));
        assert_eq!((recs[8].n, recs[8].rep), (32, 2));
        let fits = fit_all(&cfg, &recs).unwrap();
        assert_eq!(fits.len(), 3);
        let checks = ladder_checks(&recs, &fits);
        assert_eq!(checks.len(), 1);
    }
}
