use rsqueue::harness::*;

fn small(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        ladder: vec![8, 16, 32, 64],
        replications: 4,
        divisions: 256,
        ..Default::default()
    }
}

fn synthetic(metric: Metric, slope: f64) -> Vec<LadderRecord> {
    let mut out = Vec::new();
    for j in 6..=12 {
        let n = 1usize << j;
        let nf = n as f64;
        for rep in 0..5 {
            out.push(LadderRecord {
                n,
                rep,
                metric,
                error: nf.powf(slope) * nf.ln().sqrt() * (1.0 + 0.01 * rep as f64),
                runtime_ms: 0.0,
                seed: 0,
            });
        }
    }
    out
}

#[test]
fn synthetic_rates_and_checks() {
    let mut recs = Vec::new();
    for m in [Metric::Arrival, Metric::Workload, Metric::ReflectedWorkload, Metric::Queue] {
        recs.extend(synthetic(m, 0.25));
    }
    let f = fit_rate(&recs, Metric::Workload, Correction::SqrtLogN).unwrap();
    assert!((f.slope - 0.25).abs() < 1e-10);
    assert_eq!(f.points, 7);
    let cfg = ExperimentConfig::default();
    let fits = fit_all(&cfg, &recs).unwrap();
    assert!(fits.iter().any(|f| f.correction == "sqrt-log-cn"));
    let checks = ladder_checks(&recs, &fits);
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c.pass));

    recs.retain(|r| r.metric != Metric::Queue);
    recs.extend(synthetic(Metric::Queue, 0.5));
    let fits = fit_all(&cfg, &recs).unwrap();
    let checks = ladder_checks(&recs, &fits);
    assert!(checks.iter().any(|c| !c.pass && c.name.starts_with("queue")));
}

#[test]
fn kmt_scale_check() {
    let mut recs = Vec::new();
    for j in 4..=10 {
        let n = 1usize << j;
        recs.push(LadderRecord {
            n,
            rep: 0,
            metric: Metric::Kmt,
            error: 0.7 * (n as f64).ln(),
            runtime_ms: 0.0,
            seed: 0,
        });
    }
    let c = ladder_checks(&recs, &[]);
    assert_eq!(c.len(), 1);
    assert!(c[0].pass);
    recs[6].error *= 10.0;
    assert!(!ladder_checks(&recs, &[])[0].pass);
}

#[test]
fn one_customer_smoke() {
    let r = run_coupled_replication(&small(ExperimentKind::CoupleAll), 1, 0).unwrap();
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|x| x.error.is_finite() && x.error >= 0.0));
    let r = run_coupled_replication(&small(ExperimentKind::SimulateOnly), 1, 0).unwrap();
    assert_eq!(r.len(), 4);
    let r = run_coupled_replication(&small(ExperimentKind::CoupleQueue), 5, 0).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].metric, Metric::Queue);
}

#[test]
fn ladders_are_reproducible() {
    let cfg = small(ExperimentKind::CoupleAll);
    let strip = |v: Vec<LadderRecord>| -> Vec<(usize, u64, Metric, u64)> {
        v.into_iter().map(|r| (r.n, r.rep, r.metric, r.error.to_bits())).collect()
    };
    let a = strip(run_ladder(&cfg).unwrap());
    let b = strip(run_ladder(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.len(), 4 * 4 * 4);
    let other = strip(run_ladder(&ExperimentConfig { seed: 2, ..cfg }).unwrap());
    assert_ne!(a, other);
}

#[test]
fn deterministic_service_scales_the_arrival_error() {
    let mu = 1.7;
    let cfg = ExperimentConfig {
        p: 1.0,
        service: LawConfig::Deterministic { value: mu },
        ..small(ExperimentKind::CoupleAll)
    };
    for n in [8, 50, 200] {
        for rep in 0..5 {
            let r = run_coupled_replication(&cfg, n, rep).unwrap();
            let a = r.iter().find(|x| x.metric == Metric::Arrival).unwrap().error;
            let w = r.iter().find(|x| x.metric == Metric::Workload).unwrap().error;
            assert!((w - mu * a).abs() < 1e-9 * (1.0 + w), "n {n}: {w} vs {}", mu * a);
        }
    }
}

#[test]
fn experiment_files_are_reproducible() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::CoupleAll);
    cfg.out = d1.path().to_path_buf();
    let rep = run_experiment(&cfg).unwrap();
    assert_eq!(rep.records.len(), 64);
    cfg.out = d2.path().to_path_buf();
    run_experiment(&cfg).unwrap();
    for f in ["fit.csv", "summary.txt"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        let b = std::fs::read(d2.path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let recs = parse_records_csv(&std::fs::read_to_string(d1.path().join("records.csv")).unwrap()).unwrap();
    assert_eq!(recs.len(), 64);
}

#[test]
fn simulate_only_writes_traces() {
    let d = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        out: d.path().to_path_buf(),
        ..small(ExperimentKind::SimulateOnly)
    };
    let rep = run_experiment(&cfg).unwrap();
    assert_eq!(rep.simulation.len(), 16);
    assert!(d.path().join("simulation.csv").exists());
    assert!(d.path().join("trace_n8/queue.csv").exists());
    let dir = d.path().join("rep");
    write_replication(&cfg, 8, 0, &dir).unwrap();
    for f in ["sample.csv", "queue/queue.csv", "approx/X.csv", "approx/E.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn small_bound_validation() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::ValidateBounds,
        ladder: vec![32, 64, 128],
        bounds: BoundsConfig {
            n: 50,
            reps: 1000,
            fit_reps: 300,
            ..Default::default()
        },
        ..Default::default()
    };
    let b = validate_bounds(&cfg).unwrap();
    assert!(!b.rows.is_empty());
    let failing: Vec<_> = b.rows.iter().filter(|r| !r.pass).collect();
    assert!(failing.is_empty(), "{failing:?}");
    assert_eq!(b.fits.len(), 2);
}

#[test]
fn config_round_trip_and_rejection() {
    let cfg = ExperimentConfig {
        sequence: Some(SequenceConfig {
            alternative: LawConfig::Exponential { rate: 2.0 },
            coefficient: 0.5,
        }),
        cn: CnRule::Polynomial { coef: 1.5, exponent: 1.0 },
        ..small(ExperimentKind::CoupleWorkload)
    };
    let back = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    assert!(matches!(
        ExperimentConfig::from_toml_str("bogus = 1\n"),
        Err(rsqueue::Error::Parse(_))
    ));
    assert!(ExperimentConfig::from_toml_str("p = 1.5\n").is_err());
    assert!(ExperimentConfig::from_toml_str("ladder = [8, 4]\n").is_err());
    assert!(ExperimentConfig::from_toml_str("[service]\nfamily = \"gamma\"\nshape = -1\nscale = 1\n").is_err());
    assert_eq!(Metric::parse("reflected-workload").unwrap(), Metric::ReflectedWorkload);
    assert_eq!(Correction::parse("log-n").unwrap(), Correction::LogN);
}
