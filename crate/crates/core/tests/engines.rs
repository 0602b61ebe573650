use multichain_sa::engines::{
    run_asynchronous, run_sequential, run_synchronous, EngineConfig, StartMode,
};
use multichain_sa::local_refine::{hybrid_run, NelderMeadConfig};
use multichain_sa::objective_bench::registry_get;
use multichain_sa::sa_core::{AnnealSchedule, Precision};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn desk() -> AnnealSchedule {
    AnnealSchedule::new(100.0, 0.01, 0.95, 50).unwrap()
}

#[test]
fn worker_count_does_not_change_results() {
    let f = registry_get("F3_a").unwrap();
    let sched = AnnealSchedule::new(10.0, 0.1, 0.8, 10).unwrap();
    for precision in [Precision::Double, Precision::Single] {
        for start in [StartMode::Center, StartMode::RandomPerChain] {
            let cfg = EngineConfig::new(sched, 37)
                .with_seed(4)
                .with_start(start)
                .with_precision(precision);
            let a1 = run_asynchronous(f, &cfg.clone().with_workers(1)).unwrap();
            let s1 = run_synchronous(f, &cfg.clone().with_workers(1)).unwrap();
            for w in [2, 3, 8] {
                assert!(
                    a1.same_outcome(&run_asynchronous(f, &cfg.clone().with_workers(w)).unwrap())
                );
                assert!(s1.same_outcome(&run_synchronous(f, &cfg.clone().with_workers(w)).unwrap()));
            }
        }
    }
}

#[test]
fn one_chain_asynchronous_equals_sequential() {
    let f = registry_get("F0_a").unwrap();
    for seed in 0..5 {
        let cfg = EngineConfig::new(desk(), 1).with_seed(seed);
        let v0 = run_sequential(f, &cfg).unwrap();
        let v1 = run_asynchronous(f, &cfg).unwrap();
        assert!(v0.same_outcome(&v1), "seed {seed}");
    }
}

#[test]
fn equal_schedule_means_equal_budget() {
    let f = registry_get("F10_a").unwrap();
    let sched = AnnealSchedule::new(20.0, 0.5, 0.85, 7).unwrap();
    let cfg = EngineConfig::new(sched, 19).with_seed(1);
    let a = run_asynchronous(f, &cfg).unwrap();
    let s = run_synchronous(f, &cfg).unwrap();
    assert_eq!(a.evaluations, s.evaluations);
    assert_eq!(a.evaluations, cfg.expected_evaluations());
    assert_eq!(a.draws, s.draws);
}

#[test]
fn best_value_matches_best_point() {
    let f = registry_get("F1_a").unwrap();
    let sched = AnnealSchedule::new(10.0, 0.1, 0.8, 10).unwrap();
    let cfg = EngineConfig::new(sched, 16).with_seed(2);
    for r in [
        run_asynchronous(f, &cfg).unwrap(),
        run_synchronous(f, &cfg).unwrap(),
    ] {
        assert_eq!(r.best_f, f.value(&r.best_x));
        assert!(f.domain().contains(&r.best_x).unwrap());
    }
    let single = cfg.with_precision(Precision::Single);
    let r = run_synchronous(f, &single).unwrap();
    assert!((r.best_f - f.value(&r.best_x)).abs() <= 1e-4 * r.best_f.abs().max(1.0));
}

#[test]
fn asynchronous_schwefel_8() {
    let f = registry_get("F0_a").unwrap();
    let errors: Vec<f64> = (0..5)
        .map(|seed| {
            let r = run_asynchronous(f, &EngineConfig::new(desk(), 1024).with_seed(seed)).unwrap();
            (r.best_f - f.reference().f_star).abs()
        })
        .collect();
    assert!(median(errors.clone()) <= 1.0, "{errors:?}");
}

#[test]
fn synchronous_schwefel_8() {
    let f = registry_get("F0_a").unwrap();
    let errors: Vec<f64> = (0..5)
        .map(|seed| {
            let r = run_synchronous(f, &EngineConfig::new(desk(), 1024).with_seed(seed)).unwrap();
            (r.best_f - f.reference().f_star).abs()
        })
        .collect();
    assert!(median(errors.clone()) <= 1e-2, "{errors:?}");
}

#[test]
fn hybrid_schwefel_32_location() {
    let f = registry_get("F0_c").unwrap();
    let sched = AnnealSchedule::new(100.0, 1.0, 0.9, 50).unwrap();
    let cfg = EngineConfig::new(sched, 512).with_seed(0);
    let r = hybrid_run(f, &cfg, &sched, &NelderMeadConfig::default()).unwrap();
    let loc = f.location_error(&r.best_x).unwrap();
    assert!(loc <= 1e-6, "{loc}");
    let refine = r.refine.as_ref().unwrap();
    assert_eq!(r.evaluations, r.anneal_evaluations + refine.evaluations);
    assert_eq!(r.anneal_evaluations, cfg.expected_evaluations());
    assert!(r.best_f <= refine.start_f);
}
