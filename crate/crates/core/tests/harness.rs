use subrip::harness::{
    run, run_maurey_verify, run_recovery_phase, run_rip_exact, run_rip_scaling, ExperimentConfig, ExperimentKind,
    Format, InputKind,
};
use subrip::Error;

fn config(kind: ExperimentKind, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.seed = seed;
    c
}

#[test]
fn reruns_are_byte_identical() {
    let mut c = config(ExperimentKind::RipExact, 5);
    c.grid.n = vec![16];
    c.grid.k = vec![2];
    c.grid.q = vec![6];
    c.trials = Some(4);
    let a = run(&c).unwrap();
    c.threads = Some(1);
    assert_eq!(a, run(&c).unwrap());

    let mut s = config(ExperimentKind::RipScaling, 9);
    s.grid.n = vec![32];
    s.grid.k = vec![2];
    s.rip.resamples = 4;
    assert_eq!(run(&s).unwrap(), run(&s).unwrap());

    let mut m = config(ExperimentKind::MaureyVerify, 3);
    m.grid.n = vec![64];
    m.trials = Some(4);
    m.format = Some(Format::Json);
    assert_eq!(run(&m).unwrap(), run(&m).unwrap());
}

#[test]
fn every_row_carries_seed_and_hash() {
    let mut c = config(ExperimentKind::RecoveryPhase, 77);
    c.grid.n = vec![32];
    c.grid.k = vec![2];
    c.grid.q = vec![8, 16];
    c.trials = Some(3);
    let t = run_recovery_phase(&c).unwrap();
    let hash = c.hash();
    assert!(t.rows.iter().all(|r| r.seed == 77 && r.config_hash == hash));
    // output and thread settings do not change the hash
    c.threads = Some(2);
    c.format = Some(Format::Json);
    assert_eq!(c.hash(), hash);
    c.seed = 78;
    assert_ne!(c.hash(), hash);
}

#[test]
fn timing_is_stripped_unless_requested() {
    let mut c = config(ExperimentKind::RipExact, 1);
    c.grid.n = vec![8];
    c.grid.k = vec![2];
    c.grid.q = vec![4];
    c.trials = Some(2);
    assert!(run_rip_exact(&c).unwrap().rows.iter().all(|r| r.elapsed_ms.is_none()));
    c.record_timing = true;
    assert!(run_rip_exact(&c).unwrap().rows.iter().all(|r| r.elapsed_ms.is_some()));
}

#[test]
fn infeasible_exact_grid_is_refused() {
    let mut c = config(ExperimentKind::RipExact, 1);
    c.grid.n = vec![128];
    c.grid.k = vec![8];
    c.grid.q = vec![16];
    match run_rip_exact(&c) {
        Err(Error::Config(msg)) => assert!(msg.contains("budget"), "{msg}"),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn full_sample_maurey_passes_everywhere() {
    let mut c = config(ExperimentKind::MaureyVerify, 12);
    c.grid.n = vec![64];
    c.grid.q = vec![64];
    c.trials = Some(20);
    let b = run_maurey_verify(&c).unwrap();
    assert_eq!(b.summaries[0].end_to_end_pass_rate, 1.0);
    for t in &b.trials {
        let e = &t.end_to_end;
        assert!((e.lhs - e.rhs).abs() <= 1e-12 * e.rhs, "{e:?}");
    }
}

#[test]
fn basis_inputs_give_identical_statistics() {
    let mut c = config(ExperimentKind::MaureyVerify, 4);
    c.grid.n = vec![64];
    c.grid.q = vec![20];
    c.trials = Some(64);
    c.maurey.input = InputKind::Basis;
    let b = run_maurey_verify(&c).unwrap();
    let lhs: Vec<f64> = b.trials.iter().map(|t| t.end_to_end.lhs).collect();
    // every DFT column is flat, so the sampled energy is exactly 1/N for any rows
    for (t, &l) in b.trials.iter().zip(&lhs) {
        assert!((l - lhs[0]).abs() <= 1e-12 * lhs[0], "basis {:?}", t.basis_index);
        assert!(t.end_to_end.passed);
    }
    let seen: std::collections::BTreeSet<_> = b.trials.iter().filter_map(|t| t.basis_index).collect();
    assert_eq!(seen.len(), 64);
}

#[test]
fn recovery_boundaries() {
    let mut c = config(ExperimentKind::RecoveryPhase, 21);
    c.grid.n = vec![32];
    c.grid.k = vec![1, 4, 16, 32];
    c.grid.q = vec![32];
    c.trials = Some(10);
    let t = run_recovery_phase(&c).unwrap();
    for r in &t.rows {
        assert_eq!(r.success_rate, 1.0, "k={} {:?}", r.k, r.solver);
    }

    c.grid.k = vec![2, 4];
    c.grid.q = vec![1];
    c.trials = Some(40);
    let t = run_recovery_phase(&c).unwrap();
    for r in &t.rows {
        assert!(r.success_rate <= 0.05, "k={} {:?} {}", r.k, r.solver, r.success_rate);
    }
}

#[test]
fn recovery_success_grows_with_rows() {
    let mut c = config(ExperimentKind::RecoveryPhase, 31);
    c.grid.n = vec![128];
    c.grid.k = vec![4];
    c.grid.q = vec![8, 16, 32, 64, 128];
    c.trials = Some(60);
    let t = run_recovery_phase(&c).unwrap();
    for solver in &c.recovery.solvers {
        let rates: Vec<f64> = t.rows.iter().filter(|r| &r.solver == solver).map(|r| r.success_rate).collect();
        for w in rates.windows(2) {
            let n = 60.0;
            let sigma = ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / n).sqrt();
            assert!(w[1] >= w[0] - 3.0 * sigma.max(1.0 / n), "{solver:?} {rates:?}");
        }
        assert_eq!(*rates.last().unwrap(), 1.0);
    }
}

#[test]
fn unsparse_scaling_saturates() {
    let mut c = config(ExperimentKind::RipScaling, 2);
    c.grid.n = vec![8];
    c.grid.k = vec![8];
    c.grid.eps = vec![0.05];
    c.rip.resamples = 10;
    let t = run_rip_scaling(&c).unwrap();
    let r = &t.rows[0];
    assert!(r.saturated, "{r:?}");
    assert_eq!(r.q_star, 16 * 8);
}

#[test]
fn scaling_threshold_is_reached_when_not_saturated() {
    let mut c = config(ExperimentKind::RipScaling, 8);
    c.grid.n = vec![32];
    c.grid.k = vec![2];
    c.grid.eps = vec![0.5];
    c.rip.resamples = 10;
    let t = run_rip_scaling(&c).unwrap();
    let r = &t.rows[0];
    assert!(!r.saturated);
    assert!(r.success_rate >= c.rip.success_fraction);
    assert!(r.q_star >= 2);
}
