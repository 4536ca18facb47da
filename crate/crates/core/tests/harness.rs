mod support;

use inar2::harness::{limit_draws, scaled_statistics};
use inar2::rng::{stream_seed, StreamRng};
use inar2::stats::{ks_distance, skewness};
use inar2::{existence_sweep, run_campaign, AutoregressiveParams, CampaignConfig, Error, InnovationModel};
use rand_distr::{Distribution, StandardNormal};

fn config(a: f64, b: f64, n: usize, reps: usize) -> CampaignConfig {
    let mut c = CampaignConfig::new(
        AutoregressiveParams::new(a, b).unwrap(),
        InnovationModel::poisson(2.0).unwrap(),
        n,
        reps,
        17,
    );
    c.mesh = 1000;
    c.limit_replications = 2000;
    c
}

#[test]
fn ks_null_behaviour_on_split_gaussian_batch() {
    let mut rng = StreamRng::new(8);
    let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let d = ks_distance(&xs[..5000], &xs[5000..]).unwrap();
    assert!(d <= 0.06, "KS {d}");
}

#[test]
fn reports_are_bit_identical_across_runs_and_threading() {
    let mut c = config(0.6, 0.4, 100, 200);
    let a = run_campaign(&c).unwrap();
    let b = run_campaign(&c).unwrap();
    c.parallel = false;
    let s = run_campaign(&c).unwrap();
    let json = |o: &inar2::harness::CampaignOutcome| serde_json::to_string(&o.report).unwrap();
    assert_eq!(json(&a), json(&b));
    assert_eq!(json(&a), json(&s));
    assert_eq!(a.samples, s.samples);
    assert_eq!(a.limit_draws, s.limit_draws);
}

#[test]
fn seeds_change_results() {
    let mut c = config(1.0, 0.0, 100, 200);
    let a = scaled_statistics(&c).unwrap();
    c.master_seed += 1;
    assert_ne!(a, scaled_statistics(&c).unwrap());
}

#[test]
fn too_many_undefined_aborts() {
    // Rare innovations leave most short paths without an estimate.
    let mut c = config(0.6, 0.4, 10, 200);
    c.innovation = "categorical:0=0.98,1=0.02".parse().unwrap();
    match run_campaign(&c) {
        Err(Error::TooManyUndefined { undefined, total }) => {
            assert_eq!(total, 200);
            assert!(undefined > 10);
        }
        other => panic!("expected abort, got {other:?}"),
    }
}

#[test]
fn gaussian_cases_are_symmetric() {
    for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
        let c = config(a, b, 300, 2000);
        let stats = scaled_statistics(&c).unwrap();
        let first: Vec<f64> = stats.iter().flatten().map(|s| s[0]).collect();
        let (s, se) = skewness(&first);
        assert!(s.abs() < 4.0 * se, "({a}, {b}) skewness {s}");
    }
}

#[test]
fn limit_draws_count_no_degeneracies() {
    let c = config(0.6, 0.4, 100, 100);
    let (draws, degenerate) = limit_draws(&c).unwrap();
    assert_eq!(degenerate, 0);
    assert_eq!(draws.len(), 2000);
}

#[test]
fn existence_grows_with_length() {
    let eps = InnovationModel::poisson(2.0).unwrap();
    for (a, b) in [(0.6, 0.4), (1.0, 0.0), (0.0, 1.0)] {
        let p = AutoregressiveParams::new(a, b).unwrap();
        let sweep = existence_sweep(&p, &eps, &[3, 5, 10, 50], 1000, 2, true).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].fraction >= w[0].fraction, "({a}, {b}) {sweep:?}");
        }
        assert!(sweep[3].fraction >= 0.99);
    }
}

#[test]
fn replication_streams_are_index_derived() {
    let c = config(0.6, 0.4, 50, 100);
    let stats = scaled_statistics(&c).unwrap();
    let t = inar2::simulate(&c.params, &c.innovation, 50, stream_seed(17, 42)).unwrap();
    let est = inar2::estimate_cls(&t, 2.0);
    let direct = inar2::scaled_error_statistics(&est, &c.params, &c.class()).unwrap();
    assert_eq!(stats[42], Some(direct));
}
