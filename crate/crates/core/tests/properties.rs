mod support;

use inar2::cls::IntegerSums;
use inar2::process::companion;
use inar2::stats::{ks_distance, SampleSummary};
use inar2::{
    derived_sequences, estimate_cls, estimate_rho_beta, putzer_power, simulate, simulate_cir, AutoregressiveParams,
    InnovationModel,
};
use proptest::prelude::*;

fn unit_root_params() -> impl Strategy<Value = AutoregressiveParams> {
    prop_oneof![
        Just(AutoregressiveParams::new(1.0, 0.0).unwrap()),
        Just(AutoregressiveParams::new(0.0, 1.0).unwrap()),
        (1u32..20).prop_map(|i| AutoregressiveParams::unit_root(i as f64 / 20.0).unwrap()),
    ]
}

fn innovation() -> impl Strategy<Value = InnovationModel> {
    prop_oneof![
        (0.2f64..6.0).prop_map(|l| InnovationModel::poisson(l).unwrap()),
        (0.15f64..0.95).prop_map(|p| InnovationModel::geometric(p).unwrap()),
        Just("categorical:0=0.3,1=0.3,5=0.4".parse().unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulation_is_deterministic(p in unit_root_params(), eps in innovation(), n in 1usize..300, seed: u64) {
        prop_assert_eq!(simulate(&p, &eps, n, seed).unwrap(), simulate(&p, &eps, n, seed).unwrap());
    }

    #[test]
    fn cross_sum_identity_is_exact(p in unit_root_params(), eps in innovation(), n in 1usize..300, seed: u64) {
        let t = simulate(&p, &eps, n, seed).unwrap();
        let x = t.values();
        let (mut xv, mut vv) = (0i128, 0i128);
        for k in 2..x.len() {
            let v = x[k] as i128 - x[k - 1] as i128;
            xv += x[k] as i128 * v;
            vv += v * v;
        }
        prop_assert_eq!(2 * xv, (t.last() as i128).pow(2) + vv);
    }

    #[test]
    fn reconstruction_from_u_and_v_is_exact(p in unit_root_params(), eps in innovation(), n in 1usize..300, seed: u64) {
        let t = simulate(&p, &eps, n, seed).unwrap();
        let d = derived_sequences(&t, &eps).unwrap();
        let b = p.beta();
        for k in 1..=n {
            let prev = (d.u[k] - d.v[k]) / (1.0 + b);
            let cur = (d.u[k] + b * d.v[k]) / (1.0 + b);
            prop_assert!((prev - t.x(k as isize - 1) as f64).abs() < 1e-9);
            prop_assert!((cur - t.x(k as isize) as f64).abs() < 1e-9);
            prop_assert_eq!(prev.round() as u64, t.x(k as isize - 1));
        }
        let total: f64 = d.m.iter().map(|m| m + eps.mean()).sum();
        prop_assert!((d.u[n] - total).abs() < 1e-9);
    }

    #[test]
    fn canonical_design_is_exact(p in unit_root_params(), eps in innovation(), n in 1usize..300, seed: u64) {
        let t = simulate(&p, &eps, n, seed).unwrap();
        let s = IntegerSums::of(&t);
        let f = [[s.s11, s.s12], [s.s12, s.s22]];
        let tm = [[1i128, 0], [-1, 1]];
        let mut tf = [[0i128; 2]; 2];
        let mut a = [[0i128; 2]; 2];
        for i in 0..2 { for j in 0..2 { tf[i][j] = tm[i][0] * f[0][j] + tm[i][1] * f[1][j]; } }
        for i in 0..2 { for j in 0..2 { a[i][j] = tf[i][0] * tm[j][0] + tf[i][1] * tm[j][1]; } }
        prop_assert_eq!(s.a_exact(), a);
        prop_assert_eq!(a, support::canonical_design(t.values()));
        prop_assert!(s.det_f() >= 0);
        prop_assert_eq!(s.det_f() > 0 || s.s22 == 0, s.s22 > 0 || s.det_f() == 0);
    }

    #[test]
    fn putzer_agrees_with_naive(beta in 0.0f64..=1.0, k in 0u32..=64) {
        let fast = putzer_power(beta, k);
        let slow = support::naive_power(companion(beta), k);
        for i in 0..2 { for j in 0..2 { prop_assert!((fast[i][j] - slow[i][j]).abs() <= 1e-12); } }
    }

    #[test]
    fn reparametrised_estimator_is_image_of_estimator(p in unit_root_params(), eps in innovation(), n in 10usize..300, seed: u64) {
        let t = simulate(&p, &eps, n, seed).unwrap();
        let r = estimate_cls(&t, eps.mean());
        prop_assume!(r.is_regular());
        let (a, b) = (r.alpha_hat.unwrap(), r.beta_hat.unwrap());
        let (rho, beta) = estimate_rho_beta(&t, eps.mean()).unwrap();
        let scale = 1.0 + a.abs() + b.abs();
        prop_assert!((rho - (a + b)).abs() < 1e-9 * scale);
        prop_assert!((beta - b).abs() < 1e-9 * scale);
    }

    #[test]
    fn ks_distance_is_a_bounded_symmetric_distance(
        a in prop::collection::vec(-5.0f64..5.0, 1..60),
        b in prop::collection::vec(-5.0f64..5.0, 1..60),
    ) {
        let d = ks_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_distance(&b, &a).unwrap());
        prop_assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        let s = SampleSummary::of(&a).unwrap();
        prop_assert!(s.quantiles.windows(2).all(|w| w[0].value <= w[1].value));
    }

    #[test]
    fn cir_paths_stay_nonnegative(beta in 0.05f64..0.95, mu in 0.0f64..4.0, seed: u64) {
        let path = simulate_cir(1.0 - beta, beta, mu, 400, seed).unwrap();
        prop_assert!(path.values.iter().all(|&x| x >= 0.0));
        prop_assert_eq!(path.martingale()[0], 0.0);
    }

    #[test]
    fn innovation_moment_invariants(eps in innovation()) {
        let mu = eps.mean();
        prop_assert!(mu > 0.0);
        prop_assert!(((eps.raw_moment(2) - mu * mu) - eps.variance()).abs() <= 1e-10 * eps.raw_moment(2));
        prop_assert!(eps.raw_moments().iter().all(|m| m.is_finite() && *m >= 0.0));
    }
}
