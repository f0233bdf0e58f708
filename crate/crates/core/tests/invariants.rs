mod common;

use nalgebra::DMatrix;
use privchange::detection::cusum;
use privchange::linear::{best_privacy_full_linear, best_privacy_limited_linear, full_info_rate_linear};
use privchange::mdp::{occupancy_from_policy, policy_from_occupancy, Policy};
use privchange::metrics::{full_info_rate, limited_info_lower_bound, limited_info_rate, privacy_level};
use privchange::synthesis::{dc_gap, q_dc_decomposition};
use proptest::prelude::*;
use rand::Rng;

/// First `n` with `max_{k≤n} Σ_{i=k}^{n} z_i ≥ c`.
fn brute_force_stop(z: &[f64], c: f64) -> Option<usize> {
    (1..=z.len()).find(|&n| (1..=n).any(|k| z[k - 1..n].iter().sum::<f64>() >= c))
}

fn random_joint(seed: u64) -> DMatrix<f64> {
    let mut r = common::rng(seed);
    let m = DMatrix::from_fn(2, 3, |_, _| r.random_range(0.01..1.0));
    let s = m.sum();
    m / s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cusum_matches_brute_force(z in prop::collection::vec(-3.0f64..3.0, 1..60), c in 0.5f64..6.0) {
        let run = cusum(&z, c);
        prop_assert_eq!(run.stopping_time, brute_force_stop(&z, c));
        // Path equals the running max over window sums.
        for (n, w) in run.statistic_path.iter().enumerate() {
            let best = (0..=n).map(|k| z[k..=n].iter().sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((w - best).abs() < 1e-9);
        }
    }

    #[test]
    fn q_equals_f_minus_g(a in any::<u64>(), b in any::<u64>()) {
        let (alpha, beta) = (random_joint(a), random_joint(b.wrapping_add(1)));
        let (q, f, g) = q_dc_decomposition(&alpha, &beta).unwrap();
        prop_assert!((q - (f - g)).abs() < 1e-12);
        prop_assert!(q >= -1e-12 && g >= -1e-12);
    }

    #[test]
    fn convexity_gap_vanishes_at_endpoints(a in any::<u64>()) {
        let pts: Vec<DMatrix<f64>> = (0..4).map(|i| random_joint(a.wrapping_add(i))).collect();
        for lam in [0.0, 1.0] {
            let d = dc_gap((&pts[0], &pts[1]), (&pts[2], &pts[3]), lam).unwrap();
            prop_assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn rate_ordering(seed in any::<u64>(), n in 2usize..5, na in 2usize..4) {
        let mut r = common::rng(seed);
        let m0 = common::random_mdp(n, na, &mut r);
        let m1 = common::random_mdp(n, na, &mut r);
        let pi0 = common::random_policy(n, na, &mut r);
        let pi1 = common::random_policy(n, na, &mut r);
        let i_f = full_info_rate(&m0, &m1, &pi0, &pi1).unwrap();
        let i_l = limited_info_rate(&m0, &m1, &pi0, &pi1).unwrap();
        let lower = limited_info_lower_bound(&m0, &m1, &pi0, &pi1).unwrap();
        prop_assert!(lower >= -1e-12);
        prop_assert!(lower <= i_l + 1e-12);
        prop_assert!(i_l <= i_f + 1e-12);
        prop_assert!((i_l - common::direct_limited(&m0, &m1, &pi0, &pi1)).abs() < 1e-10);
    }

    #[test]
    fn identical_models_and_policies_leak_nothing(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::random_mdp(3, 2, &mut r);
        let pi = common::random_policy(3, 2, &mut r);
        prop_assert_eq!(full_info_rate(&m, &m, &pi, &pi).unwrap(), 0.0);
        prop_assert_eq!(limited_info_rate(&m, &m, &pi, &pi).unwrap(), 0.0);
        prop_assert_eq!(privacy_level(0.0), f64::INFINITY);
    }

    #[test]
    fn occupancy_round_trip(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::random_mdp(4, 3, &mut r);
        let pi = common::random_policy(4, 3, &mut r);
        let xi = occupancy_from_policy(&m, &pi).unwrap();
        prop_assert!((xi.matrix().sum() - 1.0).abs() < 1e-12);
        prop_assert!(xi.stationarity_residual(&m) < 1e-12);
        let back: Policy = policy_from_occupancy(&xi);
        prop_assert!((back.matrix() - pi.matrix()).amax() < 1e-10);
        let mu = common::stationary_power(&common::closed_loop(&m, &pi));
        prop_assert!((xi.state_marginal() - mu).amax() < 1e-10);
    }

    #[test]
    fn mixture_endpoints(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m0 = common::random_mdp(3, 2, &mut r);
        let m1 = common::random_mdp(3, 2, &mut r);
        let at_one = m0.mixture(&m1, 1.0).unwrap();
        let at_zero = m0.mixture(&m1, 0.0).unwrap();
        for u in 0..2 {
            prop_assert!((at_one.transition(u) - m0.transition(u)).amax() < 1e-15);
            prop_assert!((at_zero.transition(u) - m1.transition(u)).amax() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_limited_never_exceeds_full(seed in 0u64..10_000) {
        let sys = common::random_linear(seed);
        let full = best_privacy_full_linear(&sys).unwrap();
        let (lim, _) = best_privacy_limited_linear(&sys).unwrap();
        prop_assert!(lim <= full + 1e-12);
        prop_assert!(lim >= -1e-12);
        // Any offsets cost at least the model term.
        let a = nalgebra::DVector::from_element(sys.m(), 0.3);
        prop_assert!(full_info_rate_linear(&sys, &a, &(-&a)).unwrap() >= full - 1e-12);
    }
}
