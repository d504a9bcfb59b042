mod common;

use asymlab::asymptotics::{
    asymptotic_limit, asymptotic_limit_contraction, l_asymptotic_surrogate, orbit_mean, LimitMode,
};
use asymlab::matrix::inner;
use asymlab::{random, ComplexMatrix, Params};
use common::{mixed_contraction, similar_to_unitary, similar_to_unitary_oracle};
use proptest::prelude::*;
use rand::Rng;

fn quad(a: &ComplexMatrix, x: &[asymlab::C64]) -> f64 {
    inner(x, &a.mat_vec(x)).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contraction_limit_invariants(seed in any::<u64>(), n in 2usize..8, b_norm in 0.05f64..0.6) {
        let mut rng = random::rng(seed);
        let ud = rng.gen_range(0..=n);
        let t = mixed_contraction(n, ud, b_norm, &mut rng);
        let p = Params::default();
        let r = asymptotic_limit_contraction(&t, &p).unwrap();
        // shift invariance
        prop_assert!(r.residual <= 10.0 * p.tol);
        prop_assert_eq!(r.monotone, Some(true));
        // norm floor
        if r.norm_a > r.kernel_threshold() {
            prop_assert!(r.norm_a >= 1.0 - 10.0 * p.tol);
        }
        prop_assert_eq!(r.kernel_dim, n - ud);
        // orbit identity ⟨ATx, Tx⟩ = ⟨Ax, x⟩
        let x = random::unit_vector(n, &mut rng);
        let tx = t.mat_vec(&x);
        prop_assert!((quad(&r.a, &tx) - quad(&r.a, &x)).abs() <= 10.0 * p.tol);
    }

    #[test]
    fn surrogate_agrees_with_monotone_route(seed in any::<u64>(), n in 2usize..6, b_norm in 0.05f64..0.6) {
        let mut rng = random::rng(seed);
        let ud = rng.gen_range(1..=n);
        let t = mixed_contraction(n, ud, b_norm, &mut rng);
        let p = Params::default();
        let mono = asymptotic_limit_contraction(&t, &p).unwrap();
        let sur = l_asymptotic_surrogate(&t, &p).unwrap();
        prop_assert_eq!(sur.mode, LimitMode::AlmostConvergent);
        prop_assert!((&mono.a - &sur.a).hermitian_op_norm() <= 10.0 * p.tol);
    }

    #[test]
    fn surrogate_matches_oracle_and_orbit_means(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = random::rng(seed);
        let (t, x) = similar_to_unitary(n, 10.0, &mut rng);
        let p = Params::default();
        let r = asymptotic_limit(&t, &p).unwrap();
        prop_assert_eq!(r.mode, LimitMode::AlmostConvergent);
        let oracle = similar_to_unitary_oracle(&x);
        prop_assert!((&r.a - &oracle).hermitian_op_norm() <= 1e-6 * oracle.op_norm());
        prop_assert!(r.residual <= 10.0 * p.tol * r.norm_a.max(1.0));
        prop_assert!(r.norm_a >= 1.0 - 10.0 * p.tol);
        // Cesàro mean of ‖Tⁿx‖² over a long window
        let mean = orbit_mean(&t, &ComplexMatrix::identity(n), 1 << 14);
        let v = random::unit_vector(n, &mut rng);
        prop_assert!((quad(&mean, &v) - quad(&r.a, &v)).abs() <= 1e-2 * r.norm_a);
    }

    #[test]
    fn unitary_conjugation_moves_the_limit(seed in any::<u64>(), n in 2usize..6, b_norm in 0.05f64..0.6) {
        let mut rng = random::rng(seed);
        let t = mixed_contraction(n, n / 2, b_norm, &mut rng);
        let u = random::unitary(n, &mut rng);
        let d = asymlab::asymptotics::unitary_conjugation_check(&t, &u, &Params::default()).unwrap();
        prop_assert!(d <= 1e-8);
    }
}
