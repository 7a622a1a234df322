use proptest::prelude::*;

use shc_core::asymptotics::v_monotone;
use shc_core::spectral::*;
use shc_core::subordinator::*;

fn spec_strategy() -> impl Strategy<Value = LaplaceExponentSpec> {
    prop_oneof![
        (0.05f64..0.99).prop_map(|b| LaplaceExponentSpec::stable(b).unwrap()),
        (0.05f64..0.99, 0.01f64..100.0).prop_map(|(b, k)| LaplaceExponentSpec::tempered_stable(b, k).unwrap()),
        (0.05f64..0.5, 0.5f64..1.0).prop_map(|(a, b)| LaplaceExponentSpec::sum_of_stables(a, b).unwrap()),
    ]
}

proptest! {
    #[test]
    fn phi_is_increasing_and_concave(spec in spec_strategy(), x in 1e-6f64..1e6, h in 0.01f64..10.0) {
        let (a, b, c) = (spec.phi(x).unwrap(), spec.phi(x * (1.0 + h)).unwrap(), spec.phi(x * (1.0 + 2.0 * h)).unwrap());
        prop_assert!(a > 0.0 && b >= a && c >= b);
        prop_assert!(b - a >= (c - b) * (1.0 - 1e-9));
    }

    #[test]
    fn v_is_monotone(x in 0.0f64..5.0, h in 0.0f64..1.0) {
        prop_assert!(v_monotone(x + h) >= v_monotone(x));
        prop_assert!(v_monotone(x) <= (-1f64).exp());
    }

    #[test]
    fn eigen_tables_round_trip(n in 1usize..50, l in 0.1f64..10.0) {
        let eig = bm_interval_eigensystem(&IntervalDomain::new(0.0, l).unwrap(), n).unwrap();
        let back = EigenSystem::parse_table(&eig.to_table()).unwrap();
        prop_assert_eq!(back, eig);
    }

    #[test]
    fn certified_bound_covers_the_full_sum(t in 1e-3f64..10.0, tol in 1e-10f64..1e-2) {
        let eig = bm_interval_eigensystem(&IntervalDomain::new(0.0, 1.0).unwrap(), 20_000).unwrap();
        let w = |l: f64| Ok((-l * t).exp());
        let loose = weighted_series(&eig, w, &SeriesOptions { abs_tol: tol, rel_tol: 0.0 }).unwrap();
        let tight = weighted_series(&eig, w, &SeriesOptions::default()).unwrap();
        prop_assert!(tight.value >= loose.value - 1e-15);
        prop_assert!(tight.value - loose.value <= loose.tail_bound + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn inverse_time_is_monotone(seed in 0u64..1000, beta in 0.3f64..0.9) {
        let spec = LaplaceExponentSpec::stable(beta).unwrap();
        let p = sample_path(&spec, 2.0, 1e-3, seed).unwrap();
        let mut prev = 0.0;
        for k in 0..=40 {
            let e = inverse_at(&p, 0.05 * k as f64).unwrap().value;
            prop_assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn laplace_transform_is_completely_monotone_in_a(t in 1e-3f64..100.0, spec in spec_strategy()) {
        // near-deterministic E_t (tiny β, large κ) defeats Stehfest; that
        // must surface as an error, never as a wrong value
        let mut prev = 1.0 + 1e-12;
        for a in [1e-3, 0.1, 1.0, 10.0, 100.0] {
            match expected_laplace(&spec, a, t) {
                Ok(v) => {
                    prop_assert!(v <= prev + 1e-10 && v >= 0.0, "a={} v={} prev={}", a, v, prev);
                    prev = v;
                }
                Err(e) => prop_assert!(matches!(e, shc_core::Error::IllConditioned { .. }), "{}", e),
            }
        }
    }
}

#[test]
fn inversion_succeeds_on_moderate_parameters() {
    for beta in [0.2, 0.5, 0.8] {
        for kappa in [0.1, 1.0, 10.0] {
            let spec = LaplaceExponentSpec::tempered_stable(beta, kappa).unwrap();
            for t in [1e-3, 0.1, 1.0, 10.0] {
                for a in [0.1, 1.0, 100.0] {
                    expected_laplace(&spec, a, t).unwrap();
                }
            }
        }
    }
}
