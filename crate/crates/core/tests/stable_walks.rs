use shc_core::rng::stream;
use shc_core::stable_motion::*;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn gaussian_case_has_variance_two() {
    let spec = StableSpec::new(2.0).unwrap();
    let mut rng = stream(21, 0);
    let sq: Vec<f64> = (0..1_000_000).map(|_| sample_unit(&spec, &mut rng).powi(2)).collect();
    let (m, se) = mean_se(&sq);
    assert!((m - 2.0).abs() < 3.0 * se, "{m}");
}

#[test]
fn cauchy_case_tail() {
    let spec = StableSpec::new(1.0).unwrap();
    let mut rng = stream(22, 0);
    let n = 1_000_000;
    let hits = (0..n).filter(|_| sample_unit(&spec, &mut rng).abs() > 10.0).count();
    let p = hits as f64 / n as f64;
    let want = 1.0 - 2.0 / std::f64::consts::PI * 10f64.atan();
    let se = (want * (1.0 - want) / n as f64).sqrt();
    assert!((p - want).abs() < 3.0 * se, "{p} vs {want}");
}

#[test]
fn characteristic_function_and_symmetry() {
    for (k, alpha) in [0.5, 1.0, 1.5, 1.9].into_iter().enumerate() {
        let spec = StableSpec::new(alpha).unwrap();
        let mut rng = stream(23, k as u64);
        let xs: Vec<f64> = (0..400_000).map(|_| sample_unit(&spec, &mut rng)).collect();
        let cos: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let sin: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let (c, se_c) = mean_se(&cos);
        let (s, se_s) = mean_se(&sin);
        assert!((c - (-1f64).exp()).abs() < 3.0 * se_c, "alpha={alpha}: {c}");
        assert!(s.abs() < 3.0 * se_s, "alpha={alpha}: {s}");
    }
}

#[test]
fn increments_scale_like_dt_to_one_over_alpha() {
    for (k, alpha) in [0.7, 1.5].into_iter().enumerate() {
        let spec = StableSpec::new(alpha).unwrap();
        let dt = 0.01;
        let mut r1 = stream(24, k as u64);
        let mut r2 = stream(25, k as u64);
        let a: Vec<f64> = (0..10_000).map(|_| sample_increment(&spec, dt, &mut r1).unwrap()).collect();
        let b: Vec<f64> = (0..10_000)
            .map(|_| {
                // sum of ten increments of dt/10
                (0..10).map(|_| sample_increment(&spec, dt / 10.0, &mut r2).unwrap()).sum()
            })
            .collect();
        let d = ks(a, b);
        assert!(d < 0.02, "alpha={alpha}: KS {d}");
    }
}

fn survival(dt: f64, n: usize, seed: u64) -> (f64, f64) {
    let spec = StableSpec::new(2.0).unwrap();
    let mut rng = stream(seed, 0);
    let iv = (0.0, std::f64::consts::PI);
    let alive = (0..n)
        .filter(|_| !simulate_exit(&spec, iv, 0.5, dt, 0.2, &mut rng).unwrap().exited)
        .count();
    let p = alive as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

#[test]
fn brownian_exit_matches_eigen_series() {
    let pi = std::f64::consts::PI;
    let exact = brownian_survival((0.0, pi), 0.5, 0.2).unwrap();
    // grid monitoring misses crossings; to first order this is the same as
    // widening the interval by 0.5826·σ·√dt on each side (σ² = 2)
    let corrected = |dt: f64| {
        let s = 0.5826 * (2.0 * dt).sqrt();
        brownian_survival((-s, pi + s), 0.5, 0.2).unwrap()
    };
    let (p1, se1) = survival(1e-3, 100_000, 26);
    let (p4, se4) = survival(2.5e-4, 100_000, 27);
    assert!((p1 - corrected(1e-3)).abs() < 3.0 * se1 + 0.003, "{p1} vs {}", corrected(1e-3));
    assert!((p4 - corrected(2.5e-4)).abs() < 3.0 * se4 + 0.002, "{p4} vs {}", corrected(2.5e-4));
    // quartering dt halves the bias
    let (b1, b4) = (p1 - exact, p4 - exact);
    assert!(b4 > 0.0 && b4 < b1);
    assert!((b1 / b4 - 2.0).abs() < 0.5, "{b1} {b4}");
}

#[test]
fn exit_is_monotone_under_common_random_numbers() {
    for alpha in [0.8, 1.5, 2.0] {
        let spec = StableSpec::new(alpha).unwrap();
        for seed in 0..200 {
            let short = simulate_exit(&spec, (0.0, 1.0), 0.3, 1e-3, 0.1, &mut stream(seed, 1)).unwrap();
            let long = simulate_exit(&spec, (0.0, 1.0), 0.3, 1e-3, 0.5, &mut stream(seed, 1)).unwrap();
            assert!(!short.exited || long.exited);
            let wide = simulate_exit(&spec, (-1.0, 2.0), 0.3, 1e-3, 0.5, &mut stream(seed, 1)).unwrap();
            assert!(wide.tau >= long.tau || !long.exited);
        }
    }
}

#[test]
fn gaussian_sup_constant_converges_from_below() {
    let exact = sup_constant_exact(2.0).unwrap();
    assert!((exact - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    let est = estimate_sup_constant(2.0, 20_000, 1000, 28).unwrap();
    // grid maximum misses ≈ 0.5826·√(2/n) of the true supremum
    let bias = 0.5826 * (2.0f64 / 1000.0).sqrt();
    assert!(
        (est.mean + bias - exact).abs() < est.ci_half_width + 0.01,
        "{} ± {} vs {exact}",
        est.mean,
        est.ci_half_width
    );
}

#[test]
fn finer_grids_raise_the_sup_estimate() {
    let coarse = estimate_sup_constant(1.5, 50_000, 100, 29).unwrap();
    let fine = estimate_sup_constant(1.5, 50_000, 1600, 30).unwrap();
    assert!(fine.mean > coarse.mean, "{} vs {}", fine.mean, coarse.mean);
    assert!(fine.mean < sup_constant_exact(1.5).unwrap() + fine.ci_half_width);
}

#[test]
fn pinned_sup_constant_is_consistent() {
    let exact = sup_constant_exact(1.5).unwrap();
    assert!((exact - 1.279_098_9).abs() < 1e-6);
    assert!(SUP_PIN_ALPHA_1_5 < exact);
    assert!(exact - SUP_PIN_ALPHA_1_5 < SUP_PIN_ALPHA_1_5_CI);
}
