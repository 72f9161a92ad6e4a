use ait_core::hsic::{
    hsic_statistic, hsic_test, hsic_test_gamma, hsic_test_large_scale, hsic_test_permutation, median_bandwidth,
    HsicConfig, HsicMethod,
};
use ait_core::rng::rng_from_seed;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

fn normals(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Kolmogorov-Smirnov distance of `p` from Uniform(0, 1).
fn ks_uniform(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

// Asymptotic 1% critical value is 1.628 / sqrt(n). The permutation p-value
// lives on a grid of width 1/(P+1), which adds at most that much distance.
fn ks_critical(reps: usize, grid: f64) -> f64 {
    1.628 / (reps as f64).sqrt() + grid
}

fn method(m: HsicMethod) -> HsicConfig {
    HsicConfig {
        method: Some(m),
        ..HsicConfig::default()
    }
}

#[test]
fn permutation_p_values_are_uniform_under_independence() {
    let mut rng = rng_from_seed(1);
    let cfg = HsicConfig {
        permutations: 200,
        ..method(HsicMethod::Permutation)
    };
    let p: Vec<f64> = (0..1000u64)
        .map(|s| {
            let (a, b) = (normals(60, &mut rng), normals(60, &mut rng));
            hsic_test_permutation(&a, &b, &HsicConfig { seed: s, ..cfg })
                .unwrap()
                .p_value
        })
        .collect();
    let d = ks_uniform(p);
    assert!(d <= ks_critical(1000, 1.0 / 201.0), "KS distance {d}");
}

#[test]
fn gamma_p_values_are_uniform_under_independence() {
    let mut rng = rng_from_seed(2);
    let p: Vec<f64> = (0..1000)
        .map(|_| {
            let (a, b) = (normals(100, &mut rng), normals(100, &mut rng));
            hsic_test_gamma(&a, &b, &method(HsicMethod::Gamma)).unwrap().p_value
        })
        .collect();
    let d = ks_uniform(p);
    assert!(d <= ks_critical(1000, 0.0), "KS distance {d}");
}

#[test]
fn large_scale_p_values_are_uniform_under_independence() {
    let mut rng = rng_from_seed(3);
    let p: Vec<f64> = (0..1000u64)
        .map(|s| {
            let (a, b) = (normals(200, &mut rng), normals(200, &mut rng));
            let cfg = HsicConfig {
                seed: s,
                ..method(HsicMethod::LargeScale)
            };
            hsic_test_large_scale(&a, &b, &cfg).unwrap().p_value
        })
        .collect();
    let d = ks_uniform(p);
    assert!(d <= ks_critical(1000, 0.0), "KS distance {d}");
}

#[test]
fn large_scale_size_at_n_500() {
    let mut rng = rng_from_seed(4);
    let rejected = (0..400u64)
        .filter(|&s| {
            let (a, b) = (normals(500, &mut rng), normals(500, &mut rng));
            let cfg = HsicConfig {
                seed: s,
                ..method(HsicMethod::LargeScale)
            };
            hsic_test(&a, &b, &cfg).unwrap().p_value < 0.05
        })
        .count() as f64
        / 400.0;
    assert!((0.02..=0.10).contains(&rejected), "size {rejected}");
}

/// Decisions of the three methods at n = 300 on mixed trials: half
/// independent, half with a nonlinear dependence of varying strength.
#[test]
fn methods_agree_at_n_300() {
    let mut rng = rng_from_seed(5);
    let (mut gamma_agree, mut large_agree) = (0, 0);
    let trials = 200;
    for t in 0..trials as u64 {
        let a = normals(300, &mut rng);
        let e = normals(300, &mut rng);
        let s = if t % 2 == 0 {
            0.0
        } else {
            0.2 + 0.6 * (t % 10) as f64 / 10.0
        };
        let b: Vec<f64> = a.iter().zip(&e).map(|(x, e)| s * x * x + e).collect();
        let perm = hsic_test(
            &a,
            &b,
            &HsicConfig {
                seed: t,
                ..method(HsicMethod::Permutation)
            },
        )
        .unwrap();
        let gam = hsic_test(&a, &b, &method(HsicMethod::Gamma)).unwrap();
        let large = hsic_test(
            &a,
            &b,
            &HsicConfig {
                seed: t,
                ..method(HsicMethod::LargeScale)
            },
        )
        .unwrap();
        let reject = |p: f64| p < 0.05;
        gamma_agree += (reject(perm.p_value) == reject(gam.p_value)) as usize;
        large_agree += (reject(perm.p_value) == reject(large.p_value)) as usize;
    }
    assert!(
        gamma_agree as f64 / trials as f64 >= 0.9,
        "gamma agreement {gamma_agree}/{trials}"
    );
    assert!(
        large_agree as f64 / trials as f64 >= 0.9,
        "large-scale agreement {large_agree}/{trials}"
    );
}

#[test]
fn dependent_pair_dominates_shuffled_pair() {
    let mut rng = rng_from_seed(6);
    let a = normals(100, &mut rng);
    let mut shuffled = a.clone();
    shuffled.shuffle(&mut rng);
    let s = median_bandwidth(&a).unwrap();
    let same = hsic_statistic(&a, &a, s, s).unwrap();
    let indep = hsic_statistic(&a, &shuffled, s, s).unwrap();
    assert!(same > 0.0 && same >= 10.0 * indep, "{same} vs {indep}");
}

#[test]
fn auto_method_switches_at_threshold() {
    let cfg = HsicConfig::default();
    assert_eq!(cfg.resolve_method(1999), HsicMethod::Permutation);
    assert_eq!(cfg.resolve_method(2000), HsicMethod::LargeScale);
}

#[test]
fn permutation_p_value_is_never_zero() {
    let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let res = hsic_test_permutation(&a, &a, &method(HsicMethod::Permutation)).unwrap();
    assert!((res.p_value - 1.0 / 501.0).abs() < 1e-15);
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (8usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistic_is_symmetric((a, b) in pair(), sa in 0.1f64..3.0, sb in 0.1f64..3.0) {
        let ab = hsic_statistic(&a, &b, sa, sb).unwrap();
        let ba = hsic_statistic(&b, &a, sb, sa).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
    }

    #[test]
    fn statistic_is_invariant_to_joint_permutation((a, b) in pair(), seed in any::<u64>()) {
        let mut idx: Vec<usize> = (0..a.len()).collect();
        idx.shuffle(&mut rng_from_seed(seed));
        let pa: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
        let pb: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
        let s0 = hsic_statistic(&a, &b, 1.0, 1.3).unwrap();
        let s1 = hsic_statistic(&pa, &pb, 1.0, 1.3).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-12 * (1.0 + s0.abs()));
    }

    #[test]
    fn statistic_and_bandwidth_are_shift_invariant((a, b) in pair(), c in -100.0f64..100.0) {
        let shifted: Vec<f64> = a.iter().map(|x| x + c).collect();
        let s0 = hsic_statistic(&a, &b, 0.7, 1.1).unwrap();
        let s1 = hsic_statistic(&shifted, &b, 0.7, 1.1).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-9 * (1.0 + s0.abs()));
        if let (Ok(m0), Ok(m1)) = (median_bandwidth(&a), median_bandwidth(&shifted)) {
            prop_assert!((m0 - m1).abs() <= 1e-9 * (1.0 + m0));
        }
    }

    #[test]
    fn statistic_is_non_negative((a, b) in pair()) {
        prop_assert!(hsic_statistic(&a, &b, 1.0, 1.0).unwrap() >= -1e-15);
    }
}
