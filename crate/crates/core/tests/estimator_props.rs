use loja_core::estimator::{compare_with_resolution_bound, estimate_theta, EstimateOptions, ExponentEstimate};
use loja_core::poly::rat;
use loja_core::{parse, Function};
use proptest::prelude::*;

fn est(text: &str, seed: u64) -> ExponentEstimate {
    let p = parse(text).unwrap();
    let origin = vec![0.0; p.nvars()];
    estimate_theta(&Function::polynomial(p), &origin, &EstimateOptions { seed, ..EstimateOptions::default() }).unwrap()
}

fn exact(n: &[u32]) -> f64 {
    1.0 - 1.0 / n.iter().sum::<u32>() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn monomials_match_one_minus_inverse_degree(a in 1u32..7, b in 1u32..4, seed in any::<u64>()) {
        let e = est(&format!("x^{a}*y^{b}"), seed);
        let want = exact(&[a, b]).max(0.5);
        prop_assert!((e.theta_hat - want).abs() <= 0.05, "x^{a}*y^{b}: {} vs {want}", e.theta_hat);
        prop_assert!(!e.failure_detected);
    }

    #[test]
    fn monomial_envelope_has_constant_slope(a in 1u32..5, b in 1u32..4, seed in any::<u64>()) {
        let e = est(&format!("x^{a}*y^{b}"), seed);
        let want = exact(&[a, b]).max(0.5);
        for s in &e.slopes[e.slopes.len() / 2..] {
            prop_assert!((s - want).abs() <= 0.02, "x^{a}*y^{b}: slope {s} vs {want}");
        }
    }
}

#[test]
fn doubling_the_function_stays_inside_the_band() {
    for text in ["x^2*y^2", "x^2 - y^3", "x^2 + y^4"] {
        let one = est(text, 0);
        let two = est(&format!("2*({text})"), 0);
        let half = (one.band.1 - one.band.0) / 2.0;
        assert!((one.theta_hat - two.theta_hat).abs() <= half.max(1e-9), "{text}: {} vs {}", one.theta_hat, two.theta_hat);
    }
}

#[test]
fn same_seed_same_estimate() {
    for text in ["x^2 - y^3", "x1*x2"] {
        let a = serde_json::to_string(&est(text, 11)).unwrap();
        let b = serde_json::to_string(&est(text, 11)).unwrap();
        assert_eq!(a, b, "{text}");
    }
}

#[test]
fn worker_count_does_not_change_the_estimate() {
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| serde_json::to_string(&est("x^2 - y^3", 5)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn agrees_with_normal_crossing_formula() {
    for (text, n) in [
        ("x1*x2", vec![1, 1]),
        ("x^2", vec![2]),
        ("x^2*y^2", vec![2, 2]),
        ("x^6*y^2", vec![6, 2]),
        ("x^6*y", vec![6, 1]),
        ("x^3*(1 + y)", vec![3, 0]),
        ("x^2*y*z", vec![2, 1, 1]),
    ] {
        let e = est(text, 0);
        assert!((e.theta_hat - exact(&n)).abs() <= 0.05, "{text}: {}", e.theta_hat);
        let t = rat(1, 1) - rat(1, n.iter().sum::<u32>() as i64);
        let t = loja_core::poly::rat_to_f64(&t);
        assert!(compare_with_resolution_bound(&e, (0.5, t)).pass, "{text}");
    }
}

#[test]
fn off_origin_critical_point() {
    let p = parse("(x - 1)^2*y^2").unwrap();
    let e = estimate_theta(&Function::polynomial(p), &[1.0, 0.0], &EstimateOptions::default()).unwrap();
    assert!((e.theta_hat - 0.75).abs() <= 0.05, "{}", e.theta_hat);
}

#[test]
fn monomial_min_ratio_is_radius_independent() {
    use loja_core::poly::CompiledGradient;
    use loja_core::sampling::{norm, sphere_points};
    for n in [[1u32, 1], [2, 2], [6, 1], [3, 2]] {
        let p = parse(&format!("x^{}*y^{}", n[0], n[1])).unwrap();
        let g = CompiledGradient::new(&p);
        let theta = exact(&n);
        let min_at = |r: f64| {
            sphere_points(&[0.0, 0.0], r, 2000, 9)
                .iter()
                .filter_map(|x| {
                    let e = g.value(x).abs();
                    (e > 0.0).then(|| norm(&g.gradient(x)) / e.powf(theta))
                })
                .fold(f64::INFINITY, f64::min)
        };
        let reference = min_at(1e-1);
        for k in 2..=6 {
            let m = min_at(10f64.powi(-k));
            assert!((m / reference - 1.0).abs() <= 0.02, "{n:?} at 1e-{k}: {m} vs {reference}");
        }
    }
}
