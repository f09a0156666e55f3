//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use loja_core::blowup::{resolve, ResolveOptions};
use loja_core::estimator::{compare_with_resolution_bound, counterexample_check, estimate_theta, EstimateOptions};
use loja_core::flow::{
    arc_length_check, distance_exponents, integrate_flow, snc_crit_set, snc_zero_set, verify_distance_inequalities, verify_length_bound,
    CritSet, DistanceOptions, FlowOptions,
};
use loja_core::morse_bott::{check_generalized_morse_bott, check_morse_bott};
use loja_core::poly::{rat, CompiledGradient};
use loja_core::snc::{
    compute_constants, detect_snc, exponent_from_snc, generalized_young, generalized_young_exact, verify_gradient_inequality,
};
use loja_core::{parse, Function, Polynomial};
use num_rational::BigRational;
use rand::Rng;

const SEED: u64 = 0;

/// Chart variables of the engine and the letters of the hand computation.
const RENAMING: &[(&str, &str)] = &[
    ("u_1", "u"),
    ("v_1", "v"),
    ("a_2", "a"),
    ("b_2", "b"),
    ("a_12", "r"),
    ("b_12", "s"),
    ("u_21", "c"),
    ("v_21", "d"),
    ("a_122", "alpha"),
    ("b_122", "beta"),
    ("u_211", "g"),
    ("v_211", "h"),
];

const TOWER: &[(&str, &str)] = &[
    ("root/1", "u^2*v^2 - v^3"),
    ("root/2", "a^2 - a^3*b^3"),
    ("root/1/2", "r^4*s^2 - r^3*s^3"),
    ("root/2/1", "c^2*d^2 - c^3*d^6"),
    ("root/2/1/1", "g^2*h^4 - g^3*h^9"),
    ("root/1/2/2", "alpha^6*beta^2 - alpha^6*beta^3"),
];

/// SNC corpus with the total degree `N` worked out by hand.
const SNC_CORPUS: &[(&str, u32)] =
    &[("x1*x2", 2), ("x^2", 2), ("x^2*y^2", 4), ("x^6*y^2", 8), ("x^6*y", 7), ("x^3", 3), ("x^4", 4), ("x^5", 5), ("x^6", 6)];

type Verdict = Result<String, String>;

/// Name, check and time budget in seconds.
type Criterion = (&'static str, fn() -> Verdict, u64);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn poly(text: &str) -> Polynomial {
    parse(text).expect("corpus parses")
}

fn cusp_tower() -> Verdict {
    let tower = resolve(&poly("x^2 - y^3"), ResolveOptions { max_depth: 3, min_depth: 3 }).map_err(|e| e.to_string())?;
    for (path, expected) in TOWER {
        let node = tower.tree.node(path).ok_or(format!("missing chart {path}"))?;
        let got = node.total_transform.rename(RENAMING);
        ensure(got == poly(expected), format!("{path}: {got} != {expected}"))?;
    }
    let leaf = tower.leaf("root/1/2/2").ok_or("missing leaf root/1/2/2")?;
    let b = leaf.bound.as_ref().ok_or("leaf has no bound")?;
    ensure(leaf.monomial == [6, 2], format!("monomial {:?}", leaf.monomial))?;
    ensure(leaf.residual.rename(RENAMING) == poly("1 - beta"), format!("residual {}", leaf.residual))?;
    ensure(b.total_degree == 8, format!("N = {}", b.total_degree))?;
    ensure(b.theta_bound == rat(7, 8), format!("bound {}", b.theta_bound))?;
    Ok("6 transforms equal, leaf (6,2), residual 1 - beta, N = 8, bound 7/8".into())
}

fn translated_chart() -> Verdict {
    let tower = resolve(&poly("x^2 - y^3"), ResolveOptions { max_depth: 3, min_depth: 3 }).map_err(|e| e.to_string())?;
    let q =
        tower.points.iter().find(|q| q.chart_path == "root/1/2/2" && q.location == rat(1, 1)).ok_or("no exceptional point at beta = 1")?;
    let b = q.bound.as_ref().ok_or("translated chart not normal crossing")?;
    ensure(b.total_degree == 7, format!("N = {}", b.total_degree))?;
    ensure(b.theta_bound == rat(6, 7), format!("bound {}", b.theta_bound))?;
    Ok(format!("monomial {:?}, N = 7, bound 6/7", b.monomial))
}

fn exponent_formulas() -> Verdict {
    for (text, n) in SNC_CORPUS {
        let r = exponent_from_snc(&detect_snc(&poly(text)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let want = BigRational::from_integer(1.into()) - rat(1, *n as i64);
        ensure(r.theta == want, format!("{text}: theta {} != {want}", r.theta))?;
        ensure(r.optimal == (*n == 2), format!("{text}: optimal = {}", r.optimal))?;
    }
    Ok(format!("{} inputs exact", SNC_CORPUS.len()))
}

fn constructive_inequality() -> Verdict {
    let mut worst = f64::INFINITY;
    for (text, _) in SNC_CORPUS {
        let p = poly(text);
        let r = compute_constants(&detect_snc(&p).map_err(|e| e.to_string())?, 0.5, 10_000, SEED).map_err(|e| e.to_string())?;
        let c = verify_gradient_inequality(&p, &r, 10_000, SEED).map_err(|e| e.to_string())?;
        let c0 = c.predicted_constant.unwrap_or(f64::NAN);
        ensure(c.pass, format!("{text}: min ratio {} < C0 {c0}", c.measured_constant))?;
        worst = worst.min(c.measured_constant / c0);
    }
    Ok(format!("all pass, smallest min/C0 = {worst:.3}"))
}

fn young_suite() -> Verdict {
    let mut g = loja_core::sampling::rng(SEED);
    for _ in 0..10_000 {
        let c = g.gen_range(1..=6);
        let a: Vec<f64> = (0..c).map(|_| g.gen_range(1e-3..10.0)).collect();
        let p: Vec<f64> = (0..c).map(|_| g.gen_range(1.0..12.0)).collect();
        let (lhs, rhs) = generalized_young(&a, &p);
        ensure(lhs <= rhs * (1.0 + 1e-12), format!("a = {a:?}, p = {p:?}: {lhs} > {rhs}"))?;
    }
    for _ in 0..100 {
        let c = g.gen_range(1..=4);
        let a: Vec<BigRational> = (0..c).map(|_| rat(g.gen_range(1..40), g.gen_range(1..9))).collect();
        let p: Vec<u32> = (0..c).map(|_| g.gen_range(1..6)).collect();
        ensure(generalized_young_exact(&a, &p), format!("exact violation at a = {a:?}, p = {p:?}"))?;
    }
    Ok("10000 float tuples, 100 exact tuples, no violations".into())
}

fn estimate(text: &str) -> Result<loja_core::estimator::ExponentEstimate, String> {
    let p = poly(text);
    let origin = vec![0.0; p.nvars()];
    estimate_theta(&Function::polynomial(p), &origin, &EstimateOptions { seed: SEED, ..EstimateOptions::default() })
        .map_err(|e| e.to_string())
}

fn empirical_exponents() -> Verdict {
    let a = estimate("x1*x2")?.theta_hat;
    ensure((0.45..=0.55).contains(&a), format!("x1*x2: {a}"))?;
    let cusp = estimate("x^2 - y^3")?;
    let b = cusp.theta_hat;
    ensure((0.62..=0.72).contains(&b), format!("cusp: {b}"))?;
    ensure((b - 2.0 / 3.0).abs() <= 0.05, format!("cusp: {b} far from 2/3"))?;
    ensure(compare_with_resolution_bound(&cusp, (0.5, 0.875)).pass, "cusp outside [1/2, 7/8]")?;
    let c = estimate("x^2*y^2")?.theta_hat;
    ensure((0.70..=0.80).contains(&c), format!("x^2*y^2: {c}"))?;
    Ok(format!("x1*x2 {a:.4}, cusp {b:.4}, x^2*y^2 {c:.4}"))
}

fn counterexamples() -> Verdict {
    let opts = EstimateOptions { seed: SEED, ..EstimateOptions::default() };
    for id in ["haraux", "delellis"] {
        let r = counterexample_check(id, &opts).map_err(|e| e.to_string())?;
        ensure(r.estimate.failure_detected, format!("{id}: failure not detected (theta_hat {})", r.estimate.theta_hat))?;
    }
    let corpus = ["x1*x2", "x^2", "x^2*y^2", "x^6*y^2", "x^6*y", "x^3", "x^4", "x^5", "x^6", "x^2 - y^3", "x^2 + y^4"];
    for text in corpus {
        let e = estimate(text)?;
        ensure(!e.failure_detected, format!("{text}: false alarm (theta_hat {})", e.theta_hat))?;
    }
    Ok(format!("both counterexamples flagged, {} polynomials clean", corpus.len()))
}

fn flow_length() -> Verdict {
    let tight = FlowOptions { tol: 1e-20, t_max: 1e14, ..FlowOptions::default() };
    for (text, theta, c) in [("x^2", rat(1, 2), 2.0), ("x^4", rat(3, 4), 4.0)] {
        let g = CompiledGradient::new(&poly(text));
        let traj = integrate_flow(&g, &[0.5], &tight).map_err(|e| e.to_string())?;
        ensure(traj.converged, format!("{text}: not converged"))?;
        let b = verify_length_bound(&traj, &theta, c);
        ensure((traj.arc_length - 0.5).abs() <= 1e-6, format!("{text}: arc length {}", traj.arc_length))?;
        ensure((b.bound - 0.5).abs() <= 1e-6, format!("{text}: bound {}", b.bound))?;
        ensure(b.arc_length <= b.bound + 1e-6, format!("{text}: {} > {}", b.arc_length, b.bound))?;
    }
    let corpus: &[(&str, &[f64])] = &[
        ("x^2", &[0.5]),
        ("x^4", &[0.5]),
        ("x^2*y^2", &[0.3, 0.4]),
        ("x^6*y^2", &[0.3, 0.3]),
        ("x^6*y", &[0.3, 0.3]),
        ("x^2 + y^4", &[0.2, 0.2]),
        ("x1*x2", &[0.3, 0.1]),
    ];
    let mut worst: f64 = 0.0;
    for (text, x0) in corpus {
        let g = CompiledGradient::new(&poly(text));
        let traj =
            integrate_flow(&g, x0, &FlowOptions { tol: 1e-8, sigma: Some(1.0), ..FlowOptions::default() }).map_err(|e| e.to_string())?;
        ensure(traj.energy_monotone(), format!("{text}: energy rises by {}", traj.max_energy_increase()))?;
        let check = arc_length_check(&g, x0, 0.8 * traj.arc_length, 2000).map_err(|e| e.to_string())?;
        ensure(check.pass(1e-6, 1e-6), format!("{text}: {check:?}"))?;
        worst = worst.max(check.max_q_rel_error);
    }
    Ok(format!("x^2 and x^4 lengths 0.5, {} trajectories monotone, worst Q' error {worst:.1e}", corpus.len()))
}

fn distance_inequalities() -> Verdict {
    let cases: Vec<(&str, BigRational, CritSet, Option<CritSet>)> = vec![
        ("x^2", rat(1, 2), snc_crit_set(&[2]), Some(snc_zero_set(&[2]))),
        ("x^2*y^2", rat(3, 4), snc_crit_set(&[2, 2]), Some(snc_zero_set(&[2, 2]))),
        ("x^2 + y^4", rat(3, 4), CritSet::origin(), None),
    ];
    let mut c1 = f64::NAN;
    for (text, theta, crit, zero) in cases {
        let opts = DistanceOptions { seed: SEED, zero_set: zero, ..DistanceOptions::default() };
        let reports = verify_distance_inequalities(&poly(text), &crit, &theta, &opts).map_err(|e| e.to_string())?;
        let want = distance_exponents(&theta, None);
        let one = BigRational::from_integer(1.into());
        ensure(want[0] == (&one - &theta).recip(), "alpha formula")?;
        ensure(want[1] == (rat(2, 1) * (&one - (&one + &theta) / rat(2, 1))).recip(), "beta formula")?;
        ensure(want[2] == &theta / (&one - &theta), "mu formula")?;
        ensure(reports.len() == 4, format!("{text}: {} reports", reports.len()))?;
        for (r, e) in reports.iter().zip(&want) {
            ensure(&r.exponent == e, format!("{text}: {:?} exponent {}", r.inequality_id, r.exponent))?;
            ensure(
                r.measured_constant > 0.0 && r.measured_constant.is_finite(),
                format!("{text}: {:?} measured {}", r.inequality_id, r.measured_constant),
            )?;
        }
        if text == "x^2" {
            c1 = reports[0].measured_constant;
        }
    }
    ensure((c1 - 1.0).abs() <= 1e-9, format!("x^2: C1 = {c1}"))?;
    Ok(format!("12 constants positive, C1(x^2) = {c1}"))
}

fn morse_bott_battery() -> Verdict {
    let sphere = check_morse_bott(&poly("x^2 + y^2"), &[], SEED).map_err(|e| e.to_string())?;
    ensure(sphere.pass, "x^2 + y^2 not Morse-Bott")?;
    let cusp = check_morse_bott(&poly("x^2 - y^3"), &[], SEED).map_err(|e| e.to_string())?;
    ensure(!cusp.pass, "cusp reported Morse-Bott")?;
    ensure(cusp.hessian_kernel == vec![vec!["0".to_string(), "1".to_string()]], format!("kernel {:?}", cusp.hessian_kernel))?;
    let b = check_generalized_morse_bott(&poly("x^3 + x^2*y^5"), &[1], 3, SEED).map_err(|e| e.to_string())?;
    ensure(!b.conditions.b, "x^3 + x^2*y^5: condition (b) holds")?;
    ensure(!b.pass, "x^3 + x^2*y^5 passes")?;
    Ok(format!("x^2 + y^2 true, cusp kernel y-axis, x^3 + x^2*y^5 (b) fails: {}", b.witness.unwrap_or_default()))
}

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        ("cusp blow-up tower", cusp_tower, 1),
        ("translated chart at beta = 1", translated_chart, 1),
        ("exponent formulas", exponent_formulas, 1),
        ("constructive gradient inequality", constructive_inequality, 10),
        ("generalized Young inequality", young_suite, 5),
        ("empirical exponents", empirical_exponents, 90),
        ("counterexample detection", counterexamples, 30),
        ("flow length and monotonicity", flow_length, 10),
        ("distance inequalities", distance_inequalities, 20),
        ("Morse-Bott battery", morse_bott_battery, 1),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        let slow = took > Duration::from_secs(*limit);
        let (ok, detail) = match verdict {
            Ok(d) if !slow => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit} s budget")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name} ({:.2} s): {detail}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
