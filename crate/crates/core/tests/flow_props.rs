use loja_core::flow::{arc_length_check, halved_step_agreement, integrate_flow, verify_length_bound, FlowOptions, StopReason};
use loja_core::poly::{rat, CompiledGradient};
use loja_core::snc::{compute_constants, detect_snc};
use loja_core::{parse, Polynomial};
use proptest::prelude::*;

const CORPUS: &[&str] = &["x^2", "x^4", "x1*x2", "x^2*y^2", "x^6*y^2", "x^2 + y^4", "x^2 - y^3", "x^2*y^2*z"];

fn start(p: &Polynomial, raw: &[f64]) -> Vec<f64> {
    raw[..p.nvars()].to_vec()
}

fn opts() -> FlowOptions {
    FlowOptions { tol: 1e-8, t_max: 1e8, sigma: Some(1.0), ..FlowOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn energy_decreases_along_every_trajectory(raw in prop::collection::vec(-0.45f64..0.45, 3)) {
        for text in CORPUS {
            let p = parse(text).unwrap();
            let g = CompiledGradient::new(&p);
            let traj = integrate_flow(&g, &start(&p, &raw), &opts()).unwrap();
            prop_assert!(traj.energy_monotone(), "{text}: rise {}", traj.max_energy_increase());
            prop_assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t && w[1].arc_length >= w[0].arc_length));
            prop_assert!(traj.stop_reason != StopReason::StepLimit, "{text}");
        }
    }

    #[test]
    fn halving_the_step_changes_little(raw in prop::collection::vec(-0.4f64..0.4, 3)) {
        for text in ["x^2", "x^2*y^2", "x^2 + y^4", "x^4*y^2"] {
            let p = parse(text).unwrap();
            let g = CompiledGradient::new(&p);
            let o = FlowOptions { tol: 1e-6, ..opts() };
            let diff = halved_step_agreement(&g, &start(&p, &raw), &o, 0.05).unwrap();
            prop_assert!(diff <= 1e-6, "{text}: {diff}");
        }
    }

    #[test]
    fn length_bounded_by_energy_drop(raw in prop::collection::vec(0.05f64..1.0, 3)) {
        for text in ["x^2", "x^2*y^2", "x^6*y^2", "x1^2*x2^2*x3^4"] {
            let p = parse(text).unwrap();
            let r = compute_constants(&detect_snc(&p).unwrap(), 0.5, 10_000, 0).unwrap();
            let k = r.constants.as_ref().unwrap();
            let x0: Vec<f64> = start(&p, &raw).iter().map(|v| v * k.sigma / (p.nvars() as f64).sqrt()).collect();
            let g = CompiledGradient::new(&p);
            let traj = integrate_flow(&g, &x0, &FlowOptions { tol: 1e-10, t_max: 1e9, ..FlowOptions::default() }).unwrap();
            let b = verify_length_bound(&traj, &r.theta, k.c0);
            prop_assert!(b.pass, "{text} from {x0:?}: {} > {}", b.arc_length, b.bound);
        }
    }

    #[test]
    fn unit_speed_in_arc_length(raw in prop::collection::vec(0.1f64..0.4, 3)) {
        for text in ["x^2", "x^2*y^2", "x^2 + y^4", "x^6*y^2"] {
            let p = parse(text).unwrap();
            let g = CompiledGradient::new(&p);
            let x0 = start(&p, &raw);
            let traj = integrate_flow(&g, &x0, &FlowOptions { tol: 1e-8, ..opts() }).unwrap();
            let check = arc_length_check(&g, &x0, 0.8 * traj.arc_length, 2000).unwrap();
            prop_assert!(check.pass(1e-6, 1e-6), "{text}: {check:?}");
        }
    }
}

#[test]
fn quadratic_and_quartic_meet_the_bound() {
    for (text, c) in [("x^2", 2.0), ("x^4", 4.0)] {
        let p = parse(text).unwrap();
        let g = CompiledGradient::new(&p);
        let o = FlowOptions { tol: 1e-20, t_max: 1e14, ..FlowOptions::default() };
        let traj = integrate_flow(&g, &[0.5], &o).unwrap();
        assert!(traj.converged, "{text}");
        assert!((traj.arc_length - 0.5).abs() <= 1e-6, "{text}: {}", traj.arc_length);
        let theta = if text == "x^2" { rat(1, 2) } else { rat(3, 4) };
        let b = verify_length_bound(&traj, &theta, c);
        assert!((b.bound - 0.5).abs() <= 1e-6, "{text}: bound {}", b.bound);
    }
}

#[test]
fn saddle_leaves_the_ball() {
    let g = CompiledGradient::new(&parse("x*y").unwrap());
    let traj = integrate_flow(&g, &[0.3, 0.1], &FlowOptions { sigma: Some(0.5), ..FlowOptions::default() }).unwrap();
    assert_eq!(traj.stop_reason, StopReason::LeftDomain);
    assert!(!traj.converged);
    assert!(traj.energy_monotone());
}
