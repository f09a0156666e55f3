//! The cusp `x^2 - y^3` worked through by hand: a depth-3 blow-up tower,
//! the translated chart at the last exceptional zero, the default resolution,
//! an empirical estimate and the Morse–Bott test.

use anyhow::Result;
use loja_core::blowup::{self, ResolveJson, ResolveOptions};
use loja_core::estimator::{self, EstimateOptions};
use loja_core::morse_bott;
use loja_core::poly::{rat, rat_string};
use loja_core::{parse, Function};
use serde_json::json;

use crate::commands::Outcome;
use crate::Common;

pub const CUSP: &str = "x^2 - y^3";

/// Engine chart variables and the names used in the hand computation.
pub const RENAMING: &[(&str, &str)] = &[
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

pub const STEPS: &[(&str, &str)] = &[
    ("root/1", "u^2*v^2 - v^3"),
    ("root/2", "a^2 - a^3*b^3"),
    ("root/1/2", "r^4*s^2 - r^3*s^3"),
    ("root/2/1", "c^2*d^2 - c^3*d^6"),
    ("root/2/1/1", "g^2*h^4 - g^3*h^9"),
    ("root/1/2/2", "alpha^6*beta^2 - alpha^6*beta^3"),
];

const LEAF: &str = "root/1/2/2";

pub fn run(c: &Common) -> Result<Outcome> {
    let mut out = Outcome { config: json!({"input": CUSP, "tower_depth": 3}), ..Outcome::default() };
    let p = parse(CUSP)?;

    let tower = blowup::resolve(&p, ResolveOptions { max_depth: 3, min_depth: 3 })?;
    let mut steps = Vec::new();
    for (path, expected) in STEPS {
        let node = tower.tree.node(path).ok_or_else(|| anyhow::anyhow!("missing chart {path}"))?;
        let renamed = node.total_transform.rename(RENAMING);
        let ok = renamed == parse(expected)?;
        out.check(&format!("transform {path}"), ok);
        steps.push(json!({
            "chart_path": path,
            "engine": node.total_transform.to_string(),
            "renamed": renamed.to_string(),
            "expected": expected,
            "match": ok,
        }));
    }

    let leaf = tower.leaf(LEAF).ok_or_else(|| anyhow::anyhow!("missing leaf {LEAF}"))?;
    let bound = leaf.bound.as_ref();
    out.check("leaf monomial (6,2)", leaf.monomial == [6, 2]);
    out.check("leaf residual 1 - beta", leaf.residual.rename(RENAMING) == parse("1 - beta")?);
    out.check("leaf N = 8", bound.map(|b| b.total_degree) == Some(8));
    out.check("leaf bound 7/8", bound.map(|b| b.theta_bound.clone()) == Some(rat(7, 8)));

    let point = tower.points.iter().find(|q| q.chart_path == LEAF && q.location == rat(1, 1));
    let pb = point.and_then(|q| q.bound.as_ref());
    out.check("translated N = 7", pb.map(|b| b.total_degree) == Some(7));
    out.check("translated bound 6/7", pb.map(|b| b.theta_bound.clone()) == Some(rat(6, 7)));
    let degree = |b: Option<&blowup::PointBound>| b.map_or("-".to_string(), |b| b.total_degree.to_string());
    out.summary.push(format!(
        "leaf {LEAF}: {}  N = {}; at beta = 1: N = {}",
        leaf.total_transform.rename(RENAMING),
        degree(bound),
        degree(pb)
    ));

    let full = blowup::resolve(&p, ResolveOptions::default())?;
    let interval = full.theta_interval();
    out.check("default resolution complete", full.complete());
    out.check("default interval [1/2, 8/9]", interval == Some((rat(1, 2), rat(8, 9))));

    let f = Function::polynomial(p.clone());
    let est = estimator::estimate_theta(&f, &[0.0, 0.0], &EstimateOptions { seed: c.seed, ..EstimateOptions::default() })?;
    let hand = estimator::compare_with_resolution_bound(&est, (0.5, 0.875));
    out.check("estimate near 2/3", (0.62..=0.72).contains(&est.theta_hat));
    out.check("estimate inside [1/2, 7/8]", hand.pass);
    out.summary.push(format!("theta_hat = {:.4}", est.theta_hat));

    let mb = morse_bott::check_morse_bott(&p, &[], c.seed)?;
    let y_axis = mb.hessian_kernel == vec![vec!["0".to_string(), "1".to_string()]];
    out.check("not Morse-Bott", !mb.pass);
    out.check("Hessian kernel is the y-axis", y_axis);

    out.result = json!({
        "renaming": RENAMING.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "steps": steps,
        "leaf": {
            "chart_path": LEAF,
            "total_transform": leaf.total_transform.rename(RENAMING).to_string(),
            "monomial": leaf.monomial,
            "residual": leaf.residual.rename(RENAMING).to_string(),
            "N": bound.map(|b| b.total_degree),
            "theta_bound": bound.map(|b| rat_string(&b.theta_bound)),
        },
        "translated": point.map(|q| json!({
            "location": format!("beta = {}", rat_string(&q.location)),
            "transform": q.translated.rename(RENAMING).to_string(),
            "monomial": pb.map(|b| b.monomial.clone()),
            "N": pb.map(|b| b.total_degree),
            "theta_bound": pb.map(|b| rat_string(&b.theta_bound)),
        })),
        "default_resolution": serde_json::to_value(ResolveJson::new(&full))?,
        "estimate": {
            "theta_hat": est.theta_hat,
            "band": [est.band.0, est.band.1],
            "failure_detected": est.failure_detected,
            "consistency": serde_json::to_value(&hand)?,
        },
        "morse_bott": serde_json::to_value(&mb)?,
    });
    Ok(out.finish())
}
