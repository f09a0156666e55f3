use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use loja_core::blowup::{self, ResolveJson, ResolveOptions};
use loja_core::estimator::{self, EstimateOptions};
use loja_core::flow::{self, CritSet, DistanceOptions, FlowOptions};
use loja_core::morse_bott;
use loja_core::poly::rat_to_f64;
use loja_core::snc::{self, AnalysisJson};
use loja_core::{Function, Objective, Polynomial};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::Common;

const ARC_INTERVALS: usize = 2000;

#[derive(Debug, Default)]
pub struct Outcome {
    /// Resolved parameters echoed into the report.
    pub config: Value,
    pub result: Value,
    pub pass: bool,
    pub checks: Vec<(String, bool)>,
    /// Extra files written under the output directory, in order.
    pub files: Vec<(String, String)>,
    /// Lines for the human-readable format.
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn finish(mut self) -> Self {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|(_, p)| *p);
        self
    }

    pub fn check(&mut self, name: &str, pass: bool) {
        self.checks.push((name.to_string(), pass));
    }
}

pub fn load(text: &str) -> Result<Function> {
    if let Some(f) = Function::builtin(text.trim()) {
        return Ok(f);
    }
    let p = loja_core::parse(text).with_context(|| format!("parsing {text:?}"))?;
    Ok(Function::polynomial(p))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn sigma(c: &Common) -> f64 {
    c.sigma.unwrap_or(snc::DEFAULT_SIGMA)
}

/// `(θ, C₀, critical set, zero set)` for a normal-crossing polynomial.
fn snc_data(p: &Polynomial, sigma: f64, samples: usize, seed: u64) -> Option<(BigRational, f64, CritSet, CritSet)> {
    let mf = snc::detect_snc(p).ok()?;
    let report = snc::compute_constants(&mf, sigma, samples, seed).ok()?;
    let c0 = report.constants.as_ref()?.c0;
    Some((report.theta, c0, flow::snc_crit_set(&mf.exponents), flow::snc_zero_set(&mf.exponents)))
}

pub fn analyze(text: &str, c: &Common) -> Result<Outcome> {
    let sigma = sigma(c);
    let samples = c.samples.unwrap_or(snc::DEFAULT_SAMPLES);
    let f = load(text)?;
    let Some(p) = f.as_polynomial() else {
        let mut out = estimate_function(&f, &EstimateArgs::default(), c)?;
        out.result["note"] = json!("not a polynomial; the inequality is probed by the estimator");
        return Ok(out);
    };
    let mut out = Outcome { config: json!({"sigma": sigma, "samples": samples}), ..Outcome::default() };
    let mf = snc::detect_snc(p)?;
    out.check("normal-crossing", mf.snc_at_origin);
    if !mf.snc_at_origin {
        out.result = json!({
            "snc": false,
            "monomial": mf.exponents,
            "residual": mf.residual.to_string(),
            "note": "residual vanishes at the origin; try `resolve`",
        });
        out.summary.push(format!("not normal crossing: residual {} vanishes at 0", mf.residual));
        return Ok(out.finish());
    }
    let report = snc::compute_constants(&mf, sigma, samples, c.seed)?;
    let check = snc::verify_gradient_inequality(p, &report, samples, c.seed)?;
    out.check("gradient-inequality", check.pass);
    out.summary.push(format!(
        "theta = {}  N = {}  optimal = {}",
        loja_core::poly::rat_string(&report.theta),
        report.total_degree,
        report.optimal
    ));
    if let Some(k) = &report.constants {
        out.summary.push(format!(
            "sigma = {}  m = {:.6}  M = {:.6}  C0 = {:.6e}  min ratio = {:.6e}",
            k.sigma, k.m, k.big_m, k.c0, check.measured_constant
        ));
    }
    out.result = json!({
        "snc": true,
        "monomial": mf.exponents,
        "residual": mf.residual.to_string(),
        "analysis": to_value(&AnalysisJson::new(report, &check)),
        "check": to_value(&check),
    });
    Ok(out.finish())
}

pub fn resolve(text: &str, min_depth: usize, c: &Common) -> Result<Outcome> {
    let sigma = sigma(c);
    let samples = c.samples.unwrap_or(snc::DEFAULT_SAMPLES);
    let max_depth = c.max_depth.unwrap_or(blowup::DEFAULT_MAX_DEPTH);
    let p = loja_core::parse(text).with_context(|| format!("parsing {text:?}"))?;
    let r = blowup::resolve(&p, ResolveOptions { max_depth, min_depth })?;
    let mut out = Outcome {
        config: json!({"sigma": sigma, "samples": samples, "max_depth": max_depth, "min_depth": min_depth}),
        ..Outcome::default()
    };
    let tree = ResolveJson::new(&r);
    out.check("resolution-complete", tree.complete);
    let bounds = match blowup::pull_back_and_bound(&r, sigma, samples, c.seed) {
        Ok(b) => to_value(&b),
        Err(e) => json!({"error": e.to_string()}),
    };
    if let Some([lo, hi]) = &tree.theta_interval {
        out.summary.push(format!("theta in [{lo}, {hi}]  complete = {}", tree.complete));
    }
    for l in &tree.leaves {
        out.summary.push(format!("{}: {}  N = {:?}", l.chart_path, l.residual, l.total_degree));
    }
    out.result = json!({"theta_interval": tree.theta_interval, "tree": to_value(&tree), "bounds": bounds});
    Ok(out.finish())
}

pub fn flow(text: &str, point: &[f64], c: &Common) -> Result<Outcome> {
    let f = load(text)?;
    let sigma = sigma(c);
    let samples = c.samples.unwrap_or(snc::DEFAULT_SAMPLES);
    let tol = c.tol.unwrap_or(flow::DEFAULT_TOL);
    let t_max = c.t_max.unwrap_or(flow::DEFAULT_T_MAX);
    let delta = c.delta.unwrap_or(sigma / 4.0);
    if point.is_empty() {
        bail!("flow needs --point");
    }
    if point.len() != f.dim() {
        bail!("--point has {} coordinates, function has {}", point.len(), f.dim());
    }
    if loja_core::sampling::norm(point) > sigma {
        bail!("start point lies outside the ball of radius {sigma}");
    }
    let mut out = Outcome {
        config: json!({"point": point, "sigma": sigma, "delta": delta, "samples": samples, "tol": tol, "t_max": t_max}),
        ..Outcome::default()
    };
    let data = f.as_polynomial().and_then(|p| snc_data(p, sigma, samples, c.seed));
    let crit = match (&data, f.as_polynomial()) {
        (Some(d), _) => Some(d.2.clone()),
        (None, Some(_)) => Some(CritSet::origin()),
        (None, None) => None,
    };
    let opts = FlowOptions { tol, t_max, sigma: Some(sigma), crit: crit.clone(), ..FlowOptions::default() };
    let traj = flow::integrate_flow(&f, point, &opts)?;
    out.check("converged", traj.converged);
    out.check("energy-monotone", traj.energy_monotone());

    let arc = if traj.arc_length > 0.0 {
        match flow::arc_length_check(&f, point, 0.8 * traj.arc_length, ARC_INTERVALS) {
            Ok(a) => {
                out.check("arc-length-identity", a.pass(1e-6, 1e-6));
                to_value(&a)
            }
            Err(e) => {
                out.check("arc-length-identity", false);
                json!({"error": e.to_string()})
            }
        }
    } else {
        Value::Null
    };

    let mut length = Value::Null;
    let mut distance = Value::Null;
    if let (Some((theta, c0, crit, zero)), Some(p)) = (&data, f.as_polynomial()) {
        let b = flow::verify_length_bound(&traj, theta, *c0);
        out.check("length-bound", b.pass);
        out.summary.push(format!("arc length {:.9}  bound {:.9}", b.arc_length, b.bound));
        length = to_value(&b);
        let dopts = DistanceOptions {
            sigma,
            delta: Some(delta),
            samples,
            seed: c.seed,
            zero_set: Some(zero.clone()),
            gradient_constant: Some(*c0),
            theta_f: None,
        };
        let reports = flow::verify_distance_inequalities(p, crit, theta, &dopts)?;
        for r in &reports {
            match &r.note {
                Some(note) => out.summary.push(format!("{} skipped: {note}", r.inequality_id.as_str())),
                None => out.check(r.inequality_id.as_str(), r.pass),
            }
        }
        distance = to_value(&reports);
    }

    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    out.files.push(("trajectory.csv".into(), String::from_utf8(csv)?));
    let end = traj.end();
    out.summary.push(format!("stop: {:?}  t = {:e}  x = {:?}  E = {:e}", traj.stop_reason, end.t, end.x, end.energy));
    out.result = json!({
        "trajectory": {
            "steps": traj.samples.len(),
            "arc_length": traj.arc_length,
            "converged": traj.converged,
            "stop_reason": to_value(&traj.stop_reason),
            "limit_point": traj.limit_point,
            "snap": to_value(&traj.snap),
            "escape_radius": traj.escape_radius,
            "final_time": end.t,
            "initial_energy": traj.start().energy,
            "final_energy": end.energy,
            "max_energy_increase": traj.max_energy_increase(),
        },
        "arc_length_check": arc,
        "length_bound": length,
        "distance": distance,
    });
    Ok(out.finish())
}

#[derive(Debug, Default, Clone)]
pub struct EstimateArgs {
    pub point: Vec<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub radii: Option<usize>,
    pub prior: Option<PathBuf>,
}

fn parse_rational(s: &str) -> Result<f64> {
    let q: BigRational = s.trim().parse().map_err(|_| anyhow!("bad rational {s:?}"))?;
    Ok(rat_to_f64(&q))
}

/// θ interval from a `resolve` report.
fn prior_interval(path: &PathBuf) -> Result<(f64, f64)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let pair = v["result"]["theta_interval"].as_array().ok_or_else(|| anyhow!("{} has no theta_interval", path.display()))?;
    match pair.as_slice() {
        [lo, hi] => Ok((
            parse_rational(lo.as_str().ok_or_else(|| anyhow!("bad interval"))?)?,
            parse_rational(hi.as_str().ok_or_else(|| anyhow!("bad interval"))?)?,
        )),
        _ => bail!("theta_interval must have two entries"),
    }
}

pub fn estimate(text: &str, args: &EstimateArgs, c: &Common) -> Result<Outcome> {
    estimate_function(&load(text)?, args, c)
}

fn estimate_function(f: &Function, args: &EstimateArgs, c: &Common) -> Result<Outcome> {
    let point = if args.point.is_empty() { vec![0.0; f.dim()] } else { args.point.clone() };
    let opts = EstimateOptions {
        r_min: args.r_min.unwrap_or(estimator::DEFAULT_R_MIN),
        r_max: args.r_max.unwrap_or(estimator::DEFAULT_R_MAX),
        count: args.radii.unwrap_or(estimator::DEFAULT_RADII),
        samples_per_radius: c.samples.unwrap_or(estimator::DEFAULT_SAMPLES),
        seed: c.seed,
    };
    let mut out = Outcome {
        config: json!({
            "point": point,
            "r_min": opts.r_min,
            "r_max": opts.r_max,
            "radii": opts.count,
            "samples": opts.samples_per_radius,
            "prior": args.prior.as_ref().map(|p| p.display().to_string()),
        }),
        ..Outcome::default()
    };
    let est = estimator::estimate_theta(f, &point, &opts)?;
    out.check("no-failure-detected", !est.failure_detected);
    out.summary.push(format!(
        "theta_hat = {:.4}  band = [{:.4}, {:.4}]  failure_detected = {}",
        est.theta_hat, est.band.0, est.band.1, est.failure_detected
    ));
    let consistency = match &args.prior {
        Some(path) => {
            let bound = prior_interval(path)?;
            let v = estimator::compare_with_resolution_bound(&est, bound);
            out.check("consistent-with-prior", v.pass);
            to_value(&v)
        }
        None => Value::Null,
    };
    let mut csv = Vec::new();
    est.write_csv(&mut csv)?;
    out.files.push(("envelope.csv".into(), String::from_utf8(csv)?));
    out.result = json!({"estimate": to_value(&est), "consistency": consistency});
    Ok(out.finish())
}

fn merge(out: &mut Outcome, prefix: &str, sub: Outcome) {
    for (n, p) in sub.checks {
        out.checks.push((format!("{prefix}/{n}"), p));
    }
    out.summary.extend(sub.summary.into_iter().map(|s| format!("{prefix}: {s}")));
    out.files.extend(sub.files);
    out.result[prefix] = sub.result;
    if let (Some(dst), Some(src)) = (out.config.as_object_mut(), sub.config.as_object()) {
        for (k, v) in src {
            dst.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
}

pub fn verify(text: &str, point: &[f64], k: Option<&[usize]>, order: Option<u32>, c: &Common) -> Result<Outcome> {
    let f = load(text)?;
    let mut out = Outcome { config: json!({"k": k, "order": order}), result: json!({}), ..Outcome::default() };
    let Some(p) = f.as_polynomial().cloned() else {
        merge(&mut out, "estimate", estimate_function(&f, &EstimateArgs::default(), c)?);
        return Ok(out.finish());
    };
    let snc_ok = snc::detect_snc(&p).map(|m| m.snc_at_origin).unwrap_or(false);
    if snc_ok {
        merge(&mut out, "analyze", analyze(text, c)?);
    }
    let mut interval = None;
    if p.nvars() == 2 && !snc_ok {
        let sub = resolve(text, 0, c)?;
        interval = sub.result["theta_interval"]
            .as_array()
            .and_then(|a| Some((parse_rational(a[0].as_str()?).ok()?, parse_rational(a[1].as_str()?).ok()?)));
        merge(&mut out, "resolve", sub);
    }
    if snc_ok {
        let mf = snc::detect_snc(&p)?;
        let r = snc::exponent_from_snc(&mf)?;
        interval = Some((0.5, r.theta_f64()));
    }
    let origin = vec![0.0; p.nvars()];
    if loja_core::sampling::norm(&f.gradient(&origin)) < 1e-12 && p.total_degree().unwrap_or(0) > 0 {
        let sub = estimate_function(&f, &EstimateArgs::default(), c)?;
        let est: Option<(f64, f64)> = sub.result["estimate"]["band"].as_array().and_then(|b| Some((b[0].as_f64()?, b[1].as_f64()?)));
        let mut sub = sub;
        if let (Some(bound), Some(band)) = (interval, est) {
            let pass = band.0 <= bound.1 + estimator::CONSISTENCY_TOL && band.1 >= bound.0 - estimator::CONSISTENCY_TOL;
            sub.check("consistent-with-bound", pass);
            sub.result["bound"] = json!([bound.0, bound.1]);
        }
        merge(&mut out, "estimate", sub);
    }
    if let Some(k) = k {
        let mut sub = Outcome::default();
        let report = match order {
            Some(n) => morse_bott::check_generalized_morse_bott(&p, k, n, c.seed)?,
            None => morse_bott::check_morse_bott(&p, k, c.seed)?,
        };
        sub.check(if order.is_some() { "generalized" } else { "morse-bott" }, report.pass);
        sub.summary.push(format!("conditions {:?}  hessian rank {}", report.conditions, report.hessian_rank));
        let mut value = json!({"report": to_value(&report)});
        if report.pass && order.is_some() {
            let samples = c.samples.unwrap_or(morse_bott::CRIT_SAMPLES);
            let (check, cyl) = morse_bott::verify_gmb_gradient_inequality(&p, &report, samples, c.seed)?;
            sub.check("gradient-inequality", check.pass);
            value["check"] = to_value(&check);
            value["cylinder"] = to_value(&cyl);
        }
        sub.result = value;
        merge(&mut out, "morse-bott", sub);
    }
    if !point.is_empty() {
        merge(&mut out, "flow", flow(text, point, c)?);
    }
    Ok(out.finish())
}
