//! Negative gradient flow `ẋ = -∇E(x)` and the inequalities it certifies.

mod rk45;

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use rk45::{integrate, Control, Outcome, StepControl};

use crate::objective::Objective;
use crate::poly::{rat_to_f64, PolyError, Polynomial};
use crate::report::{InequalityCheckReport, InequalityId};
use crate::sampling::{ball_points, norm};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_T_MAX: f64 = 1e9;
pub const ENERGY_SLACK: f64 = 1e-9;
pub const LENGTH_SLACK: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("non-finite gradient at t = {0}")]
    NonFinite(f64),
    #[error("starting point has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step size control failed at t = {0}")]
    StepFailure(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GradientBelowTol,
    MaxTime,
    LeftDomain,
    /// The integrator's step budget ran out before `t_max`.
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
    pub arc_length: f64,
}

/// Set used for distances and for snapping limit points.
#[derive(Debug, Clone, PartialEq)]
pub enum CritSet {
    /// Union of coordinate subspaces, each given by its free coordinates.
    Subspaces(Vec<Vec<usize>>),
    Points(Vec<Vec<f64>>),
}

impl CritSet {
    /// The origin in `R^d`.
    pub fn origin() -> Self {
        CritSet::Subspaces(vec![vec![]])
    }

    pub fn nearest(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            CritSet::Subspaces(list) => list
                .iter()
                .map(|free| (0..x.len()).map(|i| if free.contains(&i) { x[i] } else { 0.0 }).collect::<Vec<f64>>())
                .min_by(|a, b| dist2(a, x).total_cmp(&dist2(b, x))),
            CritSet::Points(pts) => pts.iter().min_by(|a, b| dist2(a, x).total_cmp(&dist2(b, x))).cloned(),
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest(x).map_or(f64::INFINITY, |p| dist2(&p, x).sqrt())
    }

    fn within(&self, radius: f64) -> CritSet {
        match self {
            CritSet::Subspaces(_) => self.clone(),
            CritSet::Points(pts) => CritSet::Points(pts.iter().filter(|p| norm(p) <= radius).cloned().collect()),
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snap {
    pub point: Vec<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<FlowSample>,
    pub arc_length: f64,
    pub limit_point: Option<Vec<f64>>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub snap: Option<Snap>,
    /// Largest distance from the start-ball center seen along the path.
    pub escape_radius: f64,
}

impl Trajectory {
    pub fn start(&self) -> &FlowSample {
        &self.samples[0]
    }

    pub fn end(&self) -> &FlowSample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// Largest energy increase between consecutive samples.
    pub fn max_energy_increase(&self) -> f64 {
        self.samples.windows(2).map(|w| w[1].energy - w[0].energy).fold(0.0, f64::max)
    }

    pub fn energy_monotone(&self) -> bool {
        self.max_energy_increase() <= ENERGY_SLACK
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.samples.first().map_or(0, |s| s.x.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("x_{i}")));
        header.extend(["E".to_string(), "grad_norm".to_string(), "arc_length".to_string()]);
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row = vec![fmt_f64(s.t)];
            row.extend(s.x.iter().map(|v| fmt_f64(*v)));
            row.extend([fmt_f64(s.energy), fmt_f64(s.grad_norm), fmt_f64(s.arc_length)]);
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub t_max: f64,
    /// Radius of the working ball around `center`; `None` disables the check.
    pub sigma: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub step: StepControl,
    /// Set used to snap the limit point.
    pub crit: Option<CritSet>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: DEFAULT_TOL, t_max: DEFAULT_T_MAX, sigma: None, center: None, step: StepControl::default(), crit: None }
    }
}

/// Integrates the flow from `x0` and records every accepted step.
///
/// The arc length is carried as an extra state component with `ṡ = ‖∇E‖`.
pub fn integrate_flow(e: &dyn Objective, x0: &[f64], opts: &FlowOptions) -> Result<Trajectory, FlowError> {
    let d = e.dim();
    if x0.len() != d {
        return Err(FlowError::Dimension { expected: d, got: x0.len() });
    }
    if !(opts.tol > 0.0) || !(opts.t_max > 0.0) {
        return Err(FlowError::InvalidArgument("tol and t_max must be positive".into()));
    }
    let center = opts.center.clone().unwrap_or_else(|| vec![0.0; d]);
    let sample_at = |t: f64, x: &[f64], s: f64| -> Result<FlowSample, FlowError> {
        let g = e.gradient(x);
        let grad_norm = norm(&g);
        let energy = e.value(x);
        if !grad_norm.is_finite() || !energy.is_finite() {
            return Err(FlowError::NonFinite(t));
        }
        Ok(FlowSample { t, x: x.to_vec(), energy, grad_norm, arc_length: s })
    };
    let first = sample_at(0.0, x0, 0.0)?;
    let mut escape = dist2(x0, &center).sqrt();
    let mut samples = vec![first];
    let mut stop = None;
    let mut failure = None;
    if samples[0].grad_norm < opts.tol {
        stop = Some(StopReason::GradientBelowTol);
    } else {
        let mut y0 = x0.to_vec();
        y0.push(0.0);
        let rhs = |y: &[f64], dy: &mut [f64]| {
            let g = e.gradient(&y[..d]);
            for i in 0..d {
                dy[i] = -g[i];
            }
            dy[d] = norm(&g);
        };
        let mut step = opts.step;
        step.atol = step.atol.min(0.01 * opts.tol);
        let outcome = integrate(rhs, &y0, 0.0, opts.t_max, &step, |t, y| {
            let s = match sample_at(t, &y[..d], y[d]) {
                Ok(s) => s,
                Err(err) => {
                    failure = Some(err);
                    return Control::Stop;
                }
            };
            let r = dist2(&y[..d], &center).sqrt();
            escape = escape.max(r);
            let below = s.grad_norm < opts.tol;
            samples.push(s);
            if below {
                stop = Some(StopReason::GradientBelowTol);
                return Control::Stop;
            }
            if opts.sigma.is_some_and(|sig| r > sig) {
                stop = Some(StopReason::LeftDomain);
                return Control::Stop;
            }
            Control::Continue
        });
        if let Some(err) = failure {
            return Err(err);
        }
        match outcome {
            Outcome::NonFinite => return Err(FlowError::NonFinite(samples.last().unwrap().t)),
            Outcome::StepFailure => return Err(FlowError::StepFailure(samples.last().unwrap().t)),
            Outcome::Finished => stop = stop.or(Some(StopReason::MaxTime)),
            Outcome::StepLimit => stop = Some(StopReason::StepLimit),
            Outcome::Stopped => {}
        }
    }
    let stop_reason = stop.expect("stop reason set");
    let end = samples.last().unwrap();
    let converged = stop_reason == StopReason::GradientBelowTol;
    let limit_point = converged.then(|| end.x.clone());
    let snap = match (&limit_point, &opts.crit) {
        (Some(x), Some(c)) => c.nearest(x).map(|p| Snap { distance: dist2(&p, x).sqrt(), point: p }),
        _ => None,
    };
    Ok(Trajectory { arc_length: end.arc_length, samples, limit_point, converged, stop_reason, snap, escape_radius: escape })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthBound {
    pub arc_length: f64,
    pub bound: f64,
    /// `bound - arc_length`.
    pub margin: f64,
    pub pass: bool,
}

/// Checks `length ≤ (E(x0) - E(x∞))^{1-θ} / ((1-θ) C)` with 1% slack.
pub fn verify_length_bound(traj: &Trajectory, theta: &BigRational, c: f64) -> LengthBound {
    let th = rat_to_f64(theta);
    let drop = (traj.start().energy - traj.end().energy).max(0.0);
    let bound = drop.powf(1.0 - th) / ((1.0 - th) * c);
    let arc_length = traj.arc_length;
    LengthBound {
        arc_length,
        bound,
        margin: bound - arc_length,
        pass: traj.converged && c > 0.0 && arc_length <= bound * (1.0 + LENGTH_SLACK),
    }
}

/// Flow run twice with maximal steps `h` and `h/2`; returns the distance
/// between the two limit points.
pub fn halved_step_agreement(e: &dyn Objective, x0: &[f64], opts: &FlowOptions, h: f64) -> Result<f64, FlowError> {
    let mut a = opts.clone();
    a.step.max_step = h;
    let mut b = opts.clone();
    b.step.max_step = h / 2.0;
    let ta = integrate_flow(e, x0, &a)?;
    let tb = integrate_flow(e, x0, &b)?;
    match (ta.limit_point, tb.limit_point) {
        (Some(p), Some(q)) => Ok(dist2(&p, &q).sqrt()),
        _ => Err(FlowError::InvalidArgument("flow did not converge".into())),
    }
}

/// Evidence for the arc-length reparameterization `y' = -∇E/‖∇E‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcLengthCheck {
    pub points_checked: usize,
    /// Largest relative deviation of `dQ/ds` from `-‖∇E‖`.
    pub max_q_rel_error: f64,
    /// Largest deviation of `‖dy/ds‖` from 1.
    pub max_speed_error: f64,
    pub s_max: f64,
}

impl ArcLengthCheck {
    pub fn pass(&self, q_tol: f64, speed_tol: f64) -> bool {
        self.points_checked > 0 && self.max_q_rel_error <= q_tol && self.max_speed_error <= speed_tol
    }
}

/// Integrates the arc-length flow on a uniform grid in `s` and compares
/// Richardson-extrapolated central differences of `Q(s) = E(y(s))` and `y(s)`
/// with `-‖∇E‖` and unit speed.
pub fn arc_length_check(e: &dyn Objective, x0: &[f64], s_max: f64, intervals: usize) -> Result<ArcLengthCheck, FlowError> {
    let d = e.dim();
    if intervals < 4 {
        return Err(FlowError::InvalidArgument("need at least 4 grid intervals".into()));
    }
    let ds = s_max / intervals as f64;
    let ctl = StepControl { rtol: 1e-13, atol: 1e-15, ..StepControl::default() };
    let rhs = |y: &[f64], dy: &mut [f64]| {
        let g = e.gradient(y);
        let n = norm(&g);
        for i in 0..d {
            dy[i] = -g[i] / n;
        }
    };
    let mut grid = vec![x0.to_vec()];
    let mut y = x0.to_vec();
    for k in 0..intervals {
        let mut last = y.clone();
        let out = integrate(rhs, &y, k as f64 * ds, (k + 1) as f64 * ds, &ctl, |_, yy| {
            last = yy.to_vec();
            Control::Continue
        });
        match out {
            Outcome::Finished => {}
            Outcome::NonFinite => return Err(FlowError::NonFinite((k + 1) as f64 * ds)),
            Outcome::StepLimit | Outcome::StepFailure | Outcome::Stopped => return Err(FlowError::StepFailure((k + 1) as f64 * ds)),
        }
        y = last;
        grid.push(y.clone());
    }
    let q: Vec<f64> = grid.iter().map(|p| e.value(p)).collect();
    let g0 = norm(&e.gradient(x0));
    let mut checked = 0;
    let mut q_err: f64 = 0.0;
    let mut v_err: f64 = 0.0;
    for i in 2..=intervals - 2 {
        let g = norm(&e.gradient(&grid[i]));
        if g < 1e-6 * g0 {
            continue;
        }
        let rich = |f: &dyn Fn(usize) -> f64| {
            let dh = (f(i + 1) - f(i - 1)) / (2.0 * ds);
            let d2h = (f(i + 2) - f(i - 2)) / (4.0 * ds);
            (4.0 * dh - d2h) / 3.0
        };
        let dq = rich(&|j| q[j]);
        q_err = q_err.max((dq + g).abs() / g);
        let speed = (0..d).map(|c| rich(&|j| grid[j][c]).powi(2)).sum::<f64>().sqrt();
        v_err = v_err.max((speed - 1.0).abs());
        checked += 1;
    }
    Ok(ArcLengthCheck { points_checked: checked, max_q_rel_error: q_err, max_speed_error: v_err, s_max })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceOptions {
    pub sigma: f64,
    /// Sample radius; defaults to `sigma / 4`.
    pub delta: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Zero set for the β-check when it differs from the critical set.
    pub zero_set: Option<CritSet>,
    /// Gradient-inequality constant on `B_σ`, used for predicted constants.
    pub gradient_constant: Option<f64>,
    /// Exponent of `‖∇E‖²` used by the γ-check; defaults to `1 - 1/(2μ)`.
    pub theta_f: Option<BigRational>,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { sigma: 0.5, delta: None, samples: 10_000, seed: 0, zero_set: None, gradient_constant: None, theta_f: None }
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exponents `(α, β, μ, γ)` for a gradient exponent `θ` and the exponent
/// `θ_F` of `‖∇E‖²`.
pub fn distance_exponents(theta: &BigRational, theta_f: Option<&BigRational>) -> [BigRational; 4] {
    let one = BigRational::one();
    let alpha = (&one - theta).recip();
    let theta_sq = (&one + theta) / rational(2, 1);
    let beta = (rational(2, 1) * (&one - &theta_sq)).recip();
    let mu = theta / (&one - theta);
    let default_f = &one - (rational(2, 1) * &mu).recip();
    let tf = theta_f.cloned().unwrap_or(default_f);
    let gamma = (rational(2, 1) * (&one - tf)).recip();
    [alpha, beta, mu, gamma]
}

/// Samples `B_δ` and measures the constants of the four distance inequalities.
pub fn verify_distance_inequalities(
    e: &Polynomial,
    crit: &CritSet,
    theta: &BigRational,
    opts: &DistanceOptions,
) -> Result<Vec<InequalityCheckReport>, FlowError> {
    let th = rat_to_f64(theta);
    if !(0.5..1.0).contains(&th) {
        return Err(FlowError::InvalidArgument(format!("theta must lie in [1/2, 1), got {th}")));
    }
    let delta = opts.delta.unwrap_or(opts.sigma / 4.0);
    let radii = (opts.sigma, Some(delta));
    let crit = crit.within(opts.sigma);
    let zero = opts.zero_set.clone().unwrap_or_else(|| crit.clone()).within(opts.sigma);
    let [alpha, beta, mu, gamma] = distance_exponents(theta, opts.theta_f.as_ref());
    let g = crate::poly::CompiledGradient::new(e);
    let pts = ball_points(e.nvars(), delta, opts.samples, opts.seed);
    struct Row {
        e: f64,
        grad: f64,
        d_crit: f64,
        d_zero: f64,
    }
    let rows: Vec<Row> = pts
        .par_iter()
        .map(|x| Row { e: g.value(x), grad: norm(&g.gradient(x)), d_crit: crit.distance(x), d_zero: zero.distance(x) })
        .collect();
    let min_ratio = |num: &dyn Fn(&Row) -> f64, den: &dyn Fn(&Row) -> f64, exp: f64| -> (f64, usize) {
        rows.iter()
            .filter(|r| den(r) > 0.0 && den(r).is_finite())
            .map(|r| num(r) / den(r).powf(exp))
            .fold((f64::INFINITY, 0), |(m, n), v| (m.min(v), n + 1))
    };
    let nonneg = rows.iter().all(|r| r.e >= 0.0);
    let c0 = opts.gradient_constant;
    let a = rat_to_f64(&alpha);
    let predicted_c1 = c0.map(|c| ((1.0 - th) * c).powf(a));
    let mut out = Vec::new();

    if nonneg {
        let (m, n) = min_ratio(&|r| r.e, &|r| r.d_crit, a);
        out.push(InequalityCheckReport::new(InequalityId::DistanceCritical, alpha.clone(), m, predicted_c1, n, radii));
    } else {
        out.push(InequalityCheckReport::aborted(
            InequalityId::DistanceCritical,
            alpha.clone(),
            radii,
            "E takes negative values on the sample ball".into(),
        ));
    }

    let b = rat_to_f64(&beta);
    let theta_sq = (1.0 + th) / 2.0;
    let predicted_c2 = c0.map(|c| ((1.0 - theta_sq) * 2.0 * c).powf(1.0 / (1.0 - theta_sq)).sqrt());
    let (m, n) = min_ratio(&|r| r.e.abs(), &|r| r.d_zero, b);
    out.push(InequalityCheckReport::new(InequalityId::DistanceZero, beta, m, predicted_c2, n, radii));

    let u = rat_to_f64(&mu);
    if nonneg {
        let predicted = c0.zip(predicted_c1).map(|(c, c1)| c * c1.powf(th));
        let (m, n) = min_ratio(&|r| r.grad, &|r| r.d_crit, u);
        out.push(InequalityCheckReport::new(InequalityId::GradientDistance, mu, m, predicted, n, radii));
    } else {
        out.push(InequalityCheckReport::aborted(
            InequalityId::GradientDistance,
            mu,
            radii,
            "E takes negative values on the sample ball".into(),
        ));
    }

    // β-check on F = ‖∇E‖² against the critical set, then square roots.
    let gm = rat_to_f64(&gamma);
    let (m_f, n) = min_ratio(&|r| r.grad * r.grad, &|r| r.d_crit, 2.0 * gm);
    out.push(InequalityCheckReport::new(InequalityId::GradientDistanceAnalytic, gamma, m_f.sqrt(), None, n, radii));
    Ok(out)
}

/// Critical set of `x^n · unit` near the origin as a union of coordinate
/// subspaces: `{x_i = 0}` for `n_i ≥ 2` and `{x_i = x_j = 0}` for active `i ≠ j`.
pub fn snc_crit_set(exponents: &[u32]) -> CritSet {
    let d = exponents.len();
    let active: Vec<usize> = (0..d).filter(|&i| exponents[i] > 0).collect();
    let mut list: Vec<Vec<usize>> = Vec::new();
    let without = |drop: &[usize]| (0..d).filter(|i| !drop.contains(i)).collect::<Vec<_>>();
    for &i in &active {
        if exponents[i] >= 2 {
            list.push(without(&[i]));
        }
    }
    for (a, &i) in active.iter().enumerate() {
        for &j in &active[a + 1..] {
            list.push(without(&[i, j]));
        }
    }
    if list.is_empty() {
        list.push(vec![]);
    }
    CritSet::Subspaces(list)
}

/// Zero set of `x^n · unit` near the origin: `{x_i = 0}` for active `i`.
pub fn snc_zero_set(exponents: &[u32]) -> CritSet {
    let d = exponents.len();
    CritSet::Subspaces((0..d).filter(|&i| exponents[i] > 0).map(|i| (0..d).filter(|&j| j != i).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Function;
    use crate::poly::{parse, rat};

    fn f(s: &str) -> Function {
        Function::polynomial(parse(s).unwrap())
    }

    #[test]
    fn quadratic_flow_matches_closed_form() {
        let t = integrate_flow(&f("x^2"), &[0.5], &FlowOptions::default()).unwrap();
        assert!(t.converged);
        assert_eq!(t.stop_reason, StopReason::GradientBelowTol);
        assert!((t.arc_length - 0.5).abs() < 1e-9);
        for s in t.samples.iter().step_by(7) {
            assert!((s.x[0] - 0.5 * (-2.0 * s.t).exp()).abs() < 1e-8);
        }
        let b = verify_length_bound(&t, &rat(1, 2), 2.0);
        assert!(b.pass && b.margin.abs() < 1e-9);
    }

    #[test]
    fn product_flow_conserves_difference_of_squares() {
        let opts = FlowOptions { crit: Some(snc_crit_set(&[2, 2])), ..FlowOptions::default() };
        let t = integrate_flow(&f("x^2*y^2"), &[0.3, 0.4], &opts).unwrap();
        assert!(t.converged && t.energy_monotone());
        let lim = t.limit_point.clone().unwrap();
        assert!(lim[0].abs() < 1e-3 && (lim[1] - 0.07f64.sqrt()).abs() < 1e-6);
        assert!(t.snap.unwrap().distance < 1e-3);
    }

    #[test]
    fn quartic_flow_reaches_origin_slowly() {
        let opts = FlowOptions { tol: 1e-20, t_max: 1e14, ..FlowOptions::default() };
        let t = integrate_flow(&f("x^4"), &[0.5], &opts).unwrap();
        assert!(t.converged && t.energy_monotone());
        assert!((t.arc_length - 0.5).abs() < 1e-6, "{}", t.arc_length);
        let b = verify_length_bound(&t, &rat(3, 4), 4.0);
        assert!(b.pass && (b.bound - 0.5).abs() < 1e-6, "{b:?}");
    }

    #[test]
    fn arc_length_parameterization() {
        let e = f("x^4*y^2 + x^2");
        let total = integrate_flow(&e, &[0.4, 0.3], &FlowOptions::default()).unwrap().arc_length;
        let c = arc_length_check(&e, &[0.4, 0.3], 0.8 * total, 200).unwrap();
        assert!(c.pass(1e-6, 1e-6), "{c:?}");
    }

    #[test]
    fn distance_checks_on_quartic_product() {
        let p = parse("x^2*y^2").unwrap();
        let reports = verify_distance_inequalities(&p, &snc_crit_set(&[2, 2]), &rat(3, 4), &DistanceOptions::default()).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        let neg = parse("x^2 - y^2").unwrap();
        let crit = CritSet::origin();
        let reports = verify_distance_inequalities(&neg, &crit, &rat(1, 2), &DistanceOptions::default()).unwrap();
        assert!(reports[0].note.is_some() && reports[2].note.is_some());
    }

    #[test]
    fn stop_reasons() {
        let opts = FlowOptions { t_max: 0.1, ..FlowOptions::default() };
        assert_eq!(integrate_flow(&f("x^2"), &[0.5], &opts).unwrap().stop_reason, StopReason::MaxTime);
        let opts = FlowOptions { sigma: Some(1.0), ..FlowOptions::default() };
        assert_eq!(integrate_flow(&f("-x^2"), &[0.5], &opts).unwrap().stop_reason, StopReason::LeftDomain);
        let t = integrate_flow(&f("x^2"), &[0.0], &FlowOptions::default()).unwrap();
        assert!(t.converged && t.samples.len() == 1);
    }

    #[test]
    fn exponents() {
        let [a, b, m, g] = distance_exponents(&rat(1, 2), None);
        assert_eq!((a, b, m, g), (rat(2, 1), rat(2, 1), rat(1, 1), rat(1, 1)));
        let [a, b, m, g] = distance_exponents(&rat(3, 4), None);
        assert_eq!((a, b, m, g), (rat(4, 1), rat(4, 1), rat(3, 1), rat(3, 1)));
    }

    #[test]
    fn snc_critical_sets() {
        assert_eq!(snc_crit_set(&[2, 2]), CritSet::Subspaces(vec![vec![1], vec![0], vec![]]));
        assert_eq!(snc_crit_set(&[1, 1]), CritSet::Subspaces(vec![vec![]]));
        assert_eq!(snc_crit_set(&[2, 0]), CritSet::Subspaces(vec![vec![1]]));
        assert_eq!(CritSet::Subspaces(vec![vec![1], vec![0]]).distance(&[0.3, -0.1]), 0.1);
    }

    #[test]
    fn csv_layout() {
        let t = integrate_flow(&f("x^2 + y^2"), &[0.3, 0.4], &FlowOptions::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x_1,x_2,E,grad_norm,arc_length\n"));
        assert_eq!(text.lines().count(), t.samples.len() + 1);
    }
}
