//! Point blow-ups of plane curves at chart origins.
//!
//! Chart 1 is `(x, y) = (u·v, v)` and chart 2 is `(x, y) = (a, a·b)`. Nodes
//! carry total transforms of the root polynomial; a branch stops once its
//! total transform has simple normal crossings at the chart origin.

mod univariate;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use univariate::UPoly;

use crate::poly::{is_valid_name, rat_string, CompiledPoly, PolyError, Polynomial, Substitution};
use crate::report::ser_rational_opt;
use crate::sampling::ball_points;
use crate::snc::{compute_constants, detect_snc, SncError};

pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlowupError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Snc(#[from] SncError),
    #[error("blow-up needs a polynomial in exactly 2 variables, got {0}")]
    Dimension(usize),
    #[error("polynomial does not vanish at the origin")]
    NonzeroAtOrigin,
    #[error("every leaf hit the depth cap; no bound available")]
    AllLeavesCapped,
}

/// Which of the two standard charts a node lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    /// `(x, y) = (u·v, v)`; the exceptional divisor is `{v = 0}`.
    First,
    /// `(x, y) = (a, a·b)`; the exceptional divisor is `{a = 0}`.
    Second,
}

impl Chart {
    fn digit(self) -> char {
        match self {
            Chart::First => '1',
            Chart::Second => '2',
        }
    }

    fn letters(self) -> (&'static str, &'static str) {
        match self {
            Chart::First => ("u", "v"),
            Chart::Second => ("a", "b"),
        }
    }

    /// Substitution from the parent variables `(x, y)` to the chart variables `(s, t)`.
    pub fn map(self, parent: &[String; 2], child: &[String; 2]) -> Substitution {
        let vars = child.to_vec();
        let s = Polynomial::var(&vars, &child[0]).expect("chart variable");
        let t = Polynomial::var(&vars, &child[1]).expect("chart variable");
        let st = s.mul(&t).expect("degree 2 product");
        let (x_img, y_img) = match self {
            Chart::First => (st, t),
            Chart::Second => (s, st),
        };
        Substitution::new().with(parent[0].clone(), x_img).with(parent[1].clone(), y_img)
    }
}

#[derive(Debug, Clone)]
pub struct BlowupNode {
    /// `root`, `root/1`, `root/1/2`, ...
    pub chart_path: String,
    pub vars: [String; 2],
    pub parent: Option<usize>,
    pub children: Option<[usize; 2]>,
    pub chart: Option<Chart>,
    /// Parent variables in terms of this chart's variables.
    pub transform: Substitution,
    /// Root variables in terms of this chart's variables.
    pub composite: Substitution,
    pub total_transform: Polynomial,
    pub exceptional_multiplicities: [u32; 2],
    pub snc: bool,
    pub depth: usize,
    pub depth_capped: bool,
}

impl BlowupNode {
    fn root(p: &Polynomial) -> Result<Self, BlowupError> {
        let vars = two_vars(p)?;
        let snc = detect_snc(p)?.snc_at_origin;
        let identity = Substitution::new()
            .with(vars[0].clone(), Polynomial::var(p.vars(), &vars[0])?)
            .with(vars[1].clone(), Polynomial::var(p.vars(), &vars[1])?);
        Ok(BlowupNode {
            chart_path: "root".into(),
            vars,
            parent: None,
            children: None,
            chart: None,
            transform: identity.clone(),
            composite: identity,
            total_transform: p.clone(),
            exceptional_multiplicities: [0, 0],
            snc,
            depth: 0,
            depth_capped: false,
        })
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    /// Whether `{vars[axis] = 0}` lies in the preimage of the root origin.
    pub fn is_exceptional_axis(&self, axis: usize) -> bool {
        self.chart.is_some() && self.composite.iter().all(|(_, img)| img.terms().keys().all(|e| e[axis] > 0))
    }
}

fn two_vars(p: &Polynomial) -> Result<[String; 2], BlowupError> {
    match p.vars() {
        [x, y] => Ok([x.clone(), y.clone()]),
        other => Err(BlowupError::Dimension(other.len())),
    }
}

/// Lowest total degree of a nonzero polynomial.
fn order(p: &Polynomial) -> u32 {
    p.terms().keys().map(|e| e.iter().sum()).min().unwrap_or(0)
}

fn fresh_names(chart: Chart, path_digits: &str, taken: &[String]) -> [String; 2] {
    let (s, t) = chart.letters();
    let mut suffix = format!("_{path_digits}");
    loop {
        let names = [format!("{s}{suffix}"), format!("{t}{suffix}")];
        if names.iter().all(|n| is_valid_name(n) && !taken.contains(n)) {
            return names;
        }
        suffix.push('_');
    }
}

fn path_digits(path: &str) -> String {
    path.chars().filter(|c| c.is_ascii_digit()).collect()
}

/// Blows up the origin of a polynomial in two variables.
pub fn blowup_once(p: &Polynomial) -> Result<(BlowupNode, BlowupNode), BlowupError> {
    let root = BlowupNode::root(p)?;
    let taken = p.vars().to_vec();
    let a = child(&root, Chart::First, &taken)?;
    let b = child(&root, Chart::Second, &taken)?;
    Ok((a, b))
}

fn child(parent: &BlowupNode, chart: Chart, taken: &[String]) -> Result<BlowupNode, BlowupError> {
    let chart_path = format!("{}/{}", parent.chart_path, chart.digit());
    let vars = fresh_names(chart, &path_digits(&chart_path), taken);
    let transform = chart.map(&parent.vars, &vars);
    let total_transform = parent.total_transform.substitute(&transform)?;
    let composite = parent.composite.then(&transform)?;
    let ord = order(&parent.total_transform);
    let [mx, my] = parent.exceptional_multiplicities;
    let exceptional_multiplicities = match chart {
        Chart::First => [mx, ord],
        Chart::Second => [ord, my],
    };
    let snc = detect_snc(&total_transform)?.snc_at_origin;
    Ok(BlowupNode {
        chart_path,
        vars,
        parent: None,
        children: None,
        chart: Some(chart),
        transform,
        composite,
        total_transform,
        exceptional_multiplicities,
        snc,
        depth: parent.depth + 1,
        depth_capped: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolveOptions {
    pub max_depth: usize,
    /// Nodes shallower than this are blown up even when already normal crossing.
    pub min_depth: usize,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions { max_depth: DEFAULT_MAX_DEPTH, min_depth: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct ChartTree {
    pub root: Polynomial,
    /// Breadth-first order; index 0 is the root.
    pub nodes: Vec<BlowupNode>,
    pub depth: usize,
}

impl ChartTree {
    pub fn node(&self, path: &str) -> Option<&BlowupNode> {
        self.nodes.iter().find(|n| n.chart_path == path)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &BlowupNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }
}

/// Normal-crossing data at one analyzed point of a leaf chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointBound {
    pub monomial: Vec<u32>,
    pub residual: String,
    #[serde(rename = "N")]
    pub total_degree: u32,
    /// `max(1/2, 1 - 1/N)`.
    #[serde(serialize_with = "ser_rat")]
    pub theta_bound: BigRational,
}

fn ser_rat<S: serde::Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_string(q))
}

fn point_bound(monomial: Vec<u32>, residual: &Polynomial) -> PointBound {
    let total: u32 = monomial.iter().sum();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let theta = if total == 0 { half.clone() } else { BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(total)) };
    PointBound { monomial, residual: residual.to_string(), total_degree: total, theta_bound: if theta < half { half } else { theta } }
}

#[derive(Debug, Clone)]
pub struct LeafReport {
    pub node: usize,
    pub chart_path: String,
    pub vars: [String; 2],
    pub composite_map: Substitution,
    pub total_transform: Polynomial,
    pub monomial: Vec<u32>,
    pub residual: Polynomial,
    /// Absent for depth-capped leaves.
    pub bound: Option<PointBound>,
    pub depth_capped: bool,
}

/// A point `vars[axis] = 0, vars[1-axis] = location` of an exceptional axis
/// where the leaf residual vanishes.
#[derive(Debug, Clone)]
pub struct ExceptionalPoint {
    pub chart_path: String,
    pub axis_var: String,
    pub coordinate_var: String,
    pub location: BigRational,
    /// Total transform with `coordinate = location - w` for the fresh variable `w`.
    pub translated: Polynomial,
    /// `None` when the translated transform is still not normal crossing.
    pub bound: Option<PointBound>,
}

/// Exceptional-axis zeros of a leaf residual that were not analyzed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnanalyzedRoots {
    pub chart_path: String,
    pub axis_var: String,
    pub count: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ResolutionResult {
    pub tree: ChartTree,
    pub leaves: Vec<LeafReport>,
    pub points: Vec<ExceptionalPoint>,
    pub unanalyzed: Vec<UnanalyzedRoots>,
}

impl ResolutionResult {
    pub fn leaf(&self, path: &str) -> Option<&LeafReport> {
        self.leaves.iter().find(|l| l.chart_path == path)
    }

    /// Every origin-local bound: leaf origins first, then translated points.
    pub fn bounds(&self) -> Vec<(&str, &PointBound)> {
        self.leaves
            .iter()
            .filter_map(|l| l.bound.as_ref().map(|b| (l.chart_path.as_str(), b)))
            .chain(self.points.iter().filter_map(|p| p.bound.as_ref().map(|b| (p.chart_path.as_str(), b))))
            .collect()
    }

    /// `[1/2, max bound]` over all analyzed points, or `None` if nothing was analyzed.
    pub fn theta_interval(&self) -> Option<(BigRational, BigRational)> {
        let hi = self.bounds().into_iter().map(|(_, b)| b.theta_bound.clone()).max()?;
        Some((BigRational::new(BigInt::one(), BigInt::from(2)), hi))
    }

    /// True when every leaf origin and every exceptional zero was analyzed.
    pub fn complete(&self) -> bool {
        self.leaves.iter().all(|l| l.bound.is_some()) && self.points.iter().all(|p| p.bound.is_some()) && self.unanalyzed.is_empty()
    }
}

/// Breadth-first resolution of the singularity at the origin.
pub fn resolve(p: &Polynomial, opts: ResolveOptions) -> Result<ResolutionResult, BlowupError> {
    two_vars(p)?;
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial.into());
    }
    if !p.constant_term().is_zero() {
        return Err(BlowupError::NonzeroAtOrigin);
    }
    let taken = p.vars().to_vec();
    let mut nodes = vec![BlowupNode::root(p)?];
    let mut frontier = vec![0usize];
    let mut depth = 0;
    while !frontier.is_empty() {
        let expand: Vec<usize> = frontier
            .iter()
            .copied()
            .filter(|&i| {
                let n = &nodes[i];
                (!n.snc || n.depth < opts.min_depth) && n.depth < opts.max_depth
            })
            .collect();
        for &i in &frontier {
            let n = &mut nodes[i];
            n.depth_capped = !n.snc && n.depth >= opts.max_depth;
        }
        let born: Vec<(usize, BlowupNode, BlowupNode)> = expand
            .par_iter()
            .map(|&i| {
                let parent = &nodes[i];
                Ok((i, child(parent, Chart::First, &taken)?, child(parent, Chart::Second, &taken)?))
            })
            .collect::<Result<_, BlowupError>>()?;
        frontier.clear();
        for (i, mut a, mut b) in born {
            a.parent = Some(i);
            b.parent = Some(i);
            depth = depth.max(a.depth);
            let ia = nodes.len();
            nodes.push(a);
            nodes.push(b);
            nodes[i].children = Some([ia, ia + 1]);
            frontier.extend([ia, ia + 1]);
        }
    }
    let tree = ChartTree { root: p.clone(), nodes, depth };

    let leaf_ids: Vec<usize> = (0..tree.nodes.len()).filter(|&i| tree.nodes[i].is_leaf()).collect();
    let analyzed: Vec<(LeafReport, Vec<ExceptionalPoint>, Vec<UnanalyzedRoots>)> =
        leaf_ids.par_iter().map(|&i| analyze_leaf(&tree, i)).collect::<Result<_, BlowupError>>()?;
    let mut leaves = Vec::new();
    let mut points = Vec::new();
    let mut unanalyzed = Vec::new();
    for (l, p, u) in analyzed {
        leaves.push(l);
        points.extend(p);
        unanalyzed.extend(u);
    }
    Ok(ResolutionResult { tree, leaves, points, unanalyzed })
}

fn analyze_leaf(tree: &ChartTree, i: usize) -> Result<(LeafReport, Vec<ExceptionalPoint>, Vec<UnanalyzedRoots>), BlowupError> {
    let node = &tree.nodes[i];
    let mf = detect_snc(&node.total_transform)?;
    let bound = node.snc.then(|| point_bound(mf.exponents.clone(), &mf.residual));
    let mut points = Vec::new();
    let mut unanalyzed = Vec::new();
    if node.snc {
        for axis in 0..2 {
            if !node.is_exceptional_axis(axis) {
                continue;
            }
            let other = 1 - axis;
            let g = restrict_to_axis(&mf.residual, axis);
            let real = g.count_real_roots();
            let roots = match g.rational_roots() {
                Some(r) => r,
                None => {
                    unanalyzed.push(UnanalyzedRoots {
                        chart_path: node.chart_path.clone(),
                        axis_var: node.vars[axis].clone(),
                        count: real,
                        reason: "coefficients too large for the rational root search".into(),
                    });
                    continue;
                }
            };
            if real > roots.len() {
                unanalyzed.push(UnanalyzedRoots {
                    chart_path: node.chart_path.clone(),
                    axis_var: node.vars[axis].clone(),
                    count: real - roots.len(),
                    reason: "irrational real roots".into(),
                });
            }
            for r in roots {
                points.push(translate_point(tree, node, axis, other, r)?);
            }
        }
    }
    let leaf = LeafReport {
        node: i,
        chart_path: node.chart_path.clone(),
        vars: node.vars.clone(),
        composite_map: node.composite.clone(),
        total_transform: node.total_transform.clone(),
        monomial: mf.exponents,
        residual: mf.residual,
        bound,
        depth_capped: node.depth_capped,
    };
    Ok((leaf, points, unanalyzed))
}

/// The residual on `{vars[axis] = 0}` as a polynomial in the other variable.
fn restrict_to_axis(p: &Polynomial, axis: usize) -> UPoly {
    let other = 1 - axis;
    let mut coeffs = vec![BigRational::zero(); p.degree_in(other) as usize + 1];
    for (e, c) in p.terms() {
        if e[axis] == 0 {
            coeffs[e[other] as usize] += c;
        }
    }
    UPoly::new(coeffs)
}

fn translate_point(
    tree: &ChartTree,
    node: &BlowupNode,
    axis: usize,
    other: usize,
    location: BigRational,
) -> Result<ExceptionalPoint, BlowupError> {
    let mut taken: Vec<String> = tree.nodes.iter().flat_map(|n| n.vars.iter().cloned()).collect();
    taken.extend(tree.root.vars().iter().cloned());
    let digits = path_digits(&node.chart_path);
    let mut w = format!("w_{digits}");
    while taken.contains(&w) {
        w.push('_');
    }
    let wvar = Polynomial::var(&[w.clone()], &w)?;
    let image = Polynomial::constant(vec![w.clone()], location.clone()).sub(&wvar);
    let translated = node.total_transform.substitute(&Substitution::new().with(node.vars[other].clone(), image))?;
    let mf = detect_snc(&translated)?;
    let bound = mf.snc_at_origin.then(|| point_bound(mf.exponents.clone(), &mf.residual));
    Ok(ExceptionalPoint {
        chart_path: node.chart_path.clone(),
        axis_var: node.vars[axis].clone(),
        coordinate_var: node.vars[other].clone(),
        location,
        translated,
        bound,
    })
}

/// Per-point bound with the transported constant.
#[derive(Debug, Clone, Serialize)]
pub struct TransportedBound {
    pub chart_path: String,
    /// `origin` or `var=value` for translated points.
    pub point: String,
    #[serde(flatten)]
    pub bound: PointBound,
    pub origin_local: bool,
    /// Gradient-inequality constant of the pulled-back function near the point.
    #[serde(rename = "C0")]
    pub c0: Option<f64>,
    /// Sampled sup of the Jacobian operator norm of the composite map on the unit ball.
    #[serde(rename = "M")]
    pub jacobian_sup: f64,
    /// `C0 / M`.
    pub transported_constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    #[serde(serialize_with = "ser_interval")]
    pub theta_interval: (BigRational, BigRational),
    pub complete: bool,
    pub points: Vec<TransportedBound>,
}

fn ser_interval<S: serde::Serializer>(q: &(BigRational, BigRational), s: S) -> Result<S::Ok, S::Error> {
    crate::report::ser_rational_pair(q, s)
}

/// Sup over a unit-ball sample of the operator norm of the Jacobian of `map`.
pub fn jacobian_sup(map: &Substitution, vars: &[String; 2], samples: usize, seed: u64) -> Result<f64, BlowupError> {
    let mut entries = Vec::new();
    for (_, img) in map.iter() {
        let img = img.with_vars(vars)?;
        entries.push([CompiledPoly::new(&img.derivative(0)), CompiledPoly::new(&img.derivative(1))]);
    }
    let pts = ball_points(2, 1.0, samples, seed);
    Ok(pts
        .par_iter()
        .map(|x| {
            let a = entries[0][0].eval(x);
            let b = entries[0][1].eval(x);
            let c = entries[1][0].eval(x);
            let d = entries[1][1].eval(x);
            let s = a * a + b * b + c * c + d * d;
            let det = a * d - b * c;
            ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
        })
        .reduce(|| 0.0, f64::max))
}

/// Origin-local bounds at every analyzed point plus the aggregate interval.
pub fn pull_back_and_bound(result: &ResolutionResult, sigma: f64, samples: usize, seed: u64) -> Result<BoundReport, BlowupError> {
    if result.leaves.iter().all(|l| l.depth_capped) {
        return Err(BlowupError::AllLeavesCapped);
    }
    let theta_interval = result.theta_interval().ok_or(BlowupError::AllLeavesCapped)?;
    let mut jobs: Vec<(String, String, PointBound, Polynomial, Substitution, [String; 2])> = Vec::new();
    for l in &result.leaves {
        if let Some(b) = &l.bound {
            jobs.push((
                l.chart_path.clone(),
                "origin".into(),
                b.clone(),
                l.total_transform.clone(),
                l.composite_map.clone(),
                l.vars.clone(),
            ));
        }
    }
    for p in &result.points {
        if let Some(b) = &p.bound {
            let l = result.leaf(&p.chart_path).expect("point belongs to a leaf");
            let w = p.translated.vars().iter().find(|v| !l.vars.contains(v)).expect("translation variable").clone();
            let wpoly = Polynomial::var(std::slice::from_ref(&w), &w)?;
            let shift =
                Substitution::new().with(p.coordinate_var.clone(), Polynomial::constant(vec![w.clone()], p.location.clone()).sub(&wpoly));
            let composite = l.composite_map.then(&shift)?;
            let vars = [p.translated.vars()[0].clone(), p.translated.vars()[1].clone()];
            jobs.push((
                p.chart_path.clone(),
                format!("{}={}", p.coordinate_var, rat_string(&p.location)),
                b.clone(),
                p.translated.clone(),
                composite,
                vars,
            ));
        }
    }
    let points = jobs
        .into_iter()
        .map(|(chart_path, point, bound, poly, composite, vars)| {
            let c0 =
                detect_snc(&poly).and_then(|mf| compute_constants(&mf, sigma, samples, seed)).ok().and_then(|r| r.constants.map(|k| k.c0));
            let jacobian = jacobian_sup(&composite, &vars, samples, seed)?;
            Ok(TransportedBound {
                chart_path,
                point,
                bound,
                origin_local: true,
                c0,
                jacobian_sup: jacobian,
                transported_constant: c0.map(|c| c / jacobian),
            })
        })
        .collect::<Result<Vec<_>, BlowupError>>()?;
    Ok(BoundReport { theta_interval, complete: result.complete(), points })
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafJson {
    pub chart_path: String,
    pub composite_map: Vec<String>,
    pub monomial: Vec<u32>,
    pub residual: String,
    #[serde(rename = "N")]
    pub total_degree: Option<u32>,
    #[serde(serialize_with = "ser_rational_opt")]
    pub theta_bound: Option<BigRational>,
    pub origin_local: bool,
    pub depth_capped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointJson {
    pub chart_path: String,
    pub point: String,
    pub translated: String,
    pub monomial: Option<Vec<u32>>,
    #[serde(rename = "N")]
    pub total_degree: Option<u32>,
    #[serde(serialize_with = "ser_rational_opt")]
    pub theta_bound: Option<BigRational>,
    pub origin_local: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolveJson {
    pub root: String,
    pub leaves: Vec<LeafJson>,
    pub points: Vec<PointJson>,
    pub unanalyzed: Vec<UnanalyzedRoots>,
    pub theta_interval: Option<[String; 2]>,
    pub complete: bool,
    pub depth: usize,
}

impl ResolveJson {
    pub fn new(r: &ResolutionResult) -> Self {
        let leaves = r
            .leaves
            .iter()
            .map(|l| LeafJson {
                chart_path: l.chart_path.clone(),
                composite_map: l.composite_map.iter().map(|(_, img)| img.to_string()).collect(),
                monomial: l.monomial.clone(),
                residual: l.residual.to_string(),
                total_degree: l.bound.as_ref().map(|b| b.total_degree),
                theta_bound: l.bound.as_ref().map(|b| b.theta_bound.clone()),
                origin_local: true,
                depth_capped: l.depth_capped,
            })
            .collect();
        let points = r
            .points
            .iter()
            .map(|p| PointJson {
                chart_path: p.chart_path.clone(),
                point: format!("{}=0, {}={}", p.axis_var, p.coordinate_var, rat_string(&p.location)),
                translated: p.translated.to_string(),
                monomial: p.bound.as_ref().map(|b| b.monomial.clone()),
                total_degree: p.bound.as_ref().map(|b| b.total_degree),
                theta_bound: p.bound.as_ref().map(|b| b.theta_bound.clone()),
                origin_local: true,
            })
            .collect();
        ResolveJson {
            root: r.tree.root.to_string(),
            leaves,
            points,
            unanalyzed: r.unanalyzed.clone(),
            theta_interval: r.theta_interval().map(|(lo, hi)| [rat_string(&lo), rat_string(&hi)]),
            complete: r.complete(),
            depth: r.tree.depth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, rat};

    fn p(s: &str) -> Polynomial {
        parse(s).unwrap()
    }

    #[test]
    fn first_blowup_of_the_cusp() {
        let (a, b) = blowup_once(&p("x^2 - y^3")).unwrap();
        assert_eq!(a.total_transform, p("u_1^2*v_1^2 - v_1^3"));
        assert_eq!(b.total_transform, p("a_2^2 - a_2^3*b_2^3"));
        assert_eq!(a.exceptional_multiplicities, [0, 2]);
        assert_eq!(b.exceptional_multiplicities, [2, 0]);
        let (c, _) = blowup_once(&p("x*y")).unwrap();
        assert_eq!(c.total_transform, p("u_1*v_1^2"));
        assert!(blowup_once(&p("x^2 + y + z")).is_err());
    }

    #[test]
    fn default_resolution_of_the_cusp() {
        let r = resolve(&p("x^2 - y^3"), ResolveOptions::default()).unwrap();
        let paths: Vec<&str> = r.leaves.iter().map(|l| l.chart_path.as_str()).collect();
        assert_eq!(paths, ["root/2", "root/1/1", "root/1/2/1", "root/1/2/2"]);
        let leaf = r.leaf("root/1/2/2").unwrap();
        assert_eq!(leaf.monomial, vec![6, 2]);
        assert_eq!(leaf.bound.as_ref().unwrap().theta_bound, rat(7, 8));
        let at_one: Vec<_> = r.points.iter().filter(|q| q.chart_path == "root/1/2/2").collect();
        assert_eq!(at_one.len(), 1);
        assert_eq!(at_one[0].location, rat(1, 1));
        let b = at_one[0].bound.as_ref().unwrap();
        assert_eq!((b.monomial.clone(), b.total_degree), (vec![6, 1], 7));
        assert_eq!(b.theta_bound, rat(6, 7));
        assert!(r.complete());
        assert_eq!(r.theta_interval().unwrap(), (rat(1, 2), rat(8, 9)));
    }

    #[test]
    fn already_normal_crossing() {
        let r = resolve(&p("x*y"), ResolveOptions::default()).unwrap();
        assert_eq!(r.tree.depth, 0);
        assert_eq!(r.leaves.len(), 1);
        assert_eq!(r.theta_interval().unwrap(), (rat(1, 2), rat(1, 2)));
        assert_eq!(resolve(&p("x + 1 + y"), ResolveOptions::default()).unwrap_err(), BlowupError::NonzeroAtOrigin);
    }

    #[test]
    fn depth_cap_is_flagged() {
        let r = resolve(&p("x^2 - y^3"), ResolveOptions { max_depth: 1, min_depth: 0 }).unwrap();
        let capped: Vec<_> = r.leaves.iter().filter(|l| l.depth_capped).map(|l| l.chart_path.as_str()).collect();
        assert_eq!(capped, ["root/1"]);
        assert!(!r.complete());
    }

    #[test]
    fn irrational_zeros_are_reported() {
        let r = resolve(&p("x^2 - 2*y^2"), ResolveOptions::default()).unwrap();
        let total: usize = r.unanalyzed.iter().map(|u| u.count).sum();
        assert_eq!(total, 4);
        assert!(!r.complete());
    }
}
