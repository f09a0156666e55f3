//! Morse–Bott and generalized Morse–Bott (order `N`) checks along a
//! coordinate subspace `K` through the origin.
//!
//! `K` is given by the indices of its free coordinates; the remaining
//! coordinates span the normal space.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{rat_to_f64, CompiledGradient, CompiledPoly, PolyError, Polynomial};
use crate::report::{ser_rational_opt, InequalityCheckReport, InequalityId};
use crate::sampling::{norm, rng, sphere_mesh, unit_sphere_point};

pub const SPHERE_POINTS: usize = 10_000;
pub const ZETA_MARGIN: f64 = 0.9;
pub const CRIT_BALL_RADIUS: f64 = 0.25;
pub const CRIT_SAMPLES: usize = 10_000;
pub const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorseBottError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("origin is not a critical point")]
    NotCritical,
    #[error("order must be at least 2, got {0}")]
    OrderTooSmall(u32),
    #[error("coordinate index {0} out of range")]
    BadIndex(usize),
    #[error("K must leave at least one normal direction")]
    NoNormalDirection,
    #[error("report carries no order")]
    MissingOrder,
    #[error("cylinder radii underflow after {0} halvings")]
    RadiusUnderflow(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    MorseBott,
    Generalized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    /// `∇p ≡ 0` on `K`.
    pub a: bool,
    /// Morse–Bott: Hessian kernel equals `K`. Generalized: derivatives of
    /// order `1..N-1` vanish on `K`.
    pub b: bool,
    /// Generalized only: the order-`N` form is coercive on the normal sphere.
    pub c: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseBottReport {
    pub kind: CheckKind,
    #[serde(rename = "K")]
    pub critical_subspace: Vec<usize>,
    /// Sampling heuristic: no critical points of `p` found off `K` near 0.
    pub is_critical_set_exactly_k: bool,
    #[serde(rename = "N")]
    pub order_n: Option<u32>,
    pub conditions: Conditions,
    pub hessian_rank: usize,
    /// Basis of the kernel of the Hessian at 0, as rational strings.
    pub hessian_kernel: Vec<Vec<String>>,
    /// Certified `ζ` (margin times the sampled minimum).
    #[serde(rename = "zeta")]
    pub coercivity_zeta: Option<f64>,
    pub measured_zeta: Option<f64>,
    /// First derivative found not to vanish on `K`, with its restriction.
    pub witness: Option<String>,
    #[serde(rename = "theta", serialize_with = "ser_rational_opt")]
    pub predicted_theta: Option<BigRational>,
    pub pass: bool,
}

fn check_subspace(p: &Polynomial, k: &[usize]) -> Result<Vec<usize>, MorseBottError> {
    let d = p.nvars();
    if let Some(&bad) = k.iter().find(|&&i| i >= d) {
        return Err(MorseBottError::BadIndex(bad));
    }
    let normal: Vec<usize> = (0..d).filter(|i| !k.contains(i)).collect();
    if normal.is_empty() {
        return Err(MorseBottError::NoNormalDirection);
    }
    Ok(normal)
}

fn check_critical(p: &Polynomial) -> Result<(), MorseBottError> {
    let d = p.nvars();
    for i in 0..d {
        let mut e = vec![0; d];
        e[i] = 1;
        if !p.coeff(&e).is_zero() {
            return Err(MorseBottError::NotCritical);
        }
    }
    Ok(())
}

/// Sets every normal coordinate to zero.
fn restrict_to_k(p: &Polynomial, normal: &[usize]) -> Polynomial {
    let terms = p.terms().iter().filter(|(e, _)| normal.iter().all(|&i| e[i] == 0)).map(|(e, c)| (e.clone(), c.clone()));
    Polynomial::from_terms(p.vars().to_vec(), terms).expect("subset of valid terms")
}

/// Exact Hessian of `p` at the origin.
pub fn hessian_at_origin(p: &Polynomial) -> Vec<Vec<BigRational>> {
    let d = p.nvars();
    let mut h = vec![vec![BigRational::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut e = vec![0; d];
            e[i] += 1;
            e[j] += 1;
            let c = p.coeff(&e);
            h[i][j] = if i == j { c * BigRational::from_integer(BigInt::from(2)) } else { c };
        }
    }
    h
}

/// Rank and a kernel basis of a rational matrix.
pub fn rank_and_kernel(m: &[Vec<BigRational>]) -> (usize, Vec<Vec<BigRational>>) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, pr);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &a[r][j];
                    a[i][j] = &a[i][j] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect();
    (pivots.len(), kernel)
}

/// Looks for critical points off `K` in a small ball: seeded samples, then a
/// compass search on `‖∇p‖` from the most promising ones. Returns `true`
/// when none is found.
fn crit_set_within_k(p: &Polynomial, normal: &[usize], seed: u64) -> bool {
    let g = CompiledGradient::new(p);
    let d = p.nvars();
    let gnorm = |x: &[f64]| norm(&g.gradient(x));
    let dist = |x: &[f64]| normal.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt();
    let pts = crate::sampling::ball_points(d, CRIT_BALL_RADIUS, CRIT_SAMPLES, seed);
    let mut scored: Vec<(f64, Vec<f64>)> = pts.into_par_iter().filter(|x| dist(x) > 1e-3).map(|x| (gnorm(&x) / dist(&x), x)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.truncate(32);
    scored.par_iter().all(|(_, start)| {
        let mut x = start.clone();
        let mut best = gnorm(&x);
        let mut step = 0.05 * CRIT_BALL_RADIUS;
        for _ in 0..400 {
            let mut moved = false;
            for i in 0..d {
                for s in [step, -step] {
                    let mut y = x.clone();
                    y[i] += s;
                    if norm(&y) > CRIT_BALL_RADIUS || dist(&y) < 1e-3 {
                        continue;
                    }
                    let v = gnorm(&y);
                    if v < best {
                        best = v;
                        x = y;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
                if step < 1e-15 {
                    break;
                }
            }
        }
        !(best < 1e-10 && dist(&x) > 1e-3)
    })
}

/// Morse–Bott at the origin along `K`.
pub fn check_morse_bott(p: &Polynomial, k: &[usize], seed: u64) -> Result<MorseBottReport, MorseBottError> {
    let normal = check_subspace_allow_full(p, k)?;
    check_critical(p)?;
    let a = p.gradient().iter().all(|g| restrict_to_k(g, &normal).is_zero());
    let h = hessian_at_origin(p);
    let (rank, kernel) = rank_and_kernel(&h);
    let k_columns_vanish = k.iter().all(|&j| h.iter().all(|row| row[j].is_zero()));
    let b = k_columns_vanish && rank == normal.len();
    let exact = a && crit_set_within_k(p, &normal, seed);
    let pass = a && b;
    Ok(MorseBottReport {
        kind: CheckKind::MorseBott,
        critical_subspace: sorted(k),
        is_critical_set_exactly_k: exact,
        order_n: None,
        conditions: Conditions { a, b, c: None },
        hessian_rank: rank,
        hessian_kernel: kernel.iter().map(|v| v.iter().map(crate::poly::rat_string).collect()).collect(),
        coercivity_zeta: None,
        measured_zeta: None,
        witness: None,
        predicted_theta: pass.then(|| BigRational::new(BigInt::one(), BigInt::from(2))),
        pass,
    })
}

fn check_subspace_allow_full(p: &Polynomial, k: &[usize]) -> Result<Vec<usize>, MorseBottError> {
    match check_subspace(p, k) {
        Err(MorseBottError::NoNormalDirection) => Ok(vec![]),
        other => other,
    }
}

fn sorted(k: &[usize]) -> Vec<usize> {
    let mut v = k.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Degree-`n` homogeneous part of `p` restricted to the normal space.
fn normal_form(p: &Polynomial, k: &[usize], n: u32) -> Polynomial {
    let terms =
        p.terms().iter().filter(|(e, _)| e.iter().sum::<u32>() == n && k.iter().all(|&i| e[i] == 0)).map(|(e, c)| (e.clone(), c.clone()));
    Polynomial::from_terms(p.vars().to_vec(), terms).expect("subset of valid terms")
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Finds a nonconstant term whose normal degree is below `n`; differentiating
/// it away gives a derivative of order `< n` that does not vanish on `K`.
fn order_condition_witness(p: &Polynomial, normal: &[usize], n: u32) -> Option<String> {
    let offending = p.sorted_terms().into_iter().find(|(e, _)| {
        let s: u32 = normal.iter().map(|&i| e[i]).sum();
        let total: u32 = e.iter().sum();
        total > 0 && s < n && s >= 1
    });
    if let Some((e, _)) = offending {
        let mut q = p.clone();
        let mut label = String::from("d");
        let s: u32 = normal.iter().map(|&i| e[i]).sum();
        if s > 1 {
            label.push_str(&format!("^{s}"));
        }
        label.push('/');
        for &i in normal {
            for _ in 0..e[i] {
                q = q.derivative(i);
            }
            if e[i] > 0 {
                label.push_str(&format!("d{}", p.vars()[i]));
                if e[i] > 1 {
                    label.push_str(&format!("^{}", e[i]));
                }
            }
        }
        return Some(format!("{label} on K = {}", restrict_to_k(&q, normal)));
    }
    // Terms living on K alone: p|K must be constant.
    let on_k = restrict_to_k(p, normal);
    let nonconstant = on_k.terms().keys().any(|e| e.iter().sum::<u32>() > 0);
    nonconstant.then(|| format!("p on K = {on_k}"))
}

/// Generalized Morse–Bott of order `n` at the origin along `K`.
pub fn check_generalized_morse_bott(p: &Polynomial, k: &[usize], n: u32, seed: u64) -> Result<MorseBottReport, MorseBottError> {
    if n < 2 {
        return Err(MorseBottError::OrderTooSmall(n));
    }
    let normal = check_subspace(p, k)?;
    check_critical(p)?;
    let a = p.gradient().iter().all(|g| restrict_to_k(g, &normal).is_zero());
    let witness = order_condition_witness(p, &normal, n);
    let b = witness.is_none();
    let h_n = CompiledPoly::new(&normal_form(p, k, n));
    let scale = factorial(n);
    let measured = sphere_mesh(normal.len(), SPHERE_POINTS)
        .par_iter()
        .map(|v| (scale * h_n.eval(&embed(v, &normal, p.nvars()))).abs())
        .reduce(|| f64::INFINITY, f64::min);
    let zeta = ZETA_MARGIN * measured;
    let c = zeta > 0.0;
    let (rank, kernel) = rank_and_kernel(&hessian_at_origin(p));
    let exact = a && crit_set_within_k(p, &normal, seed);
    let pass = a && b && c;
    Ok(MorseBottReport {
        kind: CheckKind::Generalized,
        critical_subspace: sorted(k),
        is_critical_set_exactly_k: exact,
        order_n: Some(n),
        conditions: Conditions { a, b, c: Some(c) },
        hessian_rank: rank,
        hessian_kernel: kernel.iter().map(|v| v.iter().map(crate::poly::rat_string).collect()).collect(),
        coercivity_zeta: Some(zeta),
        measured_zeta: Some(measured),
        witness,
        predicted_theta: Some(BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(n))),
        pass,
    })
}

fn embed(v: &[f64], normal: &[usize], d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for (vi, &i) in v.iter().zip(normal) {
        x[i] = *vi;
    }
    x
}

/// All exponent vectors of total degree `n` in `d` variables.
fn multi_indices(d: usize, n: u32) -> Vec<Vec<u32>> {
    if d == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in multi_indices(d - 1, n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial(n: u32, alpha: &[u32]) -> f64 {
    factorial(n) / alpha.iter().map(|&a| factorial(a)).product::<f64>()
}

/// Every order-`n` partial derivative of `p`, compiled.
struct NthDerivative {
    n: u32,
    d: usize,
    normal: Vec<usize>,
    table: BTreeMap<Vec<u32>, CompiledPoly>,
}

impl NthDerivative {
    fn new(p: &Polynomial, normal: &[usize], n: u32) -> Self {
        let d = p.nvars();
        let table = multi_indices(d, n)
            .into_iter()
            .map(|alpha| {
                let mut q = p.clone();
                for (i, &k) in alpha.iter().enumerate() {
                    for _ in 0..k {
                        q = q.derivative(i);
                    }
                }
                (alpha, CompiledPoly::new(&q))
            })
            .collect();
        NthDerivative { n, d, normal: normal.to_vec(), table }
    }

    fn values(&self, x: &[f64]) -> BTreeMap<Vec<u32>, f64> {
        self.table.iter().map(|(a, q)| (a.clone(), q.eval(x))).collect()
    }

    /// `D^n E(x) v^n` for a normal vector `v` given in normal coordinates.
    fn full(&self, vals: &BTreeMap<Vec<u32>, f64>, v: &[f64]) -> f64 {
        let k = self.normal.len();
        multi_indices(k, self.n)
            .iter()
            .map(|beta| {
                let mut alpha = vec![0; self.d];
                let mut vb = 1.0;
                for (j, &b) in beta.iter().enumerate() {
                    alpha[self.normal[j]] = b;
                    vb *= v[j].powi(b as i32);
                }
                multinomial(self.n, beta) * vals[&alpha] * vb
            })
            .sum()
    }

    /// Normal components of `D^n E(x) v^{n-1}` and their norm.
    fn covector_norm(&self, vals: &BTreeMap<Vec<u32>, f64>, v: &[f64]) -> f64 {
        let k = self.normal.len();
        let betas = multi_indices(k, self.n - 1);
        (0..k)
            .map(|w| {
                let comp: f64 = betas
                    .iter()
                    .map(|beta| {
                        let mut alpha = vec![0; self.d];
                        let mut vb = 1.0;
                        for (j, &b) in beta.iter().enumerate() {
                            alpha[self.normal[j]] = b;
                            vb *= v[j].powi(b as i32);
                        }
                        alpha[self.normal[w]] += 1;
                        multinomial(self.n - 1, beta) * vals[&alpha] * vb
                    })
                    .sum();
                comp * comp
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// The constant `(N/4)·inf_v (2/N!·‖E^(N)(0)v^{N-1}‖)^{1/N}` over the normal
/// sphere, with the infimum reduced by the sampling margin.
pub fn gmb_constant(p: &Polynomial, k: &[usize], n: u32) -> Result<f64, MorseBottError> {
    let normal = check_subspace(p, k)?;
    let nth = NthDerivative::new(p, &normal, n);
    let vals = nth.values(&vec![0.0; p.nvars()]);
    let inf = sphere_mesh(normal.len(), SPHERE_POINTS).par_iter().map(|v| nth.covector_norm(&vals, v)).reduce(|| f64::INFINITY, f64::min);
    Ok(n as f64 / 4.0 * (2.0 / factorial(n) * ZETA_MARGIN * inf).powf(1.0 / n as f64))
}

/// Cylinder `C(R, L)` on which the remainder conditions held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cylinder {
    pub radius_r: f64,
    pub length_l: f64,
    pub halvings: u32,
}

fn cylinder_points(d: usize, k: &[usize], normal: &[usize], r: f64, l: f64, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| {
            use rand::Rng;
            let mut x = vec![0.0; d];
            if !k.is_empty() {
                let u = unit_sphere_point(&mut g, k.len());
                let rad = l * g.gen::<f64>().powf(1.0 / k.len() as f64);
                for (ui, &i) in u.iter().zip(k) {
                    x[i] = rad * ui;
                }
            }
            let v = unit_sphere_point(&mut g, normal.len());
            let s = r * g.gen::<f64>();
            for (vi, &i) in v.iter().zip(normal) {
                x[i] += s * vi;
            }
            (x, v)
        })
        .collect()
}

/// Halves `R` and `L` until both remainder conditions hold on the cylinder sample.
pub fn find_cylinder(p: &Polynomial, k: &[usize], n: u32, samples: usize, seed: u64) -> Result<Cylinder, MorseBottError> {
    let normal = check_subspace(p, k)?;
    let nth = NthDerivative::new(p, &normal, n);
    let at0 = nth.values(&vec![0.0; p.nvars()]);
    for halvings in 0..=MAX_HALVINGS {
        let r = 0.5f64.powi(halvings as i32);
        let pts = cylinder_points(p.nvars(), k, &normal, r, r, samples, seed);
        let ok = pts.par_iter().all(|(x, v)| {
            let vals = nth.values(x);
            let diff: BTreeMap<Vec<u32>, f64> = vals.iter().map(|(a, y)| (a.clone(), y - at0[a])).collect();
            let tol = 1e-12;
            nth.full(&diff, v).abs() <= nth.full(&at0, v).abs() + tol
                && nth.covector_norm(&diff, v) <= 0.5 * nth.covector_norm(&at0, v) + tol
        });
        if ok {
            return Ok(Cylinder { radius_r: r, length_l: r, halvings });
        }
    }
    Err(MorseBottError::RadiusUnderflow(MAX_HALVINGS))
}

fn gmb_ratio(g: &CompiledGradient, theta: f64, x: &[f64]) -> Option<f64> {
    let e = g.value(x).abs();
    (e > 0.0).then(|| norm(&g.gradient(x)) / e.powf(theta))
}

/// Checks `‖∇E‖ ≥ C |E|^{1-1/N}` on the proof's cylinder.
pub fn verify_gmb_gradient_inequality(
    p: &Polynomial,
    report: &MorseBottReport,
    samples: usize,
    seed: u64,
) -> Result<(InequalityCheckReport, Cylinder), MorseBottError> {
    let n = report.order_n.ok_or(MorseBottError::MissingOrder)?;
    let k = &report.critical_subspace;
    let normal = check_subspace(p, k)?;
    let c = gmb_constant(p, k, n)?;
    let cyl = find_cylinder(p, k, n, samples, seed)?;
    let g = CompiledGradient::new(p);
    let theta = 1.0 - 1.0 / n as f64;
    let pts = cylinder_points(p.nvars(), k, &normal, cyl.radius_r, cyl.length_l, samples, seed.wrapping_add(1));
    let (min, used) = pts
        .par_iter()
        .filter_map(|(x, _)| gmb_ratio(&g, theta, x))
        .map(|r| (r, 1usize))
        .reduce(|| (f64::INFINITY, 0), |a, b| (a.0.min(b.0), a.1 + b.1));
    let theta_q = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(n));
    let check = InequalityCheckReport::new(InequalityId::Gradient, theta_q, min, Some(c), used, (cyl.radius_r, Some(cyl.length_l)));
    Ok((check, cyl))
}

/// The same inequality evaluated at caller-chosen points.
pub fn probe_gmb_gradient_inequality(
    p: &Polynomial,
    report: &MorseBottReport,
    points: &[Vec<f64>],
) -> Result<InequalityCheckReport, MorseBottError> {
    let n = report.order_n.ok_or(MorseBottError::MissingOrder)?;
    let c = gmb_constant(p, &report.critical_subspace, n)?;
    let g = CompiledGradient::new(p);
    let theta = 1.0 - 1.0 / n as f64;
    let ratios: Vec<f64> = points.iter().filter_map(|x| gmb_ratio(&g, theta, x)).collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let theta_q = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(n));
    let radius = points.iter().map(|x| norm(x)).fold(0.0, f64::max);
    Ok(InequalityCheckReport::new(InequalityId::Gradient, theta_q, min, Some(c), ratios.len(), (radius, None)))
}

pub fn theta_f64(report: &MorseBottReport) -> Option<f64> {
    report.predicted_theta.as_ref().map(rat_to_f64)
}
