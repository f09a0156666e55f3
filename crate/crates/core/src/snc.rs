//! Simple normal crossings at the origin: detection, the exponent
//! `θ = 1 - 1/N`, and the constructive constant `C₀`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{CompiledGradient, PolyError, Polynomial};
use crate::report::{ser_rational, InequalityCheckReport, InequalityId};
use crate::sampling::{ball_points, norm};

pub const DEFAULT_SIGMA: f64 = 0.5;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SncError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("residual vanishes at the origin; resolve the singularity first")]
    NotSnc,
    #[error("no variable divides the polynomial, so it does not vanish at the origin")]
    NoZeroAtOrigin,
    #[error("origin is not a critical point: a single active variable has exponent 1")]
    NotCritical,
    #[error("ball radius underflow after {0} halvings")]
    SigmaUnderflow(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `p = x^n · f₀` with the maximal monomial content split off.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialFactorization {
    pub exponents: Vec<u32>,
    pub residual: Polynomial,
    pub snc_at_origin: bool,
}

impl MonomialFactorization {
    /// Indices with a positive exponent.
    pub fn active(&self) -> Vec<usize> {
        (0..self.exponents.len()).filter(|&i| self.exponents[i] > 0).collect()
    }
}

pub fn detect_snc(p: &Polynomial) -> Result<MonomialFactorization, SncError> {
    let (exponents, residual) = p.extract_monomial_factor()?;
    let snc_at_origin = !residual.constant_term().is_zero();
    Ok(MonomialFactorization { exponents, residual, snc_at_origin })
}

/// Constants of the constructive proof, measured on a ball sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallConstants {
    pub sigma: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub halvings: u32,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    #[serde(serialize_with = "ser_rational")]
    pub theta: BigRational,
    #[serde(rename = "N")]
    pub total_degree: u32,
    #[serde(rename = "c")]
    pub active_count: usize,
    #[serde(rename = "n")]
    pub max_exponent: u32,
    pub optimal: bool,
    #[serde(flatten)]
    pub constants: Option<BallConstants>,
}

impl ExponentReport {
    pub fn theta_f64(&self) -> f64 {
        crate::poly::rat_to_f64(&self.theta)
    }
}

/// Exponent data from the monomial content alone.
pub fn exponent_from_snc(mf: &MonomialFactorization) -> Result<ExponentReport, SncError> {
    if !mf.snc_at_origin {
        return Err(SncError::NotSnc);
    }
    exponent_from_exponents(&mf.exponents)
}

/// `θ = 1 - 1/N` for a monomial `x^n` times a unit.
pub fn exponent_from_exponents(exponents: &[u32]) -> Result<ExponentReport, SncError> {
    let active: Vec<u32> = exponents.iter().copied().filter(|&k| k > 0).collect();
    let c = active.len();
    let n = active.iter().copied().max().unwrap_or(0);
    if c == 0 {
        return Err(SncError::NoZeroAtOrigin);
    }
    if c == 1 && n == 1 {
        return Err(SncError::NotCritical);
    }
    let total: u32 = active.iter().sum();
    let theta = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(total));
    Ok(ExponentReport { theta, total_degree: total, active_count: c, max_exponent: n, optimal: total == 2, constants: None })
}

/// Shrinks the ball until `|x_j ∂_j F| ≤ (n_j/2)|F|` holds at every sample for
/// each active `j`, then measures `m`, `M` and `C₀`.
pub fn compute_constants(mf: &MonomialFactorization, sigma: f64, samples: usize, seed: u64) -> Result<ExponentReport, SncError> {
    let mut report = exponent_from_snc(mf)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SncError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let dim = mf.residual.nvars();
    let f = CompiledGradient::new(&mf.residual);
    let active = mf.active();
    let theta = report.theta_f64();
    for halvings in 0..=MAX_HALVINGS {
        let radius = sigma / 2f64.powi(halvings as i32);
        if radius == 0.0 {
            break;
        }
        let pts = ball_points(dim, radius, samples, seed);
        let shrinking_ok = pts.par_iter().all(|x| {
            let fx = f.value(x).abs();
            let g = f.gradient(x);
            active.iter().all(|&j| (x[j] * g[j]).abs() <= 0.5 * mf.exponents[j] as f64 * fx)
        });
        if !shrinking_ok {
            continue;
        }
        let (m, big_m) = pts
            .par_iter()
            .map(|x| {
                let v = f.value(x).abs();
                (v, v)
            })
            .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
        if !(m > 0.0) {
            continue;
        }
        let c0 = if report.active_count >= 2 {
            m * (report.total_degree as f64 / report.max_exponent as f64).sqrt() / (2.0 * big_m.powf(theta))
        } else {
            m / (2.0 * big_m.powf(theta))
        };
        report.constants = Some(BallConstants { sigma: radius, m, big_m, c0, halvings, samples });
        return Ok(report);
    }
    Err(SncError::SigmaUnderflow(MAX_HALVINGS))
}

/// Minimum of `‖∇p‖ / |p|^θ` over a ball sample.
///
/// Points where `p` vanishes or that lie within `1e-12·σ` of a coordinate
/// hyperplane are skipped.
pub fn min_gradient_ratio(p: &Polynomial, theta: f64, sigma: f64, samples: usize, seed: u64) -> (f64, usize) {
    let f = CompiledGradient::new(p);
    let pts = ball_points(p.nvars(), sigma, samples, seed);
    let cutoff = 1e-12 * sigma;
    pts.par_iter()
        .filter(|x| x.iter().all(|v| v.abs() >= cutoff))
        .filter_map(|x| {
            let e = f.value(x).abs();
            if e == 0.0 {
                return None;
            }
            Some(norm(&f.gradient(x)) / e.powf(theta))
        })
        .map(|r| (r, 1usize))
        .reduce(|| (f64::INFINITY, 0), |a, b| (a.0.min(b.0), a.1 + b.1))
}

/// Samples the ball of the report and checks `‖∇p‖ ≥ C₀ |p|^θ`.
pub fn verify_gradient_inequality(
    p: &Polynomial,
    report: &ExponentReport,
    samples: usize,
    seed: u64,
) -> Result<InequalityCheckReport, SncError> {
    let k = report.constants.as_ref().ok_or_else(|| SncError::InvalidArgument("report has no ball constants".into()))?;
    let (min_ratio, used) = min_gradient_ratio(p, report.theta_f64(), k.sigma, samples, seed);
    let mut check = InequalityCheckReport::new(InequalityId::Gradient, report.theta.clone(), min_ratio, Some(k.c0), used, (k.sigma, None));
    check.pass = min_ratio.is_finite() && min_ratio >= k.c0;
    Ok(check)
}

/// Analysis report in the flat JSON layout used by the command line.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisJson {
    #[serde(flatten)]
    pub exponent: ExponentReport,
    pub min_ratio: f64,
    pub pass: bool,
}

impl AnalysisJson {
    pub fn new(exponent: ExponentReport, check: &InequalityCheckReport) -> Self {
        AnalysisJson { exponent, min_ratio: check.measured_constant, pass: check.pass }
    }
}

/// Both sides `((∏a_j)^r, r·Σ a_j^{p_j}/p_j)` of the generalized Young
/// inequality with `1/r = Σ 1/p_j`.
pub fn generalized_young(a: &[f64], p: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), p.len());
    let r = 1.0 / p.iter().map(|q| 1.0 / q).sum::<f64>();
    let lhs = (r * a.iter().map(|v| v.ln()).sum::<f64>()).exp();
    let rhs = r * a.iter().zip(p).map(|(v, q)| v.powf(*q) / q).sum::<f64>();
    (lhs, rhs)
}

/// Exact form of the generalized Young inequality for rational `a_j > 0` and
/// integer `p_j ≥ 1`: with `r = u/w`, checks `(∏a_j)^u ≤ (r·Σ a_j^{p_j}/p_j)^w`.
pub fn generalized_young_exact(a: &[BigRational], p: &[u32]) -> bool {
    assert_eq!(a.len(), p.len());
    assert!(a.iter().all(|v| v.is_positive()) && p.iter().all(|&q| q > 0));
    let inv_r: BigRational = p.iter().map(|&q| BigRational::new(BigInt::one(), BigInt::from(q))).sum();
    let r = inv_r.recip();
    let rhs: BigRational = a
        .iter()
        .zip(p)
        .map(|(v, &q)| num_traits::pow(v.clone(), q as usize) / BigRational::from_integer(BigInt::from(q)))
        .sum::<BigRational>()
        * &r;
    let prod: BigRational = a.iter().cloned().product();
    let u: usize = r.numer().try_into().expect("small exponent");
    let w: usize = r.denom().try_into().expect("small exponent");
    num_traits::pow(prod, u) <= num_traits::pow(rhs, w)
}

/// Both sides of `∏x_i^{2n_i}·Σx_j^{-2} ≥ (N/n)(∏x_i^{2n_i})^θ` over the
/// active coordinates, computed in log space.
pub fn monomial_inequality(x: &[f64], n: &[u32]) -> (f64, f64) {
    assert_eq!(x.len(), n.len());
    let total: u32 = n.iter().sum();
    let nmax = *n.iter().max().expect("nonempty");
    let theta = 1.0 - 1.0 / total as f64;
    let log_prod: f64 = x.iter().zip(n).map(|(v, &k)| 2.0 * k as f64 * v.abs().ln()).sum();
    let inv_sq: f64 = x.iter().zip(n).filter(|(_, &k)| k > 0).map(|(v, _)| v.powi(-2)).sum();
    let lhs = (log_prod + inv_sq.ln()).exp();
    let rhs = total as f64 / nmax as f64 * (theta * log_prod).exp();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, rat};

    #[test]
    fn detection_examples() {
        let cusp = detect_snc(&parse("x^2 - y^3").unwrap()).unwrap();
        assert_eq!(cusp.exponents, vec![0, 0]);
        assert!(!cusp.snc_at_origin);
        let tower = detect_snc(&parse("a^6*b^2 - a^6*b^3").unwrap()).unwrap();
        assert_eq!(tower.exponents, vec![6, 2]);
        assert_eq!(tower.residual, parse("1 - b").unwrap());
        assert!(tower.snc_at_origin);
        let cross = detect_snc(&parse("x1*x2").unwrap()).unwrap();
        assert_eq!((cross.exponents.clone(), cross.snc_at_origin), (vec![1, 1], true));
        assert_eq!(detect_snc(&parse("0").unwrap()), Err(SncError::Poly(PolyError::ZeroPolynomial)));
    }

    #[test]
    fn exponent_examples() {
        let r = exponent_from_exponents(&[1, 1]).unwrap();
        assert_eq!((r.theta.clone(), r.total_degree, r.active_count, r.optimal), (rat(1, 2), 2, 2, true));
        let r = exponent_from_exponents(&[6, 2]).unwrap();
        assert_eq!((r.theta.clone(), r.total_degree, r.optimal), (rat(7, 8), 8, false));
        assert_eq!(exponent_from_exponents(&[6, 1]).unwrap().theta, rat(6, 7));
        assert_eq!(exponent_from_exponents(&[0, 1]), Err(SncError::NotCritical));
        assert_eq!(exponent_from_exponents(&[0, 0]), Err(SncError::NoZeroAtOrigin));
        assert!(exponent_from_exponents(&[2, 0]).unwrap().optimal);
    }

    #[test]
    fn constants_for_unit_residual() {
        let mf = detect_snc(&parse("x1*x2").unwrap()).unwrap();
        let r = compute_constants(&mf, 0.5, 2000, 1).unwrap();
        let k = r.constants.unwrap();
        assert_eq!((k.m, k.big_m), (1.0, 1.0));
        assert!((k.c0 - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let mf = detect_snc(&parse("x^2").unwrap()).unwrap();
        assert_eq!(compute_constants(&mf, 0.5, 100, 1).unwrap().constants.unwrap().c0, 0.5);
    }

    #[test]
    fn constants_with_nontrivial_unit() {
        let mf = detect_snc(&parse("a^6*b^2*(1 - b)").unwrap()).unwrap();
        let r = compute_constants(&mf, 0.25, 10_000, 3).unwrap();
        let k = r.constants.unwrap();
        assert_eq!(k.halvings, 0);
        assert_eq!((k.m, k.big_m), (0.75, 1.25));
        let expected = 0.75 * (8.0f64 / 6.0).sqrt() / (2.0 * 1.25f64.powf(0.875));
        assert!((k.c0 - expected).abs() < 1e-15);
    }

    #[test]
    fn generalized_young_small_cases() {
        let (l, r) = generalized_young(&[2.0, 3.0], &[2.0, 2.0]);
        assert!((l - 6.0).abs() < 1e-12 && (r - 6.5).abs() < 1e-12);
        assert!(generalized_young_exact(&[rat(2, 1), rat(3, 1)], &[2, 3]));
        assert!(generalized_young_exact(&[rat(1, 1), rat(1, 1)], &[2, 2]));
    }
}
