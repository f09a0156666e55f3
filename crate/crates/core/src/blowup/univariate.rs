//! Dense univariate polynomials over the rationals: rational roots and
//! Sturm counts of distinct real roots.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficients from the constant term upwards, without trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct UPoly(pub Vec<BigRational>);

/// Largest integer whose divisors are enumerated by trial division.
pub const DIVISOR_SEARCH_LIMIT: u64 = 1_000_000_000_000;

impl UPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.0.iter().enumerate().skip(1).map(|(k, c)| c * BigRational::from_integer(BigInt::from(k))).collect())
    }

    /// Remainder of division by a nonzero `d`.
    pub fn rem(&self, d: &UPoly) -> UPoly {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let q = &r[k] / &lead;
            if !q.is_zero() {
                for (i, c) in d.0.iter().enumerate() {
                    let idx = k - dd + i;
                    r[idx] = &r[idx] - &q * c;
                }
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    fn sign_at_infinity(&self, positive: bool) -> i32 {
        match self.degree() {
            None => 0,
            Some(d) => {
                let s = if self.0[d].is_positive() { 1 } else { -1 };
                if positive || d % 2 == 0 {
                    s
                } else {
                    -s
                }
            }
        }
    }

    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(UPoly::new(r.0.into_iter().map(|c| -c).collect()));
        }
        let changes = |positive: bool| {
            let signs: Vec<i32> = seq.iter().map(|p| p.sign_at_infinity(positive)).filter(|&s| s != 0).collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        changes(false) - changes(true)
    }

    /// Distinct rational roots in increasing order. Returns `None` when a
    /// coefficient is too large for the divisor search.
    pub fn rational_roots(&self) -> Option<Vec<BigRational>> {
        if self.degree().unwrap_or(0) == 0 {
            return Some(vec![]);
        }
        let den_lcm = self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * BigRational::from_integer(den_lcm.clone())).to_integer()).collect();
        let mut roots = Vec::new();
        let low = ints.iter().position(|c| !c.is_zero()).expect("nonzero polynomial");
        if low > 0 {
            roots.push(BigRational::zero());
        }
        let a0 = ints[low].abs().to_u64().filter(|&v| v <= DIVISOR_SEARCH_LIMIT)?;
        let an = ints.last().unwrap().abs().to_u64().filter(|&v| v <= DIVISOR_SEARCH_LIMIT)?;
        for p in divisors(a0) {
            for q in divisors(an) {
                for s in [1i64, -1] {
                    let cand = BigRational::new(BigInt::from(p) * s, BigInt::from(q));
                    if !roots.contains(&cand) && self.eval(&cand).is_zero() {
                        roots.push(cand);
                    }
                }
            }
        }
        roots.sort();
        Some(roots)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}
