//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Every symbolic computation in the crate (normal-crossing detection, chart
//! pullbacks, Taylor data for Morse–Bott checks) runs on [`Polynomial`].
//! Numeric sampling goes through [`CompiledPoly`], a flattened `f64` copy.

mod compiled;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use compiled::{CompiledGradient, CompiledPoly};
pub use parse::parse;

/// Largest exponent allowed for any single variable.
pub const MAX_DEGREE: u32 = 64;
/// Largest number of stored terms.
pub const MAX_TERMS: usize = 1_000_000;

/// Exponent vector, one entry per variable of the owning polynomial.
pub type Exponents = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown character {character:?} at position {position}")]
    UnknownCharacter { position: usize, character: char },
    #[error("exponent at position {position} is not a non-negative integer")]
    NonIntegerExponent { position: usize },
    #[error("division by zero in literal at position {position}")]
    ZeroDenominator { position: usize },
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable {0:?} is not a variable of the polynomial")]
    UnknownVariable(String),
    #[error("substitution introduces {0:?}, which is already a variable left untouched by the substitution")]
    VariableCollision(String),
    #[error("degree {degree} in variable {variable:?} exceeds the cap of {MAX_DEGREE}")]
    DegreeCap { variable: String, degree: u64 },
    #[error("term count {0} exceeds the cap of {MAX_TERMS}")]
    TermCap(usize),
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("invalid variable name {0:?}")]
    InvalidName(String),
}

pub type Result<T> = std::result::Result<T, PolyError>;

/// Builds the rational `num/den`.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        // Huge numerator or denominator: shift both down before dividing.
        _ => {
            let nb = q.numer().bits() as i64;
            let db = q.denom().bits() as i64;
            let shift_n = (nb - 1000).max(0) as usize;
            let shift_d = (db - 1000).max(0) as usize;
            let n = (q.numer() >> shift_n).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift_d).to_f64().unwrap_or(f64::NAN);
            n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
        }
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn rat_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Exact sparse polynomial over the rationals.
///
/// Terms are keyed by exponent vectors aligned with `vars`. Zero coefficients
/// are never stored, so the zero polynomial has an empty term map.
#[derive(Debug, Clone)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Exponents, BigRational>,
}

impl Polynomial {
    pub fn zero(vars: Vec<String>) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vec<String>, c: BigRational) -> Self {
        let mut p = Polynomial::zero(vars);
        if !c.is_zero() {
            let e = vec![0; p.vars.len()];
            p.terms.insert(e, c);
        }
        p
    }

    /// The polynomial consisting of the single variable `name` of `vars`.
    pub fn var(vars: &[String], name: &str) -> Result<Self> {
        let idx = vars.iter().position(|v| v == name).ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        Ok(Polynomial::monomial(vars.to_vec(), e, BigRational::one()))
    }

    pub fn monomial(vars: Vec<String>, exps: Exponents, c: BigRational) -> Self {
        assert_eq!(vars.len(), exps.len(), "exponent vector length");
        let mut p = Polynomial::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Builds a polynomial from raw terms; zero coefficients are dropped and
    /// repeated exponent vectors are summed.
    pub fn from_terms<I>(vars: Vec<String>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponents, BigRational)>,
    {
        let mut p = Polynomial::zero(vars);
        for (e, c) in terms {
            if e.len() != p.vars.len() {
                return Err(PolyError::DimensionMismatch { expected: p.vars.len(), got: e.len() });
            }
            p.add_term(e, c);
        }
        p.check_caps()?;
        Ok(p)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, BigRational> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Value at the origin.
    pub fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Largest exponent of the variable at `idx`.
    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|e| e[idx]).max().unwrap_or(0)
    }

    /// Index of a variable by name.
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_caps(&self) -> Result<()> {
        if self.terms.len() > MAX_TERMS {
            return Err(PolyError::TermCap(self.terms.len()));
        }
        for (i, v) in self.vars.iter().enumerate() {
            let d = self.degree_in(i);
            if d > MAX_DEGREE {
                return Err(PolyError::DegreeCap { variable: v.clone(), degree: d as u64 });
            }
        }
        Ok(())
    }

    /// Re-expresses the polynomial over `vars`, which must contain every
    /// variable that occurs with a nonzero exponent.
    pub fn with_vars(&self, vars: &[String]) -> Result<Self> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| match vars.iter().position(|w| w == v) {
                Some(j) => Ok(j),
                None if self.degree_in(i) == 0 => Ok(usize::MAX),
                None => Err(PolyError::UnknownVariable(v.clone())),
            })
            .collect::<Result<_>>()?;
        let mut out = Polynomial::zero(vars.to_vec());
        for (e, c) in &self.terms {
            let mut ne = vec![0; vars.len()];
            for (i, &k) in e.iter().enumerate() {
                if map[i] != usize::MAX {
                    ne[map[i]] = k;
                }
            }
            out.terms.insert(ne, c.clone());
        }
        Ok(out)
    }

    /// Brings `self` and `other` onto a common variable list: the variables of
    /// `self` followed by the new ones of `other`, in order.
    fn aligned(&self, other: &Polynomial) -> (Polynomial, Polynomial) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        (self.with_vars(&vars).expect("superset of variables"), other.with_vars(&vars).expect("superset of variables"))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let (mut a, b) = self.aligned(other);
        for (e, c) in b.terms {
            a.add_term(e, c);
        }
        a
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.vars.clone());
        }
        Polynomial { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect() }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        let (a, b) = self.aligned(other);
        for (i, v) in a.vars.iter().enumerate() {
            let d = a.degree_in(i) as u64 + b.degree_in(i) as u64;
            if d > MAX_DEGREE as u64 && !a.is_zero() && !b.is_zero() {
                return Err(PolyError::DegreeCap { variable: v.clone(), degree: d });
            }
        }
        let mut out = Polynomial::zero(a.vars.clone());
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
            if out.terms.len() > MAX_TERMS {
                return Err(PolyError::TermCap(out.terms.len()));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Polynomial> {
        let mut result = Polynomial::constant(self.vars.clone(), BigRational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Exact partial derivative with respect to the variable at `idx`.
    pub fn derivative(&self, idx: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.vars.clone());
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[idx] -= 1;
            out.add_term(ne, c * BigRational::from_integer(BigInt::from(e[idx])));
        }
        out
    }

    /// Exact gradient: component `i` is the partial derivative in variable `i`.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.vars.len()).map(|i| self.derivative(i)).collect()
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        self.check_dim(point.len())?;
        Ok(CompiledPoly::new(self).eval(point))
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, point: &[BigRational]) -> Result<BigRational> {
        self.check_dim(point.len())?;
        let mut powers: Vec<Vec<BigRational>> = Vec::with_capacity(point.len());
        for (i, x) in point.iter().enumerate() {
            let d = self.degree_in(i) as usize;
            let mut row = Vec::with_capacity(d + 1);
            row.push(BigRational::one());
            for k in 1..=d {
                let next = &row[k - 1] * x;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= &powers[i][k as usize];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.vars.len() {
            return Err(PolyError::DimensionMismatch { expected: self.vars.len(), got });
        }
        Ok(())
    }

    /// Applies a substitution. Substituted variables are replaced in place by
    /// the variables of their images; untouched variables are kept.
    pub fn substitute(&self, s: &Substitution) -> Result<Polynomial> {
        for (name, _) in s.iter() {
            if !self.vars.contains(name) {
                return Err(PolyError::UnknownVariable(name.clone()));
            }
        }
        let kept: Vec<&String> = self.vars.iter().filter(|v| s.get(v).is_none()).collect();
        let mut new_vars: Vec<String> = Vec::new();
        for v in &self.vars {
            match s.get(v) {
                None => {
                    if !new_vars.contains(v) {
                        new_vars.push(v.clone());
                    }
                }
                Some(img) => {
                    for w in img.vars() {
                        if kept.contains(&w) {
                            return Err(PolyError::VariableCollision(w.clone()));
                        }
                        if !new_vars.contains(w) {
                            new_vars.push(w.clone());
                        }
                    }
                }
            }
        }
        // Image of each source variable over the new variable list, with a
        // power cache filled on demand.
        let images: Vec<Polynomial> = self
            .vars
            .iter()
            .map(|v| match s.get(v) {
                Some(img) => img.with_vars(&new_vars),
                None => Polynomial::var(&new_vars, v),
            })
            .collect::<Result<_>>()?;
        let mut cache: Vec<Vec<Polynomial>> =
            images.iter().map(|img| vec![Polynomial::constant(new_vars.clone(), BigRational::one()), img.clone()]).collect();
        let mut out = Polynomial::zero(new_vars.clone());
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(new_vars.clone(), c.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while cache[i].len() <= k {
                    let next = cache[i].last().unwrap().mul(&images[i])?;
                    cache[i].push(next);
                }
                t = t.mul(&cache[i][k])?;
            }
            for (te, tc) in t.terms {
                out.add_term(te, tc);
            }
            if out.terms.len() > MAX_TERMS {
                return Err(PolyError::TermCap(out.terms.len()));
            }
        }
        out.check_caps()?;
        Ok(out)
    }

    /// Splits off the largest monomial dividing every term.
    ///
    /// Returns `(m, q)` with `x^m * q == self`; `q` has, for every variable, at
    /// least one term in which that variable does not occur.
    pub fn extract_monomial_factor(&self) -> Result<(Exponents, Polynomial)> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let n = self.vars.len();
        let mut m = vec![u32::MAX; n];
        for e in self.terms.keys() {
            for i in 0..n {
                m[i] = m[i].min(e[i]);
            }
        }
        let terms = self.terms.iter().map(|(e, c)| (e.iter().zip(&m).map(|(a, b)| a - b).collect(), c.clone())).collect();
        Ok((m, Polynomial { vars: self.vars.clone(), terms }))
    }

    /// Renames variables; names absent from `table` are kept.
    pub fn rename(&self, table: &[(&str, &str)]) -> Polynomial {
        let vars = self
            .vars
            .iter()
            .map(|v| table.iter().find(|(from, _)| from == v).map(|(_, to)| to.to_string()).unwrap_or_else(|| v.clone()))
            .collect();
        Polynomial { vars, terms: self.terms.clone() }
    }

    /// Canonical key: sorted `(name, exponent)` lists, unused variables dropped.
    fn canonical(&self) -> BTreeMap<Vec<(&str, u32)>, &BigRational> {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut key: Vec<(&str, u32)> = self.vars.iter().zip(e).filter(|(_, &k)| k > 0).map(|(v, &k)| (v.as_str(), k)).collect();
                key.sort();
                (key, c)
            })
            .collect()
    }

    /// Terms in canonical print order: descending total degree, then
    /// descending lexicographic order of the exponent vector.
    pub fn sorted_terms(&self) -> Vec<(&Exponents, &BigRational)> {
        let mut t: Vec<_> = self.terms.iter().collect();
        t.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        t
    }
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for Polynomial {}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&x| x == 0);
            if !abs.is_one() || is_const {
                factors.push(rat_string(&abs));
            }
            for (v, &x) in self.vars.iter().zip(e.iter()) {
                match x {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{x}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Variable-to-polynomial map applied by [`Polynomial::substitute`].
///
/// Entries keep insertion order so reports print deterministically.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Substitution {
    entries: Vec<(String, Polynomial)>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, image: Polynomial) {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = image,
            None => self.entries.push((name, image)),
        }
    }

    pub fn with(mut self, name: impl Into<String>, image: Polynomial) -> Self {
        self.insert(name, image);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Polynomial> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Polynomial)> {
        self.entries.iter().map(|(n, p)| (n, p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `self ∘ inner`: first apply `self`, then rewrite the result through
    /// `inner`. Images of `self` are pushed through `inner`.
    pub fn then(&self, inner: &Substitution) -> Result<Substitution> {
        let mut out = Substitution::new();
        for (name, img) in &self.entries {
            let restricted = inner.restricted_to(img.vars());
            out.insert(name.clone(), img.substitute(&restricted)?);
        }
        Ok(out)
    }

    fn restricted_to(&self, vars: &[String]) -> Substitution {
        Substitution { entries: self.entries.iter().filter(|(n, _)| vars.contains(n)).cloned().collect() }
    }
}
