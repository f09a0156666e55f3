//! Recursive-descent parser for the polynomial expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' INT)?
//! atom   := INT ('/' INT)? | IDENT | '(' expr ')'
//! ```
//!
//! Identifiers are `[a-zA-Z][a-zA-Z0-9_]*`. Implicit multiplication is a
//! syntax error. Variables are ordered by first appearance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{PolyError, Polynomial, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Decimal,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    out.push((start, Tok::Decimal));
                    continue;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push((start, Tok::Int(digits.parse().expect("ascii digits"))));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '/' => out.push((start, Tok::Slash)),
            '^' => out.push((start, Tok::Caret)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            other => return Err(PolyError::UnknownCharacter { position: start, character: other }),
        }
        i += 1;
    }
    Ok(out)
}

/// Parses an expression into a canonical polynomial.
pub fn parse(text: &str) -> Result<Polynomial> {
    let toks = lex(text)?;
    let mut vars: Vec<String> = Vec::new();
    for (_, t) in &toks {
        if let Tok::Ident(name) = t {
            if !vars.contains(name) {
                vars.push(name.clone());
            }
        }
    }
    let mut parser = Parser { toks, pos: 0, vars, end: text.chars().count() };
    if parser.toks.is_empty() {
        return Err(PolyError::Syntax { position: 0, message: "empty expression".into() });
    }
    let p = parser.expr()?;
    if let Some((at, t)) = parser.toks.get(parser.pos) {
        return Err(PolyError::Syntax { position: *at, message: format!("unexpected {}", describe(t)) });
    }
    Ok(p)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number {n}"),
        Tok::Decimal => "decimal literal".into(),
        Tok::Ident(s) => format!("identifier {s:?} (implicit multiplication is not allowed)"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: Vec<String>,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let at = self.here();
            let k = match self.toks.get(self.pos) {
                Some((_, Tok::Int(n))) => n.to_u32().ok_or(PolyError::DegreeCap { variable: "^".into(), degree: u64::MAX })?,
                Some(_) => return Err(PolyError::NonIntegerExponent { position: at }),
                None => return Err(PolyError::Syntax { position: at, message: "missing exponent".into() }),
            };
            self.pos += 1;
            if let Some(Tok::Slash) = self.peek() {
                return Err(PolyError::NonIntegerExponent { position: at });
            }
            return base.pow(k);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let at = self.here();
        let tok = self.toks.get(self.pos).map(|(_, t)| t.clone());
        match tok {
            Some(Tok::Int(num)) => {
                self.pos += 1;
                let mut value = BigRational::from_integer(num);
                if let Some(Tok::Slash) = self.peek() {
                    self.pos += 1;
                    let den_at = self.here();
                    match self.toks.get(self.pos).map(|(_, t)| t.clone()) {
                        Some(Tok::Int(den)) => {
                            if den.is_zero() {
                                return Err(PolyError::ZeroDenominator { position: den_at });
                            }
                            self.pos += 1;
                            value /= BigRational::from_integer(den);
                        }
                        _ => {
                            return Err(PolyError::Syntax {
                                position: den_at,
                                message: "'/' is only allowed between integer literals".into(),
                            })
                        }
                    }
                }
                Ok(Polynomial::constant(self.vars.clone(), value))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Polynomial::var(&self.vars, &name)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(PolyError::Syntax { position: self.here(), message: "expected ')'".into() }),
                }
            }
            Some(Tok::Decimal) => Err(PolyError::Syntax { position: at, message: "decimal literals are not supported; write p/q".into() }),
            Some(t) => Err(PolyError::Syntax { position: at, message: format!("unexpected {}", describe(&t)) }),
            None => Err(PolyError::Syntax { position: at, message: "unexpected end of input".into() }),
        }
    }
}
