//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::error::ParseError;
use crate::numeric::{fmt_rat, parse_rat, Rat};
use crate::syntax::PropLetter;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable orders differ ({left} vs {right} variables)")]
    ArityMismatch { left: usize, right: usize },
    #[error("variable `{0}` is not in the target variable order")]
    UnknownVariable(PropLetter),
    #[error("point has {got} coordinates, polynomial has {want} variables")]
    PointArity { got: usize, want: usize },
}

/// Exponent vector, one entry per variable of the owning polynomial.
pub type Monomial = Vec<u32>;

/// A polynomial over a fixed variable order. Zero coefficients are never
/// stored, so structural equality is coefficientwise equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    vars: Vec<PropLetter>,
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero(vars: &[PropLetter]) -> Self {
        Poly {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[PropLetter], c: Rat) -> Self {
        let mut p = Poly::zero(vars);
        p.add_term(vec![0; vars.len()], c);
        p
    }

    pub fn one(vars: &[PropLetter]) -> Self {
        Poly::constant(vars, Rat::one())
    }

    /// The variable at position `i`.
    pub fn var(vars: &[PropLetter], i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Poly::zero(vars);
        p.add_term(e, Rat::one());
        p
    }

    pub fn letter(vars: &[PropLetter], p: &PropLetter) -> Result<Self, PolyError> {
        let i = vars
            .iter()
            .position(|v| v == p)
            .ok_or_else(|| PolyError::UnknownVariable(p.clone()))?;
        Ok(Poly::var(vars, i))
    }

    pub fn from_terms(
        vars: &[PropLetter],
        terms: impl IntoIterator<Item = (Monomial, Rat)>,
    ) -> Self {
        let mut p = Poly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "monomial arity");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn vars(&self) -> &[PropLetter] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Rat {
        self.coefficient(&vec![0; self.vars.len()])
    }

    /// Coefficients of an affine polynomial: one per variable, plus the constant.
    pub fn affine_parts(&self) -> Option<(Vec<Rat>, Rat)> {
        if self.degree() > 1 {
            return None;
        }
        let n = self.vars.len();
        let coeffs = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                self.coefficient(&e)
            })
            .collect();
        Some((coeffs, self.constant_term()))
    }

    fn check(&self, other: &Poly) -> Result<(), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::ArityMismatch {
                left: self.vars.len(),
                right: other.vars.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rat::one())
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rat) -> Poly {
        let mut out = Poly::zero(&self.vars);
        if r.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c * r);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = Poly::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        for _ in 0..n {
            acc = acc.mul(self).expect("same variable order");
        }
        acc
    }

    pub fn eval(&self, point: &[Rat]) -> Result<Rat, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::PointArity {
                got: point.len(),
                want: self.vars.len(),
            });
        }
        let mut total = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, k) in point.iter().zip(e) {
                for _ in 0..*k {
                    t *= x;
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Re-expresses the polynomial over `vars`, which must contain every
    /// variable that actually occurs.
    pub fn reindex(&self, vars: &[PropLetter]) -> Result<Poly, PolyError> {
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            let used = self.terms.keys().any(|e| e[i] > 0);
            match vars.iter().position(|w| w == v) {
                Some(j) => map.push(Some(j)),
                None if !used => map.push(None),
                None => return Err(PolyError::UnknownVariable(v.clone())),
            }
        }
        let mut out = Poly::zero(vars);
        for (e, c) in &self.terms {
            let mut f = vec![0; vars.len()];
            for (i, k) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    f[j] += k;
                }
            }
            out.add_term(f, c.clone());
        }
        Ok(out)
    }

    /// Terms in rendering order: total degree descending, then exponent
    /// vectors descending.
    pub fn ordered_terms(&self) -> Vec<(&Monomial, &Rat)> {
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        ts
    }
}

/// Coefficientwise equality after aligning variable orders.
pub fn poly_eq(a: &Poly, b: &Poly) -> Result<bool, PolyError> {
    if a.vars == b.vars {
        return Ok(a == b);
    }
    let mut vars = a.vars.clone();
    for v in &b.vars {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    Ok(a.reindex(&vars)? == b.reindex(&vars)?)
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts = self.ordered_terms();
        if ts.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in ts.into_iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(j, k)| {
                    if *k == 1 {
                        self.vars[j].to_string()
                    } else {
                        format!("{}^{k}", self.vars[j])
                    }
                })
                .collect();
            if factors.is_empty() {
                f.write_str(&fmt_rat(&abs))?;
            } else if abs.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rat(&abs), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Parses the text rendering `c*x^e*y + ... - ...` over the given variable
/// order. Variable names may be user or fresh (`_k`) letters.
pub fn parse_poly(text: &str, vars: &[PropLetter]) -> Result<Poly, ParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseError::syntax(0, "empty polynomial"));
    }
    let mut out = Poly::zero(vars);
    // split into signed terms
    let mut terms: Vec<(bool, usize, &str)> = Vec::new();
    let bytes = s.as_bytes();
    let mut start = 0;
    let mut neg = false;
    let mut i = 0;
    if bytes[0] == b'-' || bytes[0] == b'+' {
        neg = bytes[0] == b'-';
        i = 1;
        start = 1;
    }
    while i < bytes.len() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && i > start {
            terms.push((neg, start, &s[start..i]));
            neg = bytes[i] == b'-';
            start = i + 1;
        }
        i += 1;
    }
    terms.push((neg, start, &s[start..]));
    for (neg, pos, term) in terms {
        let term = term.trim();
        if term.is_empty() {
            return Err(ParseError::syntax(pos, "empty term"));
        }
        let mut coeff = Rat::one();
        let mut e = vec![0u32; vars.len()];
        for factor in term.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                return Err(ParseError::syntax(pos, "empty factor"));
            }
            if factor.as_bytes()[0].is_ascii_digit() {
                coeff *= parse_rat(factor).map_err(|_| {
                    ParseError::syntax(pos, format!("bad coefficient `{factor}`"))
                })?;
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((n, k)) => (
                    n.trim(),
                    k.trim()
                        .parse::<u32>()
                        .map_err(|_| ParseError::syntax(pos, format!("bad exponent in `{factor}`")))?,
                ),
                None => (factor, 1),
            };
            let idx = vars
                .iter()
                .position(|v| v.to_string() == name)
                .ok_or_else(|| ParseError::syntax(pos, format!("unknown variable `{name}`")))?;
            e[idx] += exp;
        }
        if neg {
            coeff = -coeff;
        }
        out.add_term(e, coeff);
    }
    Ok(out)
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.vars != other.vars {
            return None;
        }
        Some(self.terms.cmp(&other.terms))
    }
}
