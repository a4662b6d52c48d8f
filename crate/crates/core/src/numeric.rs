//! Carrier of the Lawvere quantale: nonnegative rationals extended with infinity.
//!
//! The quantale order is reversed (`0` is top, infinity is bottom), but every
//! comparison in this crate is the plain numeric one, with `Infinity` the
//! numeric maximum.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ParseError;

/// Exact rational scalar. `BigRational` keeps numerator and denominator in
/// lowest terms with a positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `n` or `n/m` (decimal digits, at most one `/`).
pub fn parse_rat(text: &str) -> Result<Rat, ParseError> {
    let bad = || ParseError::syntax(0, format!("malformed rational literal `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(num) || !den.map_or(true, digits) {
        return Err(bad());
    }
    let n = BigInt::from_str(num).map_err(|_| bad())?;
    let d = match den {
        Some(d) => BigInt::from_str(d).map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(ParseError::syntax(0, format!("zero denominator in `{text}`")));
    }
    Ok(BigRational::new(n, d))
}

/// Renders a rational in the literal syntax accepted by [`parse_rat`]
/// (for nonnegative values).
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A truth value of the Lawvere quantale.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtValue {
    Finite(Rat),
    Infinity,
}

impl ExtValue {
    /// Builds a finite value; `None` if `r` is negative.
    pub fn finite(r: Rat) -> Option<Self> {
        if r.is_negative() {
            None
        } else {
            Some(ExtValue::Finite(r))
        }
    }

    pub fn zero() -> Self {
        ExtValue::Finite(Rat::zero())
    }

    pub fn one() -> Self {
        ExtValue::Finite(Rat::one())
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::finite(rat(n, d)).expect("nonnegative ratio")
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtValue::Infinity)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtValue::Finite(r) if r.is_zero())
    }

    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            ExtValue::Finite(r) => Some(r),
            ExtValue::Infinity => None,
        }
    }

    /// Extended sum, the quantale tensor. Infinity absorbs.
    pub fn add(&self, other: &ExtValue) -> ExtValue {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinity,
        }
    }

    /// Extended product with `0 * inf = inf * 0 = 0`.
    pub fn mul(&self, other: &ExtValue) -> ExtValue {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a * b),
            (x, y) if x.is_zero() || y.is_zero() => ExtValue::zero(),
            _ => ExtValue::Infinity,
        }
    }

    /// Truncated subtraction `self ∸ other`.
    pub fn truncsub(&self, other: &ExtValue) -> ExtValue {
        if self <= other {
            return ExtValue::zero();
        }
        match (self, other) {
            (ExtValue::Finite(r), ExtValue::Finite(s)) => ExtValue::Finite(r - s),
            // self > other, so other is finite here
            (ExtValue::Infinity, _) => ExtValue::Infinity,
            (ExtValue::Finite(_), ExtValue::Infinity) => unreachable!("finite > infinity"),
        }
    }

    pub fn min(&self, other: &ExtValue) -> ExtValue {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max(&self, other: &ExtValue) -> ExtValue {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }
}

pub fn ext_add(a: &ExtValue, b: &ExtValue) -> ExtValue {
    a.add(b)
}

pub fn ext_mul(a: &ExtValue, b: &ExtValue) -> ExtValue {
    a.mul(b)
}

pub fn ext_truncsub(r: &ExtValue, s: &ExtValue) -> ExtValue {
    r.truncsub(s)
}

pub fn ext_min(a: &ExtValue, b: &ExtValue) -> ExtValue {
    a.min(b)
}

pub fn ext_max(a: &ExtValue, b: &ExtValue) -> ExtValue {
    a.max(b)
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => a.cmp(b),
            (ExtValue::Finite(_), ExtValue::Infinity) => Ordering::Less,
            (ExtValue::Infinity, ExtValue::Finite(_)) => Ordering::Greater,
            (ExtValue::Infinity, ExtValue::Infinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(r) => f.write_str(&fmt_rat(r)),
            ExtValue::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtValue {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            Ok(ExtValue::Infinity)
        } else {
            parse_rat(s).map(ExtValue::Finite)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(n: i64, d: i64) -> ExtValue {
        ExtValue::from_ratio(n, d)
    }

    #[test]
    fn add_examples() {
        assert_eq!(ext_add(&ExtValue::Infinity, &f(2, 1)), ExtValue::Infinity);
        assert_eq!(ext_add(&f(1, 2), &f(1, 3)), f(5, 6));
        assert_eq!(ext_add(&f(0, 1), &ExtValue::Infinity), ExtValue::Infinity);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(ext_mul(&f(0, 1), &ExtValue::Infinity), f(0, 1));
        assert_eq!(ext_mul(&ExtValue::Infinity, &f(0, 1)), f(0, 1));
        assert_eq!(ext_mul(&f(3, 2), &ExtValue::Infinity), ExtValue::Infinity);
        assert_eq!(ext_mul(&f(2, 3), &f(3, 4)), f(1, 2));
    }

    #[test]
    fn truncsub_examples() {
        assert_eq!(ext_truncsub(&f(3, 1), &f(5, 1)), f(0, 1));
        assert_eq!(ext_truncsub(&ExtValue::Infinity, &ExtValue::Infinity), f(0, 1));
        assert_eq!(ext_truncsub(&ExtValue::Infinity, &f(7, 1)), ExtValue::Infinity);
        assert_eq!(ext_truncsub(&f(7, 1), &ExtValue::Infinity), f(0, 1));
        assert_eq!(ext_truncsub(&f(7, 2), &f(1, 2)), f(3, 1));
    }

    #[test]
    fn min_max_examples() {
        assert_eq!(ext_min(&f(1, 1), &ExtValue::Infinity), f(1, 1));
        assert_eq!(ext_max(&f(1, 1), &ExtValue::Infinity), ExtValue::Infinity);
        assert_eq!(ext_min(&f(2, 3), &f(2, 3)), f(2, 3));
    }

    #[test]
    fn literals() {
        assert_eq!("inf".parse::<ExtValue>().unwrap(), ExtValue::Infinity);
        assert_eq!("6/4".parse::<ExtValue>().unwrap(), f(3, 2));
        assert_eq!(parse_rat("12").unwrap(), rat_int(12));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("-1").is_err());
        assert!(parse_rat("1/2/3").is_err());
        assert!(parse_rat("").is_err());
        assert_eq!(fmt_rat(&rat(6, 4)), "3/2");
        assert!(ExtValue::finite(rat(-1, 2)).is_none());
    }

    fn ext() -> impl Strategy<Value = ExtValue> {
        prop_oneof![
            1 => Just(ExtValue::Infinity),
            1 => Just(ExtValue::zero()),
            4 => (0i64..20, 1i64..6).prop_map(|(n, d)| f(n, d)),
        ]
    }

    fn fin() -> impl Strategy<Value = ExtValue> {
        (0i64..30, 1i64..6).prop_map(|(n, d)| f(n, d))
    }

    proptest! {
        #[test]
        fn monoid_laws(a in ext(), b in ext(), c in ext()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&ExtValue::zero()), a.clone());
            prop_assert_eq!(a.mul(&ExtValue::one()), a.clone());
            prop_assert_eq!(ExtValue::zero().mul(&a), ExtValue::zero());
        }

        #[test]
        fn finite_adjunction(a in fin(), b in fin(), c in fin()) {
            prop_assert_eq!(a.add(&b) >= c, b >= c.truncsub(&a));
        }

        #[test]
        fn total_order_infinity_on_top(a in ext()) {
            prop_assert!(a <= ExtValue::Infinity);
            prop_assert_eq!(ext_max(&a, &ExtValue::Infinity), ExtValue::Infinity);
        }
    }
}
