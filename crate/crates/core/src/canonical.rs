//! Canonical forms, form classes and polynomial extraction.

use num_traits::Zero;
use thiserror::Error;

use crate::poly::{Poly, PolyError};
use crate::syntax::{Formula, PropLetter};

/// Canonical form. Pushes `bot` and the literal `0 * I` outwards.
pub fn canonicalize(f: &Formula) -> Formula {
    match f {
        Formula::Bot | Formula::One | Formula::Prop(_) => f.clone(),
        Formula::Scalar(r, body) => {
            if r.is_zero() {
                return Formula::zero();
            }
            let b = canonicalize(body);
            if b == Formula::Bot {
                Formula::Bot
            } else {
                Formula::scalar(r.clone(), b)
            }
        }
        Formula::Tensor(a, b) => {
            let (a, b) = (canonicalize(a), canonicalize(b));
            if a == Formula::Bot || b == Formula::Bot {
                Formula::Bot
            } else {
                Formula::tensor(a, b)
            }
        }
        Formula::Lollipop(a, b) => {
            let a = canonicalize(a);
            if a == Formula::Bot {
                return Formula::zero();
            }
            let b = canonicalize(b);
            if b == Formula::Bot {
                Formula::Bot
            } else {
                Formula::lolli(a, b)
            }
        }
        Formula::Mult(a, b) => {
            let (a, b) = (canonicalize(a), canonicalize(b));
            if a.is_zero_literal() || b.is_zero_literal() {
                Formula::zero()
            } else if a == Formula::Bot || b == Formula::Bot {
                Formula::Bot
            } else {
                Formula::mult(a, b)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormClass {
    CfBot,
    Pcf,
    PolynomialForm,
    AffineForm,
    None,
}

impl FormClass {
    /// Canonical form: `bot` or proper canonical.
    pub fn is_cf(self) -> bool {
        self != FormClass::None
    }

    pub fn is_pcf(self) -> bool {
        matches!(
            self,
            FormClass::Pcf | FormClass::PolynomialForm | FormClass::AffineForm
        )
    }

    pub fn is_polynomial(self) -> bool {
        matches!(self, FormClass::PolynomialForm | FormClass::AffineForm)
    }
}

/// The narrowest class containing `f`.
pub fn classify(f: &Formula) -> FormClass {
    if *f == Formula::Bot {
        FormClass::CfBot
    } else if f.contains_bot() {
        FormClass::None
    } else if f.lolli_count() > 0 {
        FormClass::Pcf
    } else if f.contains_mult() {
        FormClass::PolynomialForm
    } else {
        FormClass::AffineForm
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToPolyError {
    #[error("formula `{0}` is not in polynomial form")]
    NotPolynomialForm(Formula),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The polynomial of a polynomial-form formula over the given variables.
pub fn to_poly(f: &Formula, vars: &[PropLetter]) -> Result<Poly, ToPolyError> {
    if !classify(f).is_polynomial() {
        return Err(ToPolyError::NotPolynomialForm(f.clone()));
    }
    extract(f, vars)
}

fn extract(f: &Formula, vars: &[PropLetter]) -> Result<Poly, ToPolyError> {
    Ok(match f {
        Formula::One => Poly::one(vars),
        Formula::Prop(p) => Poly::letter(vars, p)?,
        Formula::Scalar(r, b) => extract(b, vars)?.scale(r),
        Formula::Tensor(a, b) => extract(a, vars)?.add(&extract(b, vars)?)?,
        Formula::Mult(a, b) => extract(a, vars)?.mul(&extract(b, vars)?)?,
        Formula::Bot | Formula::Lollipop(..) => {
            return Err(ToPolyError::NotPolynomialForm(f.clone()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};
    use crate::syntax::parse_formula;

    fn cf(s: &str) -> String {
        canonicalize(&parse_formula(s).unwrap()).to_string()
    }

    fn class(s: &str) -> FormClass {
        classify(&parse_formula(s).unwrap())
    }

    #[test]
    fn case_table() {
        assert_eq!(cf("p -o bot"), "bot");
        assert_eq!(cf("bot -o p"), "(0 * I)");
        assert_eq!(cf("p . bot"), "bot");
        assert_eq!(cf("(0 * I) . bot"), "(0 * I)");
        assert_eq!(cf("0 * bot"), "(0 * I)");
        assert_eq!(cf("2 * bot"), "bot");
        assert_eq!(cf("p (+) bot"), "bot");
        assert_eq!(cf("p (+) q"), "(p (+) q)");
        assert_eq!(cf("(bot -o bot) -o p"), "((0 * I) -o p)");
    }

    #[test]
    fn classes() {
        assert_eq!(class("p (+) 2 * I"), FormClass::AffineForm);
        assert_eq!(class("p . q (+) I"), FormClass::PolynomialForm);
        assert_eq!(class("~p"), FormClass::None);
        assert_eq!(class("p -o q"), FormClass::Pcf);
        assert_eq!(class("bot"), FormClass::CfBot);
        assert_eq!(class("p /\\ q"), FormClass::Pcf);
    }

    #[test]
    fn extraction() {
        let vars = vec![PropLetter::user("p"), PropLetter::user("q")];
        let p = to_poly(&parse_formula("2 * p (+) p . q").unwrap(), &vars).unwrap();
        assert_eq!(p.coefficient(&[1, 0]), rat_int(2));
        assert_eq!(p.coefficient(&[1, 1]), rat_int(1));
        let one = to_poly(&Formula::One, &vars).unwrap();
        assert_eq!(one.constant_term(), rat_int(1));
        let a = to_poly(&parse_formula("p (+) p").unwrap(), &vars).unwrap();
        let b = to_poly(&parse_formula("2 * p").unwrap(), &vars).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            p.eval(&[rat(1, 2), rat_int(4)]).unwrap(),
            rat_int(3)
        );
        assert!(matches!(
            to_poly(&parse_formula("p -o q").unwrap(), &vars),
            Err(ToPolyError::NotPolynomialForm(_))
        ));
    }
}
