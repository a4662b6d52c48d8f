//! Positivstellensatz-style certificates and their exact verification.

use std::fmt;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::error::ParseError;
use crate::numeric::{fmt_rat, parse_rat, Rat};
use crate::poly::{parse_poly, Poly, PolyError};
use crate::syntax::PropLetter;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertVariant {
    /// `h1 theta = h1 vartheta + (theta - vartheta)^(2s) + h2`
    Null,
    /// `h5 theta = h5 vartheta + 1 + h6`
    Null2,
    /// `h + (vartheta - theta)^(2r) = 0` with `r >= 1`. Experimental.
    Weak,
}

impl fmt::Display for CertVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertVariant::Null => "null",
            CertVariant::Null2 => "null2",
            CertVariant::Weak => "weak",
        })
    }
}

/// `(sum of w * base^2) * prod of hypothesis differences and variables
/// selected by alpha`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeTerm {
    pub alpha: Vec<bool>,
    pub squares: Vec<(Rat, Poly)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub variant: CertVariant,
    pub s: u32,
    pub h1: Vec<ConeTerm>,
    pub h2: Vec<ConeTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertVerdict {
    Valid,
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("alpha has {got} bits, expected {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("square weight {0} is not positive")]
    NonPositiveWeight(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn cone(
    terms: &[ConeTerm],
    diffs: &[Poly],
    vars: &[PropLetter],
) -> Result<Poly, CertError> {
    let n = diffs.len();
    let m = vars.len();
    let mut total = Poly::zero(vars);
    for t in terms {
        if t.alpha.len() != n + m {
            return Err(CertError::ArityMismatch {
                expected: n + m,
                got: t.alpha.len(),
            });
        }
        let mut sigma = Poly::zero(vars);
        for (w, base) in &t.squares {
            if !w.is_positive() {
                return Err(CertError::NonPositiveWeight(fmt_rat(w)));
            }
            let b = base.reindex(vars)?;
            sigma = sigma.add(&b.mul(&b)?.scale(w))?;
        }
        let mut prod = sigma;
        for (i, on) in t.alpha.iter().enumerate() {
            if !on {
                continue;
            }
            let factor = if i < n {
                diffs[i].clone()
            } else {
                Poly::var(vars, i - n)
            };
            prod = prod.mul(&factor)?;
        }
        total = total.add(&prod)?;
    }
    Ok(total)
}

/// Checks the identity of the certificate's variant exactly. Hypotheses and
/// goal are `(theta, vartheta)` pairs standing for `theta |- vartheta`.
pub fn check_certificate(
    hyps: &[(Poly, Poly)],
    goal: &(Poly, Poly),
    cert: &Certificate,
) -> Result<CertVerdict, CertError> {
    let vars = goal.0.vars().to_vec();
    let mut diffs = Vec::with_capacity(hyps.len());
    for (a, b) in hyps {
        diffs.push(a.reindex(&vars)?.sub(&b.reindex(&vars)?)?);
    }
    let theta = goal.0.clone();
    let vartheta = goal.1.reindex(&vars)?;
    let h1 = cone(&cert.h1, &diffs, &vars)?;
    let h2 = cone(&cert.h2, &diffs, &vars)?;
    let d = theta.sub(&vartheta)?;
    let (lhs, rhs) = match cert.variant {
        CertVariant::Null => (
            h1.mul(&theta)?,
            h1.mul(&vartheta)?.add(&d.pow(2 * cert.s))?.add(&h2)?,
        ),
        CertVariant::Null2 => (
            h1.mul(&theta)?,
            h1.mul(&vartheta)?.add(&Poly::one(&vars))?.add(&h2)?,
        ),
        CertVariant::Weak => {
            if cert.s == 0 {
                return Ok(CertVerdict::Invalid("exponent r must be at least 1".into()));
            }
            (h1.add(&d.neg().pow(2 * cert.s))?, Poly::zero(&vars))
        }
    };
    let residual = lhs.sub(&rhs)?;
    Ok(if residual.is_zero() {
        CertVerdict::Valid
    } else {
        CertVerdict::Invalid(format!("identity fails: lhs - rhs = {residual}"))
    })
}

impl Certificate {
    pub fn render(&self) -> String {
        let mut out = format!("variant: {}\n", self.variant);
        let (e, a, b) = match self.variant {
            CertVariant::Null => ("s", "h1", "h2"),
            CertVariant::Null2 => ("s", "h5", "h6"),
            CertVariant::Weak => ("r", "h", "h2"),
        };
        if self.variant != CertVariant::Null2 {
            out.push_str(&format!("{e}: {}\n", self.s));
        }
        for (label, terms) in [(a, &self.h1), (b, &self.h2)] {
            if self.variant == CertVariant::Weak && label == "h2" {
                continue;
            }
            out.push_str(&format!("{label}:\n"));
            for t in terms {
                let bits: String = t.alpha.iter().map(|b| if *b { '1' } else { '0' }).collect();
                let sq: String = t
                    .squares
                    .iter()
                    .map(|(w, p)| format!("({},{})", fmt_rat(w), p))
                    .collect();
                out.push_str(&format!("alpha={bits}; squares={sq}\n"));
            }
        }
        out
    }
}

/// Reads the certificate file format:
///
/// ```text
/// variant: null
/// s: 1
/// h1:
/// alpha=01; squares=(1,1)
/// h2:
/// ```
pub fn parse_certificate(text: &str, vars: &[PropLetter]) -> Result<Certificate, ParseError> {
    let mut variant = CertVariant::Null;
    let mut s = 0u32;
    let mut h1 = Vec::new();
    let mut h2 = Vec::new();
    let mut section: Option<u8> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let wrap = |e: ParseError| e.at_line(idx + 1);
        if let Some(rest) = line.strip_prefix("variant:") {
            variant = match rest.trim() {
                "null" => CertVariant::Null,
                "null2" => CertVariant::Null2,
                "weak" => CertVariant::Weak,
                other => {
                    return Err(wrap(ParseError::syntax(0, format!("unknown variant `{other}`"))))
                }
            };
        } else if let Some(rest) = line.strip_prefix("s:").or_else(|| line.strip_prefix("r:")) {
            s = rest
                .trim()
                .parse()
                .map_err(|_| wrap(ParseError::syntax(0, "exponent must be a natural number")))?;
        } else if matches!(line, "h1:" | "h5:" | "h:") {
            section = Some(1);
        } else if matches!(line, "h2:" | "h6:") {
            section = Some(2);
        } else if line.starts_with("alpha=") {
            let term = parse_cone_term(line, vars).map_err(wrap)?;
            match section {
                Some(1) => h1.push(term),
                Some(2) => h2.push(term),
                _ => return Err(wrap(ParseError::syntax(0, "cone term outside h1/h2"))),
            }
        } else {
            return Err(wrap(ParseError::syntax(0, format!("unexpected line `{line}`"))));
        }
    }
    Ok(Certificate { variant, s, h1, h2 })
}

fn parse_cone_term(line: &str, vars: &[PropLetter]) -> Result<ConeTerm, ParseError> {
    let (alpha_part, squares_part) = line
        .split_once(';')
        .ok_or_else(|| ParseError::syntax(0, "expected `alpha=<bits>; squares=...`"))?;
    let bits = alpha_part.trim().trim_start_matches("alpha=").trim();
    let alpha = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(ParseError::syntax(0, format!("bad alpha bit `{c}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sq = squares_part
        .trim()
        .strip_prefix("squares=")
        .ok_or_else(|| ParseError::syntax(0, "expected `squares=`"))?
        .trim();
    let mut squares = Vec::new();
    let mut rest = sq;
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .ok_or_else(|| ParseError::syntax(0, "expected `(`"))?;
        let close = inner
            .find(')')
            .ok_or_else(|| ParseError::syntax(0, "unclosed square"))?;
        let (w, p) = inner[..close]
            .split_once(',')
            .ok_or_else(|| ParseError::syntax(0, "expected `(weight,poly)`"))?;
        let w = w.trim();
        let weight = match w.strip_prefix('-') {
            Some(abs) => -parse_rat(abs.trim())?,
            None => parse_rat(w)?,
        };
        squares.push((weight, parse_poly(p, vars)?));
        rest = inner[close + 1..].trim_start();
    }
    Ok(ConeTerm { alpha, squares })
}

/// The constant-one square `(1, 1)`.
pub fn unit_square(vars: &[PropLetter]) -> (Rat, Poly) {
    (Rat::one(), Poly::one(vars))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_int;

    fn x() -> Vec<PropLetter> {
        vec![PropLetter::user("p")]
    }

    fn null_cert(h2_const: bool) -> Certificate {
        let v = x();
        Certificate {
            variant: CertVariant::Null,
            s: 1,
            h1: vec![ConeTerm {
                alpha: vec![false, true],
                squares: vec![unit_square(&v)],
            }],
            h2: if h2_const {
                vec![ConeTerm {
                    alpha: vec![false, false],
                    squares: vec![unit_square(&v)],
                }]
            } else {
                vec![]
            },
        }
    }

    #[test]
    fn null_example_and_perturbation() {
        let v = x();
        let hyps = vec![(Poly::var(&v, 0), Poly::zero(&v))];
        let goal = (Poly::var(&v, 0), Poly::zero(&v));
        assert_eq!(check_certificate(&hyps, &goal, &null_cert(false)).unwrap(), CertVerdict::Valid);
        assert!(matches!(
            check_certificate(&hyps, &goal, &null_cert(true)).unwrap(),
            CertVerdict::Invalid(_)
        ));
    }

    #[test]
    fn null2_example() {
        let v = x();
        let hyps = vec![(Poly::var(&v, 0), Poly::one(&v))];
        let goal = (Poly::var(&v, 0), Poly::zero(&v));
        let cert = Certificate {
            variant: CertVariant::Null2,
            s: 0,
            h1: vec![ConeTerm {
                alpha: vec![false, false],
                squares: vec![unit_square(&v)],
            }],
            h2: vec![ConeTerm {
                alpha: vec![true, false],
                squares: vec![unit_square(&v)],
            }],
        };
        assert_eq!(check_certificate(&hyps, &goal, &cert).unwrap(), CertVerdict::Valid);
        let text = cert.render();
        assert_eq!(parse_certificate(&text, &v).unwrap(), cert);
    }

    #[test]
    fn structural_errors() {
        let v = x();
        let hyps = vec![(Poly::var(&v, 0), Poly::zero(&v))];
        let goal = (Poly::var(&v, 0), Poly::zero(&v));
        let mut c = null_cert(false);
        c.h1[0].alpha.pop();
        assert!(matches!(
            check_certificate(&hyps, &goal, &c),
            Err(CertError::ArityMismatch { expected: 2, got: 1 })
        ));
        let mut c = null_cert(false);
        c.h1[0].squares[0].0 = rat_int(0);
        assert!(matches!(
            check_certificate(&hyps, &goal, &c),
            Err(CertError::NonPositiveWeight(_))
        ));
    }

    #[test]
    fn s_zero_uses_constant_term() {
        // p |- 0 with goal I |- 0: h1 = 1, 1 = 0 + 1 + 0
        let v = x();
        let hyps = vec![(Poly::var(&v, 0), Poly::zero(&v))];
        let goal = (Poly::one(&v), Poly::zero(&v));
        let cert = Certificate {
            variant: CertVariant::Null,
            s: 0,
            h1: vec![ConeTerm {
                alpha: vec![false, false],
                squares: vec![unit_square(&v)],
            }],
            h2: vec![],
        };
        assert_eq!(check_certificate(&hyps, &goal, &cert).unwrap(), CertVerdict::Valid);
    }

    #[test]
    fn weak_variant() {
        // hyps p |- 0 and 0 |- p force p = 0; goal 0 |- p
        let v = x();
        let p = Poly::var(&v, 0);
        let z = Poly::zero(&v);
        let hyps = vec![(p.clone(), z.clone()), (z.clone(), p.clone())];
        let goal = (z.clone(), p.clone());
        // h = p * (-p) = -p^2 from alpha 11 on the two hypotheses
        let cert = Certificate {
            variant: CertVariant::Weak,
            s: 1,
            h1: vec![ConeTerm {
                alpha: vec![true, true, false],
                squares: vec![unit_square(&v)],
            }],
            h2: vec![],
        };
        assert_eq!(check_certificate(&hyps, &goal, &cert).unwrap(), CertVerdict::Valid);
        let text = cert.render();
        assert_eq!(parse_certificate(&text, &v).unwrap(), cert);
    }

    #[test]
    fn file_format() {
        let v = x();
        let text = "variant: null\ns: 1\nh1:\nalpha=01; squares=(1,1)\nh2:\n";
        assert_eq!(parse_certificate(text, &v).unwrap(), null_cert(false));
        assert!(parse_certificate("alpha=01; squares=(1,1)", &v).is_err());
        assert!(parse_certificate("variant: odd", &v).is_err());
    }
}
