//! Models, evaluation of formulas and satisfaction of judgements.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::ParseError;
use crate::numeric::{rat, ExtValue};
use crate::syntax::{Formula, Judgement, PropLetter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("letter `{0}` is not assigned by the model")]
    MissingLetter(PropLetter),
}

/// An assignment of quantale values to finitely many letters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub assignment: BTreeMap<PropLetter, ExtValue>,
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    pub fn with(mut self, name: &str, v: ExtValue) -> Self {
        self.assignment.insert(PropLetter::user(name), v);
        self
    }

    pub fn set(&mut self, p: PropLetter, v: ExtValue) {
        self.assignment.insert(p, v);
    }

    pub fn get(&self, p: &PropLetter) -> Option<&ExtValue> {
        self.assignment.get(p)
    }

    pub fn is_finite(&self) -> bool {
        self.assignment.values().all(|v| !v.is_infinite())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, v) in &self.assignment {
            writeln!(f, "{p} = {v}")?;
        }
        Ok(())
    }
}

/// Reads `IDENT = RAT|inf` lines with `#` comments.
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    let mut m = Model::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let wrap = |e: ParseError| e.at_line(idx + 1);
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| wrap(ParseError::syntax(0, "expected `name = value`")))?;
        let name = name.trim();
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if name.starts_with('_') {
            return Err(wrap(ParseError::Name {
                pos: 0,
                name: name.to_string(),
            }));
        }
        if !valid {
            return Err(wrap(ParseError::syntax(0, format!("bad letter name `{name}`"))));
        }
        let v: ExtValue = value.parse().map_err(wrap)?;
        m.set(PropLetter::user(name), v);
    }
    Ok(m)
}

pub fn eval(m: &Model, f: &Formula) -> Result<ExtValue, EvalError> {
    Ok(match f {
        Formula::Bot => ExtValue::Infinity,
        Formula::One => ExtValue::one(),
        Formula::Prop(p) => m
            .get(p)
            .cloned()
            .ok_or_else(|| EvalError::MissingLetter(p.clone()))?,
        Formula::Scalar(r, body) => ExtValue::Finite(r.clone()).mul(&eval(m, body)?),
        Formula::Tensor(a, b) => eval(m, a)?.add(&eval(m, b)?),
        Formula::Lollipop(a, b) => eval(m, b)?.truncsub(&eval(m, a)?),
        Formula::Mult(a, b) => eval(m, a)?.mul(&eval(m, b)?),
    })
}

/// Sum of the antecedent values (empty sum is 0).
pub fn antecedent_value(m: &Model, j: &Judgement) -> Result<ExtValue, EvalError> {
    j.antecedents
        .iter()
        .try_fold(ExtValue::zero(), |acc, a| Ok(acc.add(&eval(m, a)?)))
}

pub fn satisfies(m: &Model, j: &Judgement) -> Result<bool, EvalError> {
    Ok(antecedent_value(m, j)? >= eval(m, &j.consequent)?)
}

pub fn satisfies_all(m: &Model, s: &[Judgement]) -> Result<bool, EvalError> {
    for j in s {
        if !satisfies(m, j)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Value population for [`sample_model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// 0 with weight 1/5, infinity with weight 1/5, a positive small
    /// rational with weight 3/5.
    General,
    /// 0 with weight 1/5, a positive small rational otherwise.
    Finite,
    /// Positive small rationals only.
    FinitePositive,
}

/// Positive rationals `n/d` with `n` in 1..=6 and `d` in 1..=3.
fn small_positive(rng: &mut impl Rng) -> ExtValue {
    let n = rng.gen_range(1..=6);
    let d = rng.gen_range(1..=3);
    ExtValue::Finite(rat(n, d))
}

pub fn sample_value(rng: &mut impl Rng, profile: Profile) -> ExtValue {
    match profile {
        Profile::FinitePositive => small_positive(rng),
        Profile::Finite => {
            if rng.gen_range(0..5) == 0 {
                ExtValue::zero()
            } else {
                small_positive(rng)
            }
        }
        Profile::General => match rng.gen_range(0..5) {
            0 => ExtValue::zero(),
            1 => ExtValue::Infinity,
            _ => small_positive(rng),
        },
    }
}

/// Deterministic in `(letters, profile, seed)`.
pub fn sample_model(letters: &[PropLetter], profile: Profile, seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_model_with(letters, profile, &mut rng)
}

pub fn sample_model_with(letters: &[PropLetter], profile: Profile, rng: &mut impl Rng) -> Model {
    let mut m = Model::new();
    for p in letters {
        m.set(p.clone(), sample_value(rng, profile));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_int;
    use crate::syntax::{parse_formula, parse_judgement};

    fn v(n: i64, d: i64) -> ExtValue {
        ExtValue::from_ratio(n, d)
    }

    fn ev(m: &Model, s: &str) -> ExtValue {
        eval(m, &parse_formula(s).unwrap()).unwrap()
    }

    fn sat(m: &Model, s: &str) -> bool {
        satisfies(m, &parse_judgement(s).unwrap()).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let m = Model::new().with("p", v(1, 2)).with("q", v(1, 1));
        assert_eq!(ev(&m, "p -o q"), v(1, 2));
        let inf = Model::new().with("p", ExtValue::Infinity);
        assert_eq!(ev(&inf, "~~p"), ExtValue::Infinity);
        assert_eq!(ev(&Model::new(), "top"), ExtValue::zero());
        assert_eq!(ev(&m, "3 * p . q"), v(3, 2));
        assert_eq!(ev(&inf, "0 * p"), ExtValue::zero());
    }

    #[test]
    fn missing_letter() {
        let err = eval(&Model::new(), &parse_formula("p").unwrap()).unwrap_err();
        assert_eq!(err, EvalError::MissingLetter(PropLetter::user("p")));
    }

    #[test]
    fn satisfaction_examples() {
        let m = Model::new().with("p", v(1, 2)).with("q", v(1, 1));
        assert!(sat(&m, "2 * p |- q"));
        assert!(!sat(&m, "p |- q"));
        assert!(sat(&Model::new(), "|- ~bot"));
        let m3 = Model::new()
            .with("p", v(1, 1))
            .with("q", v(2, 1))
            .with("r", v(3, 1));
        assert!(sat(&m3, "p, q |- r"));
    }

    #[test]
    fn satisfies_all_examples() {
        let s: Vec<Judgement> = (0..=3)
            .map(|n| parse_judgement(&format!("{} * p |- {} * q", n + 1, n)).unwrap())
            .collect();
        let m = Model::new().with("p", v(3, 4)).with("q", v(1, 1));
        assert!(satisfies_all(&m, &s).unwrap());
        assert!(satisfies_all(&m, &[]).unwrap());
        let one = parse_judgement("|- I").unwrap();
        assert!(!satisfies_all(&Model::new(), &[one]).unwrap());
    }

    #[test]
    fn model_files() {
        let m = parse_model("# model\np = 1/2\nq = inf\nr=3\n").unwrap();
        assert_eq!(m.get(&PropLetter::user("p")), Some(&v(1, 2)));
        assert_eq!(m.get(&PropLetter::user("q")), Some(&ExtValue::Infinity));
        assert_eq!(m.get(&PropLetter::user("r")), Some(&ExtValue::Finite(rat_int(3))));
        assert!(parse_model("p 1").is_err());
        assert!(parse_model("_1 = 2").is_err());
        assert!(parse_model("p = -1").is_err());
    }

    #[test]
    fn sampler_profiles() {
        let letters: Vec<_> = ["a", "b", "c"].iter().map(|n| PropLetter::user(n)).collect();
        for seed in 0..10_000 {
            let m = sample_model(&letters, Profile::FinitePositive, seed);
            assert!(m.assignment.values().all(|x| !x.is_zero() && !x.is_infinite()));
        }
        assert_eq!(
            sample_model(&letters, Profile::General, 42),
            sample_model(&letters, Profile::General, 42)
        );
        // each draw is infinite with probability 1/5; P(no infinity in 3000 draws) = (4/5)^3000
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let infinities = (0..1000)
            .map(|_| sample_model_with(&letters, Profile::General, &mut rng))
            .filter(|m| m.assignment.values().any(ExtValue::is_infinite))
            .count();
        assert!(infinities > 0);
        // expected 1000 * (1 - (4/5)^3) = 488
        assert!((400..580).contains(&infinities), "{infinities}");
    }
}
