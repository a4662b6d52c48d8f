//! Abstract syntax of polynomial Lawvere logic.
//!
//! Only the seven primitive connectives are stored. The derived connectives
//! (`top`, `~`, `/\`, `\/`, `o-o`) are expanded by the smart constructors
//! below, which the parser and the rule catalog share.

mod parser;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::numeric::{fmt_rat, Rat};

pub use parser::{
    parse_formula, parse_formula_internal, parse_formula_list, parse_judgement,
    parse_judgement_internal, parse_problem,
};

/// A propositional letter. User letters come from input text; fresh letters
/// are allocated by the reduction engine and print as `_<index>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropLetter {
    User(Arc<str>),
    Fresh(u32),
}

impl PropLetter {
    pub fn user(name: &str) -> Self {
        assert!(
            !name.is_empty() && !name.starts_with('_'),
            "invalid user letter `{name}`"
        );
        PropLetter::User(Arc::from(name))
    }

    pub fn is_fresh(&self) -> bool {
        matches!(self, PropLetter::Fresh(_))
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PropLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropLetter::User(n) => f.write_str(n),
            PropLetter::Fresh(k) => write!(f, "_{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Bot,
    One,
    Prop(PropLetter),
    Scalar(Rat, Arc<Formula>),
    Tensor(Arc<Formula>, Arc<Formula>),
    Lollipop(Arc<Formula>, Arc<Formula>),
    Mult(Arc<Formula>, Arc<Formula>),
}

impl Formula {
    pub fn prop(name: &str) -> Formula {
        Formula::Prop(PropLetter::user(name))
    }

    pub fn letter(p: PropLetter) -> Formula {
        Formula::Prop(p)
    }

    pub fn scalar(r: Rat, body: Formula) -> Formula {
        Formula::Scalar(r, Arc::new(body))
    }

    /// The literal `r`, i.e. `r * I`.
    pub fn constant(r: Rat) -> Formula {
        Formula::scalar(r, Formula::One)
    }

    /// The formula `0 * I`.
    pub fn zero() -> Formula {
        Formula::constant(Rat::zero())
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Formula::Scalar(r, b) if r.is_zero() && **b == Formula::One)
    }

    pub fn tensor(a: Formula, b: Formula) -> Formula {
        Formula::Tensor(Arc::new(a), Arc::new(b))
    }

    pub fn lolli(a: Formula, b: Formula) -> Formula {
        Formula::Lollipop(Arc::new(a), Arc::new(b))
    }

    pub fn mult(a: Formula, b: Formula) -> Formula {
        Formula::Mult(Arc::new(a), Arc::new(b))
    }

    pub fn top() -> Formula {
        Formula::lolli(Formula::Bot, Formula::Bot)
    }

    pub fn neg(a: Formula) -> Formula {
        Formula::lolli(a, Formula::Bot)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::tensor(a.clone(), Formula::lolli(a, b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        let left = Formula::lolli(Formula::lolli(b.clone(), a.clone()), a.clone());
        let right = Formula::lolli(Formula::lolli(a, b.clone()), b);
        Formula::and(left, right)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::lolli(a.clone(), b.clone()), Formula::lolli(b, a))
    }

    /// `phi^n` with `phi^0 = I`.
    pub fn power(a: Formula, n: u32) -> Formula {
        (0..n).fold(Formula::One, |acc, _| {
            if acc == Formula::One {
                a.clone()
            } else {
                Formula::mult(a.clone(), acc)
            }
        })
    }

    /// Distinct letters in order of first (left-to-right) occurrence.
    pub fn letters(&self) -> Vec<PropLetter> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_letters(&mut out, &mut seen);
        out
    }

    pub(crate) fn collect_letters(&self, out: &mut Vec<PropLetter>, seen: &mut HashSet<PropLetter>) {
        match self {
            Formula::Bot | Formula::One => {}
            Formula::Prop(p) => {
                if seen.insert(p.clone()) {
                    out.push(p.clone());
                }
            }
            Formula::Scalar(_, b) => b.collect_letters(out, seen),
            Formula::Tensor(a, b) | Formula::Lollipop(a, b) | Formula::Mult(a, b) => {
                a.collect_letters(out, seen);
                b.collect_letters(out, seen);
            }
        }
    }

    pub fn lolli_count(&self) -> usize {
        match self {
            Formula::Bot | Formula::One | Formula::Prop(_) => 0,
            Formula::Scalar(_, b) => b.lolli_count(),
            Formula::Tensor(a, b) | Formula::Mult(a, b) => a.lolli_count() + b.lolli_count(),
            Formula::Lollipop(a, b) => 1 + a.lolli_count() + b.lolli_count(),
        }
    }

    pub fn contains_mult(&self) -> bool {
        match self {
            Formula::Bot | Formula::One | Formula::Prop(_) => false,
            Formula::Mult(_, _) => true,
            Formula::Scalar(_, b) => b.contains_mult(),
            Formula::Tensor(a, b) | Formula::Lollipop(a, b) => a.contains_mult() || b.contains_mult(),
        }
    }

    pub fn contains_bot(&self) -> bool {
        match self {
            Formula::Bot => true,
            Formula::One | Formula::Prop(_) => false,
            Formula::Scalar(_, b) => b.contains_bot(),
            Formula::Tensor(a, b) | Formula::Lollipop(a, b) | Formula::Mult(a, b) => {
                a.contains_bot() || b.contains_bot()
            }
        }
    }

    /// Replaces every occurrence of `p` by `by`.
    pub fn substitute(&self, p: &PropLetter, by: &Formula) -> Formula {
        match self {
            Formula::Prop(q) if q == p => by.clone(),
            Formula::Bot | Formula::One | Formula::Prop(_) => self.clone(),
            Formula::Scalar(r, b) => Formula::scalar(r.clone(), b.substitute(p, by)),
            Formula::Tensor(a, b) => Formula::tensor(a.substitute(p, by), b.substitute(p, by)),
            Formula::Lollipop(a, b) => Formula::lolli(a.substitute(p, by), b.substitute(p, by)),
            Formula::Mult(a, b) => Formula::mult(a.substitute(p, by), b.substitute(p, by)),
        }
    }
}

/// Number of connectives, constants and letter occurrences, plus the bit
/// length of every scalar numerator and of every denominator other than 1.
pub fn formula_size(f: &Formula) -> usize {
    fn bits(n: &num_bigint::BigInt) -> usize {
        (n.bits() as usize).max(1)
    }
    match f {
        Formula::Bot | Formula::One | Formula::Prop(_) => 1,
        Formula::Scalar(r, b) => {
            let den = if r.denom().is_one() { 0 } else { bits(r.denom()) };
            1 + bits(r.numer()) + den + formula_size(b)
        }
        Formula::Tensor(a, b) | Formula::Lollipop(a, b) | Formula::Mult(a, b) => {
            1 + formula_size(a) + formula_size(b)
        }
    }
}

/// Fully parenthesised primitive syntax.
pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Bot => f.write_str("bot"),
            Formula::One => f.write_str("I"),
            Formula::Prop(p) => write!(f, "{p}"),
            Formula::Scalar(r, b) => write!(f, "({} * {b})", fmt_rat(r)),
            Formula::Tensor(a, b) => write!(f, "({a} (+) {b})"),
            Formula::Lollipop(a, b) => write!(f, "({a} -o {b})"),
            Formula::Mult(a, b) => write!(f, "({a} . {b})"),
        }
    }
}

/// `phi_1, ..., phi_n |- psi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Judgement {
    pub antecedents: Vec<Formula>,
    pub consequent: Formula,
}

impl Judgement {
    pub fn new(antecedents: Vec<Formula>, consequent: Formula) -> Self {
        Judgement {
            antecedents,
            consequent,
        }
    }

    /// `lhs |- rhs`, or `|- rhs` when `lhs` is `None`.
    pub fn single(lhs: Option<Formula>, rhs: Formula) -> Self {
        Judgement::new(lhs.into_iter().collect(), rhs)
    }

    pub fn letters(&self) -> Vec<PropLetter> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for a in &self.antecedents {
            a.collect_letters(&mut out, &mut seen);
        }
        self.consequent.collect_letters(&mut out, &mut seen);
        out
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.antecedents.iter().chain(std::iter::once(&self.consequent))
    }

    pub fn map(&self, mut f: impl FnMut(&Formula) -> Formula) -> Judgement {
        Judgement::new(self.antecedents.iter().map(&mut f).collect(), f(&self.consequent))
    }

    pub fn substitute(&self, p: &PropLetter, by: &Formula) -> Judgement {
        self.map(|f| f.substitute(p, by))
    }

    pub fn lolli_count(&self) -> usize {
        self.formulas().map(Formula::lolli_count).sum()
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.antecedents.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        if !self.antecedents.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "|- {}", self.consequent)
    }
}

/// Collapses the antecedent list into one tensor. An empty list becomes
/// the single antecedent `0 * I`, whose value is 0 in every model.
pub fn collapse(j: &Judgement) -> Judgement {
    let mut it = j.antecedents.iter().cloned();
    let lhs = match it.next() {
        None => Formula::zero(),
        Some(first) => it.fold(first, Formula::tensor),
    };
    Judgement::new(vec![lhs], j.consequent.clone())
}

/// A satisfiability problem (no goal) or a consequence problem.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Problem {
    pub hypotheses: Vec<Judgement>,
    pub goal: Option<Judgement>,
}

impl Problem {
    pub fn sat(hypotheses: Vec<Judgement>) -> Self {
        Problem {
            hypotheses,
            goal: None,
        }
    }

    pub fn entails(hypotheses: Vec<Judgement>, goal: Judgement) -> Self {
        Problem {
            hypotheses,
            goal: Some(goal),
        }
    }

    /// Letters of the hypotheses, then of the goal, by first occurrence.
    pub fn letters(&self) -> Vec<PropLetter> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for j in self.hypotheses.iter().chain(self.goal.iter()) {
            for f in j.formulas() {
                f.collect_letters(&mut out, &mut seen);
            }
        }
        out
    }

    pub fn contains_mult(&self) -> bool {
        self.hypotheses
            .iter()
            .chain(self.goal.iter())
            .any(|j| j.formulas().any(Formula::contains_mult))
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in &self.hypotheses {
            writeln!(f, "{j}")?;
        }
        if let Some(g) = &self.goal {
            writeln!(f, "goal: {g}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};

    fn p() -> Formula {
        Formula::prop("p")
    }
    fn q() -> Formula {
        Formula::prop("q")
    }

    #[test]
    fn printing() {
        assert_eq!(print_formula(&Formula::tensor(p(), Formula::One)), "(p (+) I)");
        assert_eq!(print_formula(&Formula::scalar(rat(1, 2), p())), "(1/2 * p)");
        assert_eq!(print_formula(&Formula::Bot), "bot");
        let j = Judgement::new(vec![p(), q()], Formula::prop("r"));
        assert_eq!(j.to_string(), "p, q |- r");
        assert_eq!(Judgement::new(vec![], p()).to_string(), "|- p");
    }

    #[test]
    fn sizes() {
        assert_eq!(formula_size(&p()), 1);
        assert_eq!(formula_size(&Formula::tensor(p(), q())), 3);
        // one connective, one constant, two bits for the numerator 3
        assert_eq!(formula_size(&Formula::constant(rat_int(3))), 4);
        // 1/2: numerator 1 bit, denominator 2 bits
        assert_eq!(formula_size(&Formula::scalar(rat(1, 2), p())), 5);
        assert_eq!(formula_size(&Formula::zero()), 3);
    }

    #[test]
    fn collapse_cases() {
        let r = Formula::prop("r");
        let j = Judgement::new(vec![p(), q()], r.clone());
        assert_eq!(collapse(&j), Judgement::new(vec![Formula::tensor(p(), q())], r.clone()));
        let e = Judgement::new(vec![], p());
        assert_eq!(collapse(&e), Judgement::new(vec![Formula::zero()], p()));
        let s = Judgement::new(vec![p()], q());
        assert_eq!(collapse(&s), s);
    }

    #[test]
    fn letters_in_order_and_substitution() {
        let f = Formula::tensor(q(), Formula::lolli(p(), q()));
        assert_eq!(f.letters(), vec![PropLetter::user("q"), PropLetter::user("p")]);
        let g = f.substitute(&PropLetter::user("q"), &Formula::Bot);
        assert_eq!(g, Formula::tensor(Formula::Bot, Formula::lolli(p(), Formula::Bot)));
        assert_eq!(f.lolli_count(), 1);
    }

    #[test]
    fn power() {
        assert_eq!(Formula::power(p(), 0), Formula::One);
        assert_eq!(Formula::power(p(), 1), p());
        assert_eq!(Formula::power(p(), 2), Formula::mult(p(), p()));
    }

    #[test]
    fn fresh_letters_print_reserved() {
        assert_eq!(PropLetter::Fresh(7).to_string(), "_7");
        assert!(PropLetter::Fresh(0) > PropLetter::user("zz"));
    }
}
