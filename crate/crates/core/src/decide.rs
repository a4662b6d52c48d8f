//! End-to-end decision procedures built on the reduction and the arithmetic
//! back ends.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::arith::{lin_feasible, poly_feasible, Budget, LinResult, LinRow, LinSystem, PolyResult, PolySystem, Rel};
use crate::canonical::to_poly;
use crate::error::ParseError;
use crate::poly::Poly;
use crate::reduction::{for_each_leaf, Leaf, Logic, Mode, MoveSet, NormalForm, ReductionError};
use crate::semantics::{satisfies, satisfies_all, Model};
use crate::syntax::{Formula, Judgement, Problem, PropLetter};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    Sat(Model),
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntailVerdict {
    Entailed,
    Countermodel(Model),
    Unknown,
}

impl fmt::Display for SatVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatVerdict::Sat(m) => write!(f, "sat\n{m}"),
            SatVerdict::Unsat => writeln!(f, "unsat"),
            SatVerdict::Unknown => writeln!(f, "unknown"),
        }
    }
}

impl fmt::Display for EntailVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntailVerdict::Entailed => writeln!(f, "entailed"),
            EntailVerdict::Countermodel(m) => write!(f, "countermodel\n{m}"),
            EntailVerdict::Unknown => writeln!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

fn side_poly(side: Option<&Formula>, vars: &[PropLetter]) -> Poly {
    match side {
        None => Poly::zero(vars),
        Some(f) => to_poly(f, vars).expect("leaf formulas are in polynomial form"),
    }
}

/// The inequality system of a leaf: one `>= 0` row per hypothesis, the
/// goal-violation row `> 0` when the leaf has a goal, positivity marks
/// from the domain log.
pub fn leaf_system(nf: &NormalForm) -> PolySystem {
    let vars = nf.variables();
    let mut sys = PolySystem::new(vars.clone());
    for v in &vars {
        if nf.positive(v) {
            sys.mark_positive(v);
        }
    }
    for j in &nf.hypotheses {
        let d = side_poly(j.antecedents.first(), &vars)
            .sub(&side_poly(Some(&j.consequent), &vars))
            .expect("shared variables");
        if d.is_zero() {
            continue;
        }
        sys.push(d, Rel::Ge);
    }
    if let Some(g) = &nf.goal {
        if g.consequent != Formula::Bot {
            let d = side_poly(Some(&g.consequent), &vars)
                .sub(&side_poly(g.antecedents.first(), &vars))
                .expect("shared variables");
            sys.push(d, Rel::Gt);
        }
    }
    sys
}

/// The same system as linear rows; panics on nonlinear constraints.
pub fn lin_system(sys: &PolySystem) -> LinSystem {
    let mut lin = LinSystem::new(sys.vars.clone());
    for (p, rel) in &sys.constraints {
        let (coeffs, constant) = p.affine_parts().expect("affine leaf");
        lin.push(LinRow::new(coeffs, constant, *rel));
    }
    lin
}

fn check_witness(problem: &Problem, m: &Model) -> bool {
    let hyps = satisfies_all(m, &problem.hypotheses).unwrap_or(false);
    match &problem.goal {
        None => hyps,
        Some(g) => hyps && !satisfies(m, g).unwrap_or(true),
    }
}

/// Witness model of the first feasible leaf, if any.
fn al_search(problem: &Problem, moves: MoveSet) -> Result<Option<Model>, DecideError> {
    let mut found = None;
    let mode = Mode::decision(Logic::Al, moves);
    let _ = for_each_leaf(problem, mode, None, &mut |leaf| {
        let Leaf::Normal(nf) = leaf else {
            return ControlFlow::Continue(());
        };
        let sys = leaf_system(&nf);
        match lin_feasible(&lin_system(&sys)) {
            LinResult::Feasible(x) => {
                let m = nf.lift(&sys.vars, &x);
                assert!(check_witness(problem, &m), "affine witness failed re-verification:\n{m}");
                found = Some(m);
                ControlFlow::Break(())
            }
            LinResult::Infeasible => ControlFlow::Continue(()),
        }
    })?;
    Ok(found)
}

pub fn al_sat(hypotheses: &[Judgement]) -> Result<SatVerdict, DecideError> {
    al_sat_with(hypotheses, MoveSet::Efficient)
}

pub fn al_sat_with(hypotheses: &[Judgement], moves: MoveSet) -> Result<SatVerdict, DecideError> {
    let problem = Problem::sat(hypotheses.to_vec());
    Ok(match al_search(&problem, moves)? {
        Some(m) => SatVerdict::Sat(m),
        None => SatVerdict::Unsat,
    })
}

pub fn al_entails(hypotheses: &[Judgement], goal: &Judgement) -> Result<EntailVerdict, DecideError> {
    al_entails_with(hypotheses, goal, MoveSet::Efficient)
}

pub fn al_entails_with(
    hypotheses: &[Judgement],
    goal: &Judgement,
    moves: MoveSet,
) -> Result<EntailVerdict, DecideError> {
    let problem = Problem::entails(hypotheses.to_vec(), goal.clone());
    Ok(match al_search(&problem, moves)? {
        Some(m) => EntailVerdict::Countermodel(m),
        None => EntailVerdict::Entailed,
    })
}

/// Answers of an external solver for emitted leaves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExternalVerdicts {
    pub answers: BTreeMap<String, bool>,
}

impl ExternalVerdicts {
    pub fn is_unsat(&self, id: &str) -> bool {
        self.answers.get(id) == Some(&false)
    }
}

/// Reads `<leaf-id> sat|unsat` lines.
pub fn parse_verdicts(text: &str) -> Result<ExternalVerdicts, ParseError> {
    let mut out = ExternalVerdicts::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(id), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ParseError::syntax(0, "expected `<leaf-id> sat|unsat`").at_line(idx + 1));
        };
        let sat = match v {
            "sat" => true,
            "unsat" => false,
            other => {
                return Err(ParseError::syntax(0, format!("unknown verdict `{other}`")).at_line(idx + 1))
            }
        };
        out.answers.insert(id.to_string(), sat);
    }
    Ok(out)
}

pub fn leaf_id(index: usize) -> String {
    format!("L{index}")
}

/// Live leaves with their identifiers and systems, in enumeration order.
pub fn leaf_systems(
    problem: &Problem,
    logic: Logic,
    moves: MoveSet,
) -> Result<Vec<(String, NormalForm, PolySystem)>, DecideError> {
    let mut out = Vec::new();
    let _ = for_each_leaf(problem, Mode::decision(logic, moves), None, &mut |leaf| {
        if let Leaf::Normal(nf) = leaf {
            let sys = leaf_system(&nf);
            out.push((leaf_id(out.len()), nf, sys));
        }
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

enum PlOutcome {
    Witness(Model),
    Refuted,
    Open,
}

fn pl_search(
    problem: &Problem,
    budget: &Budget,
    verdicts: Option<&ExternalVerdicts>,
    moves: MoveSet,
) -> Result<PlOutcome, DecideError> {
    let mut witness = None;
    let mut all_refuted = true;
    let mut index = 0usize;
    let _ = for_each_leaf(problem, Mode::decision(Logic::Pl, moves), None, &mut |leaf| {
        let Leaf::Normal(nf) = leaf else {
            return ControlFlow::Continue(());
        };
        let id = leaf_id(index);
        index += 1;
        let sys = leaf_system(&nf);
        if let PolyResult::Sat(x) = poly_feasible(&sys, budget) {
            let m = nf.lift(&sys.vars, &x);
            if check_witness(problem, &m) {
                witness = Some(m);
                return ControlFlow::Break(());
            }
        }
        if !verdicts.is_some_and(|v| v.is_unsat(&id)) {
            all_refuted = false;
        }
        ControlFlow::Continue(())
    })?;
    Ok(match witness {
        Some(m) => PlOutcome::Witness(m),
        None if all_refuted => PlOutcome::Refuted,
        None => PlOutcome::Open,
    })
}

pub fn pl_sat(
    hypotheses: &[Judgement],
    budget: &Budget,
    verdicts: Option<&ExternalVerdicts>,
) -> Result<SatVerdict, DecideError> {
    pl_sat_with(hypotheses, budget, verdicts, MoveSet::Efficient)
}

pub fn pl_sat_with(
    hypotheses: &[Judgement],
    budget: &Budget,
    verdicts: Option<&ExternalVerdicts>,
    moves: MoveSet,
) -> Result<SatVerdict, DecideError> {
    let problem = Problem::sat(hypotheses.to_vec());
    Ok(match pl_search(&problem, budget, verdicts, moves)? {
        PlOutcome::Witness(m) => SatVerdict::Sat(m),
        PlOutcome::Refuted => SatVerdict::Unsat,
        PlOutcome::Open => SatVerdict::Unknown,
    })
}

pub fn pl_entails(
    hypotheses: &[Judgement],
    goal: &Judgement,
    budget: &Budget,
    verdicts: Option<&ExternalVerdicts>,
) -> Result<EntailVerdict, DecideError> {
    pl_entails_with(hypotheses, goal, budget, verdicts, MoveSet::Efficient)
}

pub fn pl_entails_with(
    hypotheses: &[Judgement],
    goal: &Judgement,
    budget: &Budget,
    verdicts: Option<&ExternalVerdicts>,
    moves: MoveSet,
) -> Result<EntailVerdict, DecideError> {
    let problem = Problem::entails(hypotheses.to_vec(), goal.clone());
    Ok(match pl_search(&problem, budget, verdicts, moves)? {
        PlOutcome::Witness(m) => EntailVerdict::Countermodel(m),
        PlOutcome::Refuted => EntailVerdict::Entailed,
        PlOutcome::Open => EntailVerdict::Unknown,
    })
}

/// Boolean formulas over named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolFormula {
    Var(String),
    Not(Box<BoolFormula>),
    And(Box<BoolFormula>, Box<BoolFormula>),
    Or(Box<BoolFormula>, Box<BoolFormula>),
}

impl BoolFormula {
    pub fn var(name: &str) -> Self {
        BoolFormula::Var(name.to_string())
    }

    pub fn not(a: BoolFormula) -> Self {
        BoolFormula::Not(Box::new(a))
    }

    pub fn and(a: BoolFormula, b: BoolFormula) -> Self {
        BoolFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolFormula, b: BoolFormula) -> Self {
        BoolFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, value: &dyn Fn(&str) -> bool) -> bool {
        match self {
            BoolFormula::Var(v) => value(v),
            BoolFormula::Not(a) => !a.eval(value),
            BoolFormula::And(a, b) => a.eval(value) && b.eval(value),
            BoolFormula::Or(a, b) => a.eval(value) || b.eval(value),
        }
    }

    /// Conjunction of clauses; literals are `(variable, positive)`.
    pub fn cnf(clauses: &[Vec<(String, bool)>]) -> Self {
        let lit = |(v, pos): &(String, bool)| {
            let a = BoolFormula::var(v);
            if *pos {
                a
            } else {
                BoolFormula::not(a)
            }
        };
        let clause = |c: &Vec<(String, bool)>| {
            let mut it = c.iter().map(lit);
            let first = it.next().expect("nonempty clause");
            it.fold(first, BoolFormula::or)
        };
        let mut it = clauses.iter().map(clause);
        let first = it.next().expect("at least one clause");
        it.fold(first, BoolFormula::and)
    }

    /// The formula with `~~` before every variable.
    pub fn double_negated(&self) -> Formula {
        match self {
            BoolFormula::Var(v) => Formula::neg(Formula::neg(Formula::prop(v))),
            BoolFormula::Not(a) => Formula::neg(a.double_negated()),
            BoolFormula::And(a, b) => Formula::and(a.double_negated(), b.double_negated()),
            BoolFormula::Or(a, b) => Formula::or(a.double_negated(), b.double_negated()),
        }
    }
}

/// `|- phi^~~` as a satisfiability problem, one judgement per top-level
/// conjunct. `|- a /\ b` and `{|- a, |- b}` have the same models, and the
/// split avoids the exponential size of nested expanded conjunctions.
pub fn encode_bool(phi: &BoolFormula) -> Problem {
    fn conjuncts<'a>(f: &'a BoolFormula, out: &mut Vec<&'a BoolFormula>) {
        match f {
            BoolFormula::And(a, b) => {
                conjuncts(a, out);
                conjuncts(b, out);
            }
            other => out.push(other),
        }
    }
    let mut parts = Vec::new();
    conjuncts(phi, &mut parts);
    Problem::sat(
        parts
            .into_iter()
            .map(|c| Judgement::single(None, c.double_negated()))
            .collect(),
    )
}

/// The single judgement `|- phi^~~`.
pub fn encode_bool_single(phi: &BoolFormula) -> Problem {
    Problem::sat(vec![Judgement::single(None, phi.double_negated())])
}
