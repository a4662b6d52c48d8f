//! The nondeterministic move systems that reduce a problem to judgements in
//! polynomial form, and exhaustive enumeration of their leaves.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical::{canonicalize, classify};
use crate::numeric::{ExtValue, Rat};
use crate::semantics::{eval, Model};
use crate::syntax::{Formula, Judgement, Problem, PropLetter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Logic {
    Al,
    Pl,
}

/// Decision mode prunes finitely unsatisfiable states early and tracks
/// finiteness and positivity in the domain log. Faithful mode carries the
/// auxiliary judgements of the completeness reduction instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fidelity {
    Decision,
    Faithful,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveSet {
    Naive,
    Efficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub logic: Logic,
    pub fidelity: Fidelity,
    pub moves: MoveSet,
}

impl Mode {
    pub fn decision(logic: Logic, moves: MoveSet) -> Self {
        Mode {
            logic,
            fidelity: Fidelity::Decision,
            moves,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    FinitePositive,
    InfinityAssigned,
    ZeroAssigned,
    Finite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Init,
    Domain,
    Pcf,
    Lolli,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("the problem has no goal")]
    NoGoal,
    #[error("move `{mv}` is not allowed in phase {phase:?}")]
    InvalidPhase { mv: &'static str, phase: Phase },
    #[error("letter `{0}` already has a domain")]
    AlreadyDecided(PropLetter),
    #[error("letter `{0}` does not occur in the state")]
    UnknownLetter(PropLetter),
    #[error("letter `{0}` has no domain yet")]
    Undecided(PropLetter),
    #[error("no occurrence of -o left")]
    NoLollipop,
    #[error("affine mode does not accept multiplication")]
    AlModeViolation,
}

/// A configuration of the move system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionState {
    pub hypotheses: Vec<Judgement>,
    pub goal: Option<Judgement>,
    pub fresh: u32,
    pub domain_log: BTreeMap<PropLetter, Domain>,
    pub phase: Phase,
    pub logic: Logic,
    pub fidelity: Fidelity,
    /// Letters to be branched on, by first occurrence.
    pub domain_letters: Vec<PropLetter>,
    /// The finiteness judgements `|- ~~p` kept aside in faithful mode.
    pub finiteness: Vec<Judgement>,
}

/// Folds the antecedent list into at most one formula.
fn fold_antecedents(j: &Judgement) -> Judgement {
    let mut it = j.antecedents.iter().cloned();
    let lhs: Vec<Formula> = it.next().map(|first| it.fold(first, Formula::tensor)).into_iter().collect();
    Judgement::new(lhs, j.consequent.clone())
}

impl ReductionState {
    pub fn new(problem: &Problem, logic: Logic, fidelity: Fidelity) -> Result<Self, ReductionError> {
        if logic == Logic::Al && problem.contains_mult() {
            return Err(ReductionError::AlModeViolation);
        }
        let mut s = ReductionState {
            hypotheses: problem.hypotheses.iter().map(fold_antecedents).collect(),
            goal: problem.goal.as_ref().map(fold_antecedents),
            fresh: 0,
            domain_log: BTreeMap::new(),
            phase: if problem.goal.is_some() { Phase::Init } else { Phase::Domain },
            logic,
            fidelity,
            domain_letters: Vec::new(),
            finiteness: Vec::new(),
        };
        if s.phase == Phase::Domain {
            s.domain_letters = s.letters();
        }
        Ok(s)
    }

    fn fresh_letter(&mut self) -> PropLetter {
        let p = PropLetter::Fresh(self.fresh);
        self.fresh += 1;
        p
    }

    /// Letters of the hypotheses, then the goal, by first occurrence.
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

    pub fn undecided(&self) -> Vec<PropLetter> {
        self.domain_letters
            .iter()
            .filter(|p| !self.domain_log.contains_key(*p))
            .cloned()
            .collect()
    }

    pub fn lolli_count(&self) -> usize {
        self.hypotheses.iter().map(Judgement::lolli_count).sum()
    }

    fn log(&mut self, p: &PropLetter, d: Domain) -> Result<(), ReductionError> {
        if self.domain_log.contains_key(p) {
            return Err(ReductionError::AlreadyDecided(p.clone()));
        }
        self.domain_log.insert(p.clone(), d);
        Ok(())
    }

    fn substitute(&mut self, p: &PropLetter, by: &Formula) {
        for j in self.hypotheses.iter_mut() {
            *j = j.substitute(p, by);
        }
        if let Some(g) = self.goal.as_mut() {
            *g = g.substitute(p, by);
        }
    }

    /// Stable short digest of the printed state.
    pub fn digest(&self) -> String {
        let bytes = Sha256::digest(self.to_string().as_bytes());
        bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for ReductionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in &self.hypotheses {
            writeln!(f, "{j}")?;
        }
        if let Some(g) = &self.goal {
            writeln!(f, "goal: {g}")?;
        }
        for (p, d) in &self.domain_log {
            writeln!(f, "domain {p}: {d:?}")?;
        }
        for j in &self.finiteness {
            writeln!(f, "finite: {j}")?;
        }
        Ok(())
    }
}

/// (Init): goal `phi |- psi` becomes `p |- q` with `p |- phi` and
/// `psi |- q` added.
pub fn move_init(state: &ReductionState) -> Result<ReductionState, ReductionError> {
    let Some(goal) = state.goal.clone() else {
        return Err(ReductionError::NoGoal);
    };
    if state.phase != Phase::Init {
        return Err(ReductionError::InvalidPhase {
            mv: "init",
            phase: state.phase,
        });
    }
    let mut s = state.clone();
    let p = s.fresh_letter();
    let q = s.fresh_letter();
    let lhs = goal.antecedents.first().cloned().unwrap_or_else(Formula::zero);
    s.hypotheses.push(Judgement::single(Some(Formula::letter(p.clone())), lhs));
    s.hypotheses.push(Judgement::single(Some(goal.consequent.clone()), Formula::letter(q.clone())));
    s.goal = Some(Judgement::single(Some(Formula::letter(p)), Formula::letter(q)));
    s.phase = Phase::Domain;
    s.domain_letters = s.letters();
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Successor {
    pub tag: &'static str,
    pub state: ReductionState,
}

/// (FP) / (bot) / (0) for letter `p`. Affine states get two successors.
pub fn domain_branches(
    state: &ReductionState,
    p: &PropLetter,
) -> Result<Vec<Successor>, ReductionError> {
    if state.phase != Phase::Domain {
        return Err(ReductionError::InvalidPhase {
            mv: "domain",
            phase: state.phase,
        });
    }
    if state.domain_log.contains_key(p) {
        return Err(ReductionError::AlreadyDecided(p.clone()));
    }
    if !state.domain_letters.contains(p) {
        return Err(ReductionError::UnknownLetter(p.clone()));
    }
    let mut out = Vec::new();

    let mut fp = state.clone();
    fp.hypotheses
        .push(Judgement::single(None, Formula::neg(Formula::neg(Formula::letter(p.clone())))));
    match (state.logic, state.fidelity) {
        (Logic::Al, _) => fp.log(p, Domain::Finite)?,
        (Logic::Pl, Fidelity::Decision) => fp.log(p, Domain::FinitePositive)?,
        (Logic::Pl, Fidelity::Faithful) => {
            let q = fp.fresh_letter();
            let qq = Formula::mult(Formula::letter(q.clone()), Formula::letter(q.clone()));
            fp.hypotheses.push(Judgement::single(
                Some(Formula::mult(qq, Formula::letter(p.clone()))),
                Formula::One,
            ));
            fp.log(p, Domain::FinitePositive)?;
            fp.log(&q, Domain::Finite)?;
        }
    }
    out.push(Successor { tag: "FP", state: fp });

    let mut bot = state.clone();
    bot.substitute(p, &Formula::Bot);
    bot.log(p, Domain::InfinityAssigned)?;
    out.push(Successor { tag: "bot", state: bot });

    if state.logic == Logic::Pl {
        let mut zero = state.clone();
        zero.substitute(p, &Formula::zero());
        zero.log(p, Domain::ZeroAssigned)?;
        out.push(Successor { tag: "0", state: zero });
    }
    Ok(out)
}

/// (CF): canonicalizes every judgement.
pub fn move_cf(state: &ReductionState) -> Result<ReductionState, ReductionError> {
    if state.phase != Phase::Domain {
        return Err(ReductionError::InvalidPhase {
            mv: "cf",
            phase: state.phase,
        });
    }
    if let Some(p) = state.undecided().into_iter().next() {
        return Err(ReductionError::Undecided(p));
    }
    let mut s = state.clone();
    s.hypotheses = s.hypotheses.iter().map(|j| j.map(canonicalize)).collect();
    s.goal = s.goal.map(|g| g.map(canonicalize));
    if s.fidelity == Fidelity::Faithful {
        let live: Vec<PropLetter> = s
            .letters()
            .into_iter()
            .filter(|p| s.domain_log.contains_key(p))
            .collect();
        s.finiteness = live
            .into_iter()
            .map(|p| Judgement::single(None, Formula::neg(Formula::neg(Formula::letter(p)))))
            .collect();
    }
    s.phase = Phase::Pcf;
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PcfOutcome {
    State(ReductionState),
    Pruned(String),
}

fn side_is_bot(j: &Judgement) -> bool {
    j.antecedents.iter().any(|a| *a == Formula::Bot)
}

/// Replaces closed subformulas containing `-o` by their constant value.
pub fn fold_closed(f: &Formula) -> Formula {
    if f.lolli_count() == 0 {
        return f.clone();
    }
    if f.letters().is_empty() {
        if let Ok(ExtValue::Finite(c)) = eval(&Model::new(), f) {
            return Formula::constant(c);
        }
    }
    match f {
        Formula::Scalar(r, b) => Formula::scalar(r.clone(), fold_closed(b)),
        Formula::Tensor(a, b) => Formula::tensor(fold_closed(a), fold_closed(b)),
        Formula::Lollipop(a, b) => Formula::lolli(fold_closed(a), fold_closed(b)),
        Formula::Mult(a, b) => Formula::mult(fold_closed(a), fold_closed(b)),
        _ => f.clone(),
    }
}

/// (Valid) then (Unsat).
pub fn move_pcf(state: &ReductionState) -> Result<PcfOutcome, ReductionError> {
    if state.phase != Phase::Pcf {
        return Err(ReductionError::InvalidPhase {
            mv: "pcf",
            phase: state.phase,
        });
    }
    let mut s = state.clone();
    s.hypotheses.retain(|j| !side_is_bot(j));
    let mut out = Vec::with_capacity(s.hypotheses.len());
    for j in s.hypotheses {
        if j.consequent == Formula::Bot {
            match s.fidelity {
                Fidelity::Decision => {
                    return Ok(PcfOutcome::Pruned(format!("finitely unsatisfiable: {j}")))
                }
                Fidelity::Faithful => {
                    out.push(Judgement::single(Some(Formula::zero()), Formula::One));
                }
            }
        } else {
            out.push(j);
        }
    }
    s.hypotheses = out;
    if s.fidelity == Fidelity::Decision {
        if let Some(g) = &s.goal {
            if side_is_bot(g) {
                return Ok(PcfOutcome::Pruned(format!("goal holds: {g}")));
            }
        }
        s.hypotheses = s.hypotheses.iter().map(|j| j.map(fold_closed)).collect();
    }
    debug_assert!(s
        .hypotheses
        .iter()
        .all(|j| j.formulas().all(|f| classify(f).is_pcf())));
    s.phase = Phase::Lolli;
    Ok(PcfOutcome::State(s))
}

#[derive(Clone, Debug)]
enum Step {
    TensorL(Formula),
    TensorR(Formula),
    MultL(Formula),
    MultR(Formula),
    Scalar(Rat),
}

impl Step {
    fn multiplicative(&self) -> bool {
        matches!(self, Step::MultL(_) | Step::MultR(_) | Step::Scalar(_))
    }
}

/// Path (outermost first) to the first outermost `-o`, plus its operands.
fn locate(f: &Formula) -> Option<(Vec<Step>, Formula, Formula)> {
    match f {
        Formula::Lollipop(a, b) => Some((Vec::new(), (**a).clone(), (**b).clone())),
        Formula::Tensor(a, b) => {
            if let Some((mut path, x, y)) = locate(a) {
                path.insert(0, Step::TensorR((**b).clone()));
                Some((path, x, y))
            } else {
                let (mut path, x, y) = locate(b)?;
                path.insert(0, Step::TensorL((**a).clone()));
                Some((path, x, y))
            }
        }
        Formula::Mult(a, b) => {
            if let Some((mut path, x, y)) = locate(a) {
                path.insert(0, Step::MultR((**b).clone()));
                Some((path, x, y))
            } else {
                let (mut path, x, y) = locate(b)?;
                path.insert(0, Step::MultL((**a).clone()));
                Some((path, x, y))
            }
        }
        Formula::Scalar(r, b) => {
            let (mut path, x, y) = locate(b)?;
            path.insert(0, Step::Scalar(r.clone()));
            Some((path, x, y))
        }
        _ => None,
    }
}

/// `C[f]`. `TensorL(s)` means the hole is the right operand of `s (+) _`.
fn plug(path: &[Step], f: Formula) -> Formula {
    path.iter().rev().fold(f, |cur, step| match step {
        Step::TensorL(s) => Formula::tensor(s.clone(), cur),
        Step::TensorR(s) => Formula::tensor(cur, s.clone()),
        Step::MultL(s) => Formula::mult(s.clone(), cur),
        Step::MultR(s) => Formula::mult(cur, s.clone()),
        Step::Scalar(r) => Formula::scalar(r.clone(), cur),
    })
}

/// `C[0]` simplified; `None` when the whole context collapses to zero.
fn plug_zero(path: &[Step]) -> Option<Formula> {
    path.iter().rev().fold(None, |cur, step| match (step, cur) {
        (Step::TensorL(s) | Step::TensorR(s), None) => Some(s.clone()),
        (_, None) => None,
        (step, Some(c)) => Some(plug(std::slice::from_ref(step), c)),
    })
}

/// `C'[f]`: the context with its tensor siblings removed.
fn plug_prime(path: &[Step], f: Formula) -> Formula {
    path.iter().rev().fold(f, |cur, step| match step {
        Step::TensorL(_) | Step::TensorR(_) => cur,
        other => plug(std::slice::from_ref(other), cur),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

struct Site {
    index: usize,
    side: Side,
    path: Vec<Step>,
    /// `vartheta` in `vartheta -o gamma`.
    premise: Formula,
    /// `gamma` in `vartheta -o gamma`.
    conclusion: Formula,
}

fn find_site(state: &ReductionState) -> Option<Site> {
    for (index, j) in state.hypotheses.iter().enumerate() {
        if let Some(a) = j.antecedents.first() {
            if let Some((path, premise, conclusion)) = locate(a) {
                return Some(Site {
                    index,
                    side: Side::Left,
                    path,
                    premise,
                    conclusion,
                });
            }
        }
        if let Some((path, premise, conclusion)) = locate(&j.consequent) {
            return Some(Site {
                index,
                side: Side::Right,
                path,
                premise,
                conclusion,
            });
        }
    }
    None
}

fn ante(j: &Judgement) -> Option<Formula> {
    j.antecedents.first().cloned()
}

fn judge(lhs: Option<Formula>, rhs: Formula) -> Judgement {
    Judgement::single(lhs, rhs)
}

fn lit(p: &PropLetter) -> Formula {
    Formula::letter(p.clone())
}

fn replace(state: &ReductionState, index: usize, new: Vec<Judgement>) -> ReductionState {
    let mut s = state.clone();
    s.hypotheses.splice(index..=index, new);
    s
}

fn tag_prefix(path: &[Step]) -> &'static str {
    match path.last() {
        Some(s) if s.multiplicative() => "m",
        _ => "⊗",
    }
}

/// Weight interpretation that strictly decreases under the naive moves.
pub fn naive_weight(state: &ReductionState) -> BigUint {
    fn w(f: &Formula) -> BigUint {
        match f {
            Formula::Bot | Formula::One | Formula::Prop(_) => BigUint::from(2u32),
            Formula::Scalar(_, b) => w(b) + 1u32,
            Formula::Tensor(a, b) => w(a) + w(b) + 1u32,
            Formula::Mult(a, b) => w(a) * w(b),
            Formula::Lollipop(a, b) => (w(a) + w(b)) * 3u32 + 3u32,
        }
    }
    state
        .hypotheses
        .iter()
        .map(|j| j.formulas().map(w).sum::<BigUint>() + 1u32)
        .sum()
}

/// The moves of the completeness reduction: `(x-L1)`, `(x-L2)`, `(x-R1)`,
/// `(x-R2)` for `x` in `⊗`, `m`, applied in an arbitrary context built
/// from tensors, products and scalars.
pub fn lolli_branches_complete(state: &ReductionState) -> Result<Vec<Successor>, ReductionError> {
    check_lolli_phase(state)?;
    let site = find_site(state).ok_or(ReductionError::NoLollipop)?;
    let j = &state.hypotheses[site.index];
    let (v, g) = (site.premise.clone(), site.conclusion.clone());
    let prefix = tag_prefix(&site.path);
    let top_mult = site.path.first().is_some_and(Step::multiplicative);
    let mut out = Vec::new();
    match site.side {
        Side::Left => {
            let psi = j.consequent.clone();
            let first = match plug_zero(&site.path) {
                Some(c) => judge(Some(c), psi.clone()),
                None => judge(None, psi.clone()),
            };
            out.push(Successor {
                tag: if prefix == "m" { "m-L1" } else { "⊗-L1" },
                state: replace(state, site.index, vec![first, judge(Some(v.clone()), g.clone())]),
            });
            let cg = plug(&site.path, g.clone());
            let cv = plug_prime(&site.path, v.clone());
            let rhs = if top_mult { Formula::tensor(cv, psi) } else { Formula::tensor(psi, cv) };
            out.push(Successor {
                tag: if prefix == "m" { "m-L2" } else { "⊗-L2" },
                state: replace(state, site.index, vec![judge(Some(cg), rhs), judge(Some(g), v)]),
            });
        }
        Side::Right => {
            let phi = ante(j);
            let mut first = vec![];
            if let Some(c) = plug_zero(&site.path) {
                first.push(judge(phi.clone(), c));
            }
            first.push(judge(Some(v.clone()), g.clone()));
            out.push(Successor {
                tag: if prefix == "m" { "m-R1" } else { "⊗-R1" },
                state: replace(state, site.index, first),
            });
            let cv = plug_prime(&site.path, v.clone());
            let lhs = match phi {
                Some(a) => Formula::tensor(a, cv),
                None => cv,
            };
            let cg = plug(&site.path, g.clone());
            out.push(Successor {
                tag: if prefix == "m" { "m-R2" } else { "⊗-R2" },
                state: replace(state, site.index, vec![judge(Some(lhs), cg), judge(Some(g), v)]),
            });
        }
    }
    let before = naive_weight(state);
    for s in &out {
        assert!(naive_weight(&s.state) < before, "naive move must decrease the weight");
        debug_assert!(pcf_preserved(&s.state));
    }
    Ok(out)
}

fn check_lolli_phase(state: &ReductionState) -> Result<(), ReductionError> {
    if state.phase != Phase::Lolli {
        return Err(ReductionError::InvalidPhase {
            mv: "lolli",
            phase: state.phase,
        });
    }
    Ok(())
}

fn pcf_preserved(state: &ReductionState) -> bool {
    state
        .hypotheses
        .iter()
        .all(|j| j.formulas().all(|f| classify(f).is_pcf()))
}

/// The efficient moves with fresh letters: `(⊗-R*)`, `(m-R*)` are
/// deterministic, the left moves branch into `L1*` and `L2*`.
pub fn lolli_branches_efficient(state: &ReductionState) -> Result<Vec<Successor>, ReductionError> {
    check_lolli_phase(state)?;
    let site = find_site(state).ok_or(ReductionError::NoLollipop)?;
    let j = state.hypotheses[site.index].clone();
    let (v, g) = (site.premise.clone(), site.conclusion.clone());
    let mut out = Vec::new();
    match site.side {
        Side::Right => {
            let mut s = state.clone();
            let k = s.fresh_letter();
            let new = vec![
                judge(ante(&j), plug(&site.path, lit(&k))),
                judge(Some(Formula::tensor(lit(&k), v)), g),
            ];
            let tag = if tag_prefix(&site.path) == "m" { "m-R*" } else { "⊗-R*" };
            out.push(Successor {
                tag,
                state: replace(&s, site.index, new),
            });
        }
        Side::Left => {
            let psi = j.consequent.clone();
            // Split the path into the context of the parent `Y` and the
            // step from `Y` to the occurrence.
            let (outer, last) = match site.path.split_last() {
                Some((last, outer)) => (outer.to_vec(), Some(last.clone())),
                None => (Vec::new(), None),
            };
            let mut base = state.clone();
            let mut prefix = Vec::new();
            let target = if outer.is_empty() {
                psi
            } else {
                let y = base.fresh_letter();
                prefix.push(judge(Some(plug(&outer, lit(&y))), psi));
                lit(&y)
            };
            let tag_m = last.as_ref().is_some_and(Step::multiplicative);

            // L1*
            let mut l1 = prefix.clone();
            let rho_only = match &last {
                Some(Step::TensorL(r) | Step::TensorR(r)) => Some(r.clone()),
                _ => None,
            };
            l1.push(judge(rho_only, target.clone()));
            l1.push(judge(Some(v.clone()), g.clone()));
            out.push(Successor {
                tag: if tag_m { "m-L1*" } else { "⊗-L1*" },
                state: replace(&base, site.index, l1),
            });

            // L2*
            let mut s2 = base.clone();
            let mut l2 = prefix;
            match &last {
                Some(Step::MultL(rho) | Step::MultR(rho)) => {
                    let p = s2.fresh_letter();
                    let q = s2.fresh_letter();
                    let r = s2.fresh_letter();
                    l2.push(judge(
                        Some(Formula::mult(lit(&p), lit(&q))),
                        Formula::tensor(Formula::mult(lit(&p), lit(&r)), target),
                    ));
                    l2.push(judge(Some(rho.clone()), lit(&p)));
                    l2.push(judge(Some(g), lit(&q)));
                    l2.push(judge(Some(lit(&q)), lit(&r)));
                    l2.push(judge(Some(lit(&r)), v));
                }
                _ => {
                    let p = s2.fresh_letter();
                    let q = s2.fresh_letter();
                    let (lhs, rhs) = match &last {
                        Some(Step::TensorL(rho) | Step::TensorR(rho)) => {
                            (Formula::tensor(rho.clone(), lit(&p)), Formula::tensor(target, lit(&q)))
                        }
                        Some(Step::Scalar(c)) => (
                            Formula::scalar(c.clone(), lit(&p)),
                            Formula::tensor(target, Formula::scalar(c.clone(), lit(&q))),
                        ),
                        _ => (lit(&p), Formula::tensor(target, lit(&q))),
                    };
                    l2.push(judge(Some(lhs), rhs));
                    l2.push(judge(Some(g), lit(&p)));
                    l2.push(judge(Some(lit(&p)), lit(&q)));
                    l2.push(judge(Some(lit(&q)), v));
                }
            }
            out.push(Successor {
                tag: if tag_m { "m-L2*" } else { "⊗-L2*" },
                state: replace(&s2, site.index, l2),
            });
        }
    }
    let before = state.lolli_count();
    for s in &out {
        assert!(s.state.lolli_count() < before, "efficient move must remove a -o");
        debug_assert!(pcf_preserved(&s.state));
    }
    Ok(out)
}

/// A terminal configuration: every hypothesis is in polynomial form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub hypotheses: Vec<Judgement>,
    pub goal: Option<Judgement>,
    pub domain_log: BTreeMap<PropLetter, Domain>,
    pub domain_letters: Vec<PropLetter>,
    pub finiteness: Vec<Judgement>,
}

impl NormalForm {
    /// Finite domain letters by first occurrence, then the fresh letters of
    /// the leaf by index.
    pub fn variables(&self) -> Vec<PropLetter> {
        let mut vars: Vec<PropLetter> = self
            .domain_letters
            .iter()
            .filter(|p| {
                matches!(
                    self.domain_log.get(*p),
                    Some(Domain::Finite | Domain::FinitePositive)
                )
            })
            .cloned()
            .collect();
        let mut fresh: Vec<PropLetter> = Vec::new();
        let mut seen = HashSet::new();
        for j in self.hypotheses.iter().chain(self.goal.iter()) {
            for f in j.formulas() {
                f.collect_letters(&mut fresh, &mut seen);
            }
        }
        let mut extra: Vec<PropLetter> = fresh
            .into_iter()
            .filter(|p| !vars.contains(p))
            .collect();
        extra.sort();
        vars.extend(extra);
        vars
    }

    pub fn positive(&self, p: &PropLetter) -> bool {
        self.domain_log.get(p) == Some(&Domain::FinitePositive)
    }

    /// Rebuilds a model on user letters from values of [`Self::variables`].
    pub fn lift(&self, vars: &[PropLetter], values: &[Rat]) -> Model {
        let mut m = Model::new();
        for (p, d) in &self.domain_log {
            if p.is_fresh() {
                continue;
            }
            match d {
                Domain::InfinityAssigned => m.set(p.clone(), ExtValue::Infinity),
                Domain::ZeroAssigned => m.set(p.clone(), ExtValue::zero()),
                Domain::Finite | Domain::FinitePositive => {
                    let i = vars.iter().position(|v| v == p).expect("finite letter is a variable");
                    m.set(p.clone(), ExtValue::Finite(values[i].clone()));
                }
            }
        }
        m
    }
}

impl fmt::Display for NormalForm {
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

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Leaf {
    Normal(NormalForm),
    Pruned {
        reason: String,
        domain_log: BTreeMap<PropLetter, Domain>,
    },
}

/// Depth-first expansion in the fixed phase order. The visitor may stop
/// the search early. Trace lines are appended when `trace` is given.
pub fn for_each_leaf(
    problem: &Problem,
    mode: Mode,
    trace: Option<&mut Vec<String>>,
    visit: &mut dyn FnMut(Leaf) -> ControlFlow<()>,
) -> Result<ControlFlow<()>, ReductionError> {
    let mut state = ReductionState::new(problem, mode.logic, mode.fidelity)?;
    let mut sink = trace;
    if state.phase == Phase::Init {
        let next = move_init(&state)?;
        record(&mut sink, "Init", &state, &next);
        state = next;
    }
    expand(state, mode, &mut sink, visit)
}

fn record(sink: &mut Option<&mut Vec<String>>, tag: &str, before: &ReductionState, after: &ReductionState) {
    if let Some(lines) = sink.as_deref_mut() {
        lines.push(format!("({tag}) {} -> {}", before.digest(), after.digest()));
    }
}

fn measure(s: &ReductionState) -> (usize, usize) {
    let non_pcf = s
        .hypotheses
        .iter()
        .filter(|j| !j.formulas().all(|f| classify(f).is_pcf()))
        .count();
    (s.undecided().len(), non_pcf)
}

fn expand(
    state: ReductionState,
    mode: Mode,
    sink: &mut Option<&mut Vec<String>>,
    visit: &mut dyn FnMut(Leaf) -> ControlFlow<()>,
) -> Result<ControlFlow<()>, ReductionError> {
    match state.phase {
        Phase::Init => unreachable!("init handled by the driver"),
        Phase::Domain => {
            if let Some(p) = state.undecided().into_iter().next() {
                for succ in domain_branches(&state, &p)? {
                    assert!(measure(&succ.state) < measure(&state));
                    record(sink, succ.tag, &state, &succ.state);
                    if expand(succ.state, mode, sink, visit)?.is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
                Ok(ControlFlow::Continue(()))
            } else {
                let next = move_cf(&state)?;
                record(sink, "CF", &state, &next);
                expand(next, mode, sink, visit)
            }
        }
        Phase::Pcf => match move_pcf(&state)? {
            PcfOutcome::Pruned(reason) => {
                if let Some(lines) = sink.as_deref_mut() {
                    lines.push(format!("(Unsat) {} -> pruned", state.digest()));
                }
                Ok(visit(Leaf::Pruned {
                    reason,
                    domain_log: state.domain_log.clone(),
                }))
            }
            PcfOutcome::State(next) => {
                record(sink, "PCF", &state, &next);
                expand(next, mode, sink, visit)
            }
        },
        Phase::Lolli => {
            if state.lolli_count() == 0 {
                debug_assert!(state
                    .hypotheses
                    .iter()
                    .all(|j| j.formulas().all(|f| classify(f).is_polynomial())));
                return Ok(visit(Leaf::Normal(NormalForm {
                    hypotheses: state.hypotheses,
                    goal: state.goal,
                    domain_log: state.domain_log,
                    domain_letters: state.domain_letters,
                    finiteness: state.finiteness,
                })));
            }
            let succs = match mode.moves {
                MoveSet::Naive => lolli_branches_complete(&state)?,
                MoveSet::Efficient => lolli_branches_efficient(&state)?,
            };
            for succ in succs {
                record(sink, succ.tag, &state, &succ.state);
                if expand(succ.state, mode, sink, visit)?.is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
            Ok(ControlFlow::Continue(()))
        }
    }
}

/// All leaves, in depth-first order.
pub fn enumerate_normal_forms(problem: &Problem, mode: Mode) -> Result<Vec<Leaf>, ReductionError> {
    let mut leaves = Vec::new();
    let _ = for_each_leaf(problem, mode, None, &mut |leaf| {
        leaves.push(leaf);
        ControlFlow::Continue(())
    })?;
    Ok(leaves)
}

/// All leaves together with the move trace.
pub fn trace_reduction(problem: &Problem, mode: Mode) -> Result<(Vec<Leaf>, Vec<String>), ReductionError> {
    let mut leaves = Vec::new();
    let mut lines = Vec::new();
    let _ = for_each_leaf(problem, mode, Some(&mut lines), &mut |leaf| {
        leaves.push(leaf);
        ControlFlow::Continue(())
    })?;
    Ok((leaves, lines))
}
