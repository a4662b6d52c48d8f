//! The natural deduction calculus: rule schemas, proof scripts, a checker
//! and a randomized soundness auditor.

use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::ParseError;
use crate::gen::{default_scalars, random_formula, GenConfig};
use crate::numeric::{parse_rat, Rat};
use crate::semantics::{sample_model_with, satisfies, Model, Profile};
use crate::syntax::{parse_formula, parse_formula_list, parse_judgement, Formula, Judgement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Id,
    Cut,
    Weak,
    Perm,
    Top,
    Bot,
    And1,
    And2,
    And3,
    Or1,
    Or2,
    Or3,
    Wem,
    Tot,
    Tensor1Fwd,
    Tensor1Bwd,
    Tensor2Fwd,
    Tensor2Bwd,
    Tensor3,
    Lolli1,
    Lolli2,
    Lolli3,
    OneRule,
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7Fwd,
    P7Bwd,
    P8,
    P9,
}

impl RuleId {
    pub const ALL: [RuleId; 33] = [
        RuleId::Id,
        RuleId::Cut,
        RuleId::Weak,
        RuleId::Perm,
        RuleId::Top,
        RuleId::Bot,
        RuleId::And1,
        RuleId::And2,
        RuleId::And3,
        RuleId::Or1,
        RuleId::Or2,
        RuleId::Or3,
        RuleId::Wem,
        RuleId::Tot,
        RuleId::Tensor1Fwd,
        RuleId::Tensor1Bwd,
        RuleId::Tensor2Fwd,
        RuleId::Tensor2Bwd,
        RuleId::Tensor3,
        RuleId::Lolli1,
        RuleId::Lolli2,
        RuleId::Lolli3,
        RuleId::OneRule,
        RuleId::P1,
        RuleId::P2,
        RuleId::P3,
        RuleId::P4,
        RuleId::P5,
        RuleId::P6,
        RuleId::P7Fwd,
        RuleId::P7Bwd,
        RuleId::P8,
        RuleId::P9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Id => "id",
            RuleId::Cut => "cut",
            RuleId::Weak => "weak",
            RuleId::Perm => "perm",
            RuleId::Top => "top",
            RuleId::Bot => "bot",
            RuleId::And1 => "and1",
            RuleId::And2 => "and2",
            RuleId::And3 => "and3",
            RuleId::Or1 => "or1",
            RuleId::Or2 => "or2",
            RuleId::Or3 => "or3",
            RuleId::Wem => "wem",
            RuleId::Tot => "tot",
            RuleId::Tensor1Fwd => "tensor1_fwd",
            RuleId::Tensor1Bwd => "tensor1_bwd",
            RuleId::Tensor2Fwd => "tensor2_fwd",
            RuleId::Tensor2Bwd => "tensor2_bwd",
            RuleId::Tensor3 => "tensor3",
            RuleId::Lolli1 => "lolli1",
            RuleId::Lolli2 => "lolli2",
            RuleId::Lolli3 => "lolli3",
            RuleId::OneRule => "one_rule",
            RuleId::P1 => "P1",
            RuleId::P2 => "P2",
            RuleId::P3 => "P3",
            RuleId::P4 => "P4",
            RuleId::P5 => "P5",
            RuleId::P6 => "P6",
            RuleId::P7Fwd => "P7_fwd",
            RuleId::P7Bwd => "P7_bwd",
            RuleId::P8 => "P8",
            RuleId::P9 => "P9",
        }
    }

    pub fn from_name(name: &str) -> Option<RuleId> {
        if name == "one" {
            return Some(RuleId::OneRule);
        }
        RuleId::ALL.into_iter().find(|r| r.name() == name)
    }

    /// The schema as printed in the source table, premises before `⟹`.
    pub fn schema_text(self) -> &'static str {
        match self {
            RuleId::Id => "⊢ φ ⊢ φ",
            RuleId::Cut => "Γ ⊢ φ and Δ, φ ⊢ ψ ⟹ Γ, Δ ⊢ ψ",
            RuleId::Weak => "Γ ⊢ φ ⟹ Γ, ψ ⊢ φ",
            RuleId::Perm => "Γ, φ, ψ, Δ ⊢ θ ⟹ Γ, ψ, φ, Δ ⊢ θ",
            RuleId::Top => "Γ ⊢ ⊤",
            RuleId::Bot => "⊥ ⊢ φ",
            RuleId::And1 => "Γ, φ ⊢ θ ⟹ Γ, φ ∧ ψ ⊢ θ",
            RuleId::And2 => "Γ ⊢ φ and Γ ⊢ ψ ⟹ Γ ⊢ φ ∧ ψ",
            RuleId::And3 => "Γ ⊢ φ ∧ ψ ⟹ Γ ⊢ ψ",
            RuleId::Or1 => "Γ, φ ⊢ θ and Γ, ψ ⊢ θ ⟹ Γ, φ ∨ ψ ⊢ θ",
            RuleId::Or2 => "Γ ⊢ φ ⟹ Γ ⊢ φ ∨ ψ",
            RuleId::Or3 => "Γ, φ ∨ ψ ⊢ θ ⟹ Γ, ψ ⊢ θ",
            RuleId::Wem => "⊢ (¬φ) ∨ (¬¬φ)",
            RuleId::Tot => "⊢ (φ ⊸ ψ) ∨ (ψ ⊸ φ)",
            RuleId::Tensor1Fwd => "Γ, φ, ψ ⊢ θ ⟹ Γ, φ ⊗ ψ ⊢ θ",
            RuleId::Tensor1Bwd => "Γ, φ ⊗ ψ ⊢ θ ⟹ Γ, φ, ψ ⊢ θ",
            RuleId::Tensor2Fwd => "Γ, φ ⊗ ψ ⊢ θ ⟹ Γ, φ ⊢ ψ ⊸ θ",
            RuleId::Tensor2Bwd => "Γ, φ ⊢ ψ ⊸ θ ⟹ Γ, φ ⊗ ψ ⊢ θ",
            RuleId::Tensor3 => "φ ⊗ φ ⊢ ψ ⊗ ψ ⟹ φ ⊢ ψ",
            RuleId::Lolli1 => "Γ, φ ⊸ θ ⊢ ψ and θ ⊢ φ ⟹ Γ, θ ⊢ φ ⊗ ψ",
            RuleId::Lolli2 => "Γ, θ ⊢ φ ⊗ ψ and ⊢ ¬¬φ ⟹ Γ, φ ⊸ θ ⊢ ψ",
            RuleId::Lolli3 => "Γ, θ ⊢ φ ⊗ ψ and ⊢ ¬¬θ ⟹ Γ, φ ⊸ θ ⊢ ψ",
            RuleId::OneRule => "⊢ 𝟙 ∨ ¬𝟙 ⟹ ⊢ ⊥",
            RuleId::P1 => "⊢ r∗φ ↔ rψ",
            RuleId::P2 => "⊢ φ(ψθ) ↔ (φψ)θ",
            RuleId::P3 => "⊢ φψ ↔ ψφ",
            RuleId::P4 => "⊢ θ(φ ⋄ ψ) ↔ θφ ⋄ θψ",
            RuleId::P5 => "⊢ 𝟙φ ↔ φ",
            RuleId::P6 => "⊢ 0φ",
            RuleId::P7Fwd => "⊢ φψ ⟹ ⊢ φ ∨ ψ",
            RuleId::P7Bwd => "⊢ φ ∨ ψ ⟹ ⊢ φψ",
            RuleId::P8 => "φψ ⊢ 𝟙 ⟹ φ⊥ ⊢ ⊥",
            RuleId::P9 => "⊢ (r ⋈ s)φ ↔ rφ ⋄ sφ",
        }
    }

    /// The schema actually checked, where it differs from [`schema_text`](Self::schema_text).
    pub fn implemented_schema(self) -> &'static str {
        match self {
            RuleId::P1 => "⊢ r∗φ ↔ rφ",
            other => other.schema_text(),
        }
    }

    fn metavariables(self) -> &'static [Meta] {
        use Meta::*;
        match self {
            RuleId::Id | RuleId::Bot | RuleId::Wem | RuleId::P5 | RuleId::P6 => &[Phi],
            RuleId::Cut => &[Gamma, Delta, Phi, Psi],
            RuleId::Weak | RuleId::And2 | RuleId::And3 | RuleId::Or2 => &[Gamma, Phi, Psi],
            RuleId::Perm => &[Gamma, Delta, Phi, Psi, Theta],
            RuleId::Top => &[Gamma],
            RuleId::And1
            | RuleId::Or1
            | RuleId::Or3
            | RuleId::Tensor1Fwd
            | RuleId::Tensor1Bwd
            | RuleId::Tensor2Fwd
            | RuleId::Tensor2Bwd
            | RuleId::Lolli1
            | RuleId::Lolli2
            | RuleId::Lolli3 => &[Gamma, Phi, Psi, Theta],
            RuleId::Tot | RuleId::Tensor3 | RuleId::P3 | RuleId::P7Fwd | RuleId::P7Bwd | RuleId::P8 => {
                &[Phi, Psi]
            }
            RuleId::OneRule => &[],
            RuleId::P1 => &[R, Phi],
            RuleId::P2 => &[Phi, Psi, Theta],
            RuleId::P4 => &[Theta, Phi, Psi, Op],
            RuleId::P9 => &[R, S, Phi, Op],
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Meta {
    Phi,
    Psi,
    Theta,
    Gamma,
    Delta,
    R,
    S,
    Op,
}

impl Meta {
    fn name(self) -> &'static str {
        match self {
            Meta::Phi => "phi",
            Meta::Psi => "psi",
            Meta::Theta => "theta",
            Meta::Gamma => "Gamma",
            Meta::Delta => "Delta",
            Meta::R => "r",
            Meta::S => "s",
            Meta::Op => "op",
        }
    }
}

/// The connective of a P4 instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum P4Op {
    And,
    Or,
    Tensor,
    Lolli,
}

impl P4Op {
    pub const ALL: [P4Op; 4] = [P4Op::And, P4Op::Or, P4Op::Tensor, P4Op::Lolli];

    pub fn name(self) -> &'static str {
        match self {
            P4Op::And => "and",
            P4Op::Or => "or",
            P4Op::Tensor => "tensor",
            P4Op::Lolli => "lolli",
        }
    }

    fn apply(self, a: Formula, b: Formula) -> Formula {
        match self {
            P4Op::And => Formula::and(a, b),
            P4Op::Or => Formula::or(a, b),
            P4Op::Tensor => Formula::tensor(a, b),
            P4Op::Lolli => Formula::lolli(a, b),
        }
    }
}

/// The scalar operation of a P9 instance, paired with its connective:
/// `+` with `⊗`, `∸` with reversed `⊸`, `max` with `∧`, `min` with `∨`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum P9Op {
    Plus,
    Monus,
    Max,
    Min,
}

impl P9Op {
    pub const ALL: [P9Op; 4] = [P9Op::Plus, P9Op::Monus, P9Op::Max, P9Op::Min];

    pub fn name(self) -> &'static str {
        match self {
            P9Op::Plus => "plus",
            P9Op::Monus => "monus",
            P9Op::Max => "max",
            P9Op::Min => "min",
        }
    }

    fn connective(self) -> &'static str {
        match self {
            P9Op::Plus => "tensor",
            P9Op::Monus => "lolli-op",
            P9Op::Max => "and",
            P9Op::Min => "or",
        }
    }

    fn scalar(self, r: &Rat, s: &Rat) -> Rat {
        match self {
            P9Op::Plus => r + s,
            P9Op::Monus => (r - s).max(Rat::zero()),
            P9Op::Max => r.max(s).clone(),
            P9Op::Min => r.min(s).clone(),
        }
    }

    fn apply(self, a: Formula, b: Formula) -> Formula {
        match self {
            P9Op::Plus => Formula::tensor(a, b),
            P9Op::Monus => Formula::lolli(b, a),
            P9Op::Max => Formula::and(a, b),
            P9Op::Min => Formula::or(a, b),
        }
    }

    fn parse(text: &str) -> Result<P9Op, RuleError> {
        let (op, conn) = match text.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (text, None),
        };
        let found = P9Op::ALL.into_iter().find(|o| o.name() == op);
        match (found, conn) {
            (Some(o), None) => Ok(o),
            (Some(o), Some(c)) if c == o.connective() => Ok(o),
            _ => Err(RuleError::IllegalParameter(format!(
                "`{text}` is not one of plus:tensor, monus:lolli-op, max:and, min:or"
            ))),
        }
    }
}

/// Explicit bindings for the metavariables of a schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    pub phi: Option<Formula>,
    pub psi: Option<Formula>,
    pub theta: Option<Formula>,
    pub gamma: Option<Vec<Formula>>,
    pub delta: Option<Vec<Formula>>,
    pub r: Option<Rat>,
    pub s: Option<Rat>,
    pub op: Option<String>,
}

impl Subst {
    fn has(&self, m: Meta) -> bool {
        match m {
            Meta::Phi => self.phi.is_some(),
            Meta::Psi => self.psi.is_some(),
            Meta::Theta => self.theta.is_some(),
            Meta::Gamma => self.gamma.is_some(),
            Meta::Delta => self.delta.is_some(),
            Meta::R => self.r.is_some(),
            Meta::S => self.s.is_some(),
            Meta::Op => self.op.is_some(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("missing binding for `{0}`")]
    MissingBinding(&'static str),
    #[error("illegal parameter: {0}")]
    IllegalParameter(String),
}

/// Premises and conclusion of a concrete rule instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub premises: Vec<Judgement>,
    pub conclusion: Judgement,
}

fn ctx(base: &[Formula], extra: &[&Formula]) -> Vec<Formula> {
    base.iter().cloned().chain(extra.iter().map(|f| (*f).clone())).collect()
}

fn thm(f: Formula) -> Judgement {
    Judgement::new(vec![], f)
}

fn times(r: &Rat, f: &Formula) -> Formula {
    Formula::mult(Formula::constant(r.clone()), f.clone())
}

pub fn instantiate_rule(rule: RuleId, subst: &Subst) -> Result<Instance, RuleError> {
    let metas = rule.metavariables();
    for m in [
        Meta::Phi,
        Meta::Psi,
        Meta::Theta,
        Meta::Gamma,
        Meta::Delta,
        Meta::R,
        Meta::S,
        Meta::Op,
    ] {
        match (metas.contains(&m), subst.has(m)) {
            (true, false) => return Err(RuleError::MissingBinding(m.name())),
            (false, true) => {
                return Err(RuleError::IllegalParameter(format!(
                    "`{}` is not a metavariable of {rule}",
                    m.name()
                )))
            }
            _ => {}
        }
    }
    let phi = || subst.phi.clone().expect("checked");
    let psi = || subst.psi.clone().expect("checked");
    let theta = || subst.theta.clone().expect("checked");
    let empty = Vec::new();
    let g = subst.gamma.as_ref().unwrap_or(&empty);
    let d = subst.delta.as_ref().unwrap_or(&empty);
    let j = Judgement::new;
    let (premises, conclusion) = match rule {
        RuleId::Id => (vec![], j(vec![phi()], phi())),
        RuleId::Cut => (
            vec![j(g.clone(), phi()), j(ctx(d, &[&phi()]), psi())],
            j(ctx(g, &d.iter().collect::<Vec<_>>()), psi()),
        ),
        RuleId::Weak => (vec![j(g.clone(), phi())], j(ctx(g, &[&psi()]), phi())),
        RuleId::Perm => {
            let dref: Vec<&Formula> = d.iter().collect();
            let (a, b) = (phi(), psi());
            let mut before = ctx(g, &[&a, &b]);
            before.extend(dref.iter().map(|f| (*f).clone()));
            let mut after = ctx(g, &[&b, &a]);
            after.extend(dref.iter().map(|f| (*f).clone()));
            (vec![j(before, theta())], j(after, theta()))
        }
        RuleId::Top => (vec![], j(g.clone(), Formula::top())),
        RuleId::Bot => (vec![], j(vec![Formula::Bot], phi())),
        RuleId::And1 => (
            vec![j(ctx(g, &[&phi()]), theta())],
            j(ctx(g, &[&Formula::and(phi(), psi())]), theta()),
        ),
        RuleId::And2 => (
            vec![j(g.clone(), phi()), j(g.clone(), psi())],
            j(g.clone(), Formula::and(phi(), psi())),
        ),
        RuleId::And3 => (vec![j(g.clone(), Formula::and(phi(), psi()))], j(g.clone(), psi())),
        RuleId::Or1 => (
            vec![j(ctx(g, &[&phi()]), theta()), j(ctx(g, &[&psi()]), theta())],
            j(ctx(g, &[&Formula::or(phi(), psi())]), theta()),
        ),
        RuleId::Or2 => (vec![j(g.clone(), phi())], j(g.clone(), Formula::or(phi(), psi()))),
        RuleId::Or3 => (
            vec![j(ctx(g, &[&Formula::or(phi(), psi())]), theta())],
            j(ctx(g, &[&psi()]), theta()),
        ),
        RuleId::Wem => (
            vec![],
            thm(Formula::or(
                Formula::neg(phi()),
                Formula::neg(Formula::neg(phi())),
            )),
        ),
        RuleId::Tot => (
            vec![],
            thm(Formula::or(
                Formula::lolli(phi(), psi()),
                Formula::lolli(psi(), phi()),
            )),
        ),
        RuleId::Tensor1Fwd | RuleId::Tensor1Bwd => {
            let split = j(ctx(g, &[&phi(), &psi()]), theta());
            let joined = j(ctx(g, &[&Formula::tensor(phi(), psi())]), theta());
            if rule == RuleId::Tensor1Fwd {
                (vec![split], joined)
            } else {
                (vec![joined], split)
            }
        }
        RuleId::Tensor2Fwd | RuleId::Tensor2Bwd => {
            let joined = j(ctx(g, &[&Formula::tensor(phi(), psi())]), theta());
            let curried = j(ctx(g, &[&phi()]), Formula::lolli(psi(), theta()));
            if rule == RuleId::Tensor2Fwd {
                (vec![joined], curried)
            } else {
                (vec![curried], joined)
            }
        }
        RuleId::Tensor3 => (
            vec![j(
                vec![Formula::tensor(phi(), phi())],
                Formula::tensor(psi(), psi()),
            )],
            j(vec![phi()], psi()),
        ),
        RuleId::Lolli1 => (
            vec![
                j(ctx(g, &[&Formula::lolli(phi(), theta())]), psi()),
                j(vec![theta()], phi()),
            ],
            j(ctx(g, &[&theta()]), Formula::tensor(phi(), psi())),
        ),
        RuleId::Lolli2 | RuleId::Lolli3 => {
            let finite = if rule == RuleId::Lolli2 { phi() } else { theta() };
            (
                vec![
                    j(ctx(g, &[&theta()]), Formula::tensor(phi(), psi())),
                    thm(Formula::neg(Formula::neg(finite))),
                ],
                j(ctx(g, &[&Formula::lolli(phi(), theta())]), psi()),
            )
        }
        RuleId::OneRule => (
            vec![thm(Formula::or(Formula::One, Formula::neg(Formula::One)))],
            thm(Formula::Bot),
        ),
        RuleId::P1 => {
            let r = subst.r.as_ref().expect("checked");
            (
                vec![],
                thm(Formula::iff(Formula::scalar(r.clone(), phi()), times(r, &phi()))),
            )
        }
        RuleId::P2 => (
            vec![],
            thm(Formula::iff(
                Formula::mult(phi(), Formula::mult(psi(), theta())),
                Formula::mult(Formula::mult(phi(), psi()), theta()),
            )),
        ),
        RuleId::P3 => (
            vec![],
            thm(Formula::iff(
                Formula::mult(phi(), psi()),
                Formula::mult(psi(), phi()),
            )),
        ),
        RuleId::P4 => {
            let op = subst.op.as_deref().expect("checked");
            let op = P4Op::ALL
                .into_iter()
                .find(|o| o.name() == op)
                .ok_or_else(|| {
                    RuleError::IllegalParameter(format!("`{op}` is not one of and, or, tensor, lolli"))
                })?;
            (
                vec![],
                thm(Formula::iff(
                    Formula::mult(theta(), op.apply(phi(), psi())),
                    op.apply(Formula::mult(theta(), phi()), Formula::mult(theta(), psi())),
                )),
            )
        }
        RuleId::P5 => (vec![], thm(Formula::iff(Formula::mult(Formula::One, phi()), phi()))),
        RuleId::P6 => (vec![], thm(Formula::mult(Formula::zero(), phi()))),
        RuleId::P7Fwd | RuleId::P7Bwd => {
            let prod = thm(Formula::mult(phi(), psi()));
            let disj = thm(Formula::or(phi(), psi()));
            if rule == RuleId::P7Fwd {
                (vec![prod], disj)
            } else {
                (vec![disj], prod)
            }
        }
        RuleId::P8 => (
            vec![j(vec![Formula::mult(phi(), psi())], Formula::One)],
            j(vec![Formula::mult(phi(), Formula::Bot)], Formula::Bot),
        ),
        RuleId::P9 => {
            let op = P9Op::parse(subst.op.as_deref().expect("checked"))?;
            let r = subst.r.as_ref().expect("checked");
            let s = subst.s.as_ref().expect("checked");
            (
                vec![],
                thm(Formula::iff(
                    times(&op.scalar(r, s), &phi()),
                    op.apply(times(r, &phi()), times(s, &phi())),
                )),
            )
        }
    };
    Ok(Instance {
        premises,
        conclusion,
    })
}

/// `lolli2` without its finiteness side premise. Unsound; used as a
/// control for the auditor.
pub fn instantiate_corrupted_lolli2(subst: &Subst) -> Result<Instance, RuleError> {
    let mut inst = instantiate_rule(RuleId::Lolli2, subst)?;
    inst.premises.truncate(1);
    Ok(inst)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Hypothesis,
    Rule {
        name: String,
        premises: Vec<usize>,
        subst: Subst,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub number: usize,
    pub judgement: Judgement,
    pub justification: Justification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProofScript {
    pub lines: Vec<ProofLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("premise reference {0} does not name an earlier line")]
    BadPremiseRef(usize),
    #[error("conclusion mismatch: the rule yields `{expected}`")]
    ConclusionMismatch { expected: Judgement },
    #[error("premise {index} mismatch: {reason}")]
    PremiseMismatch { index: usize, reason: String },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("missing binding for `{0}`")]
    MissingBinding(&'static str),
    #[error("illegal parameter: {0}")]
    IllegalParameter(String),
    #[error("not among the supplied hypotheses")]
    NotAHypothesis,
}

impl CheckError {
    /// Short class name used in reports.
    pub fn class(&self) -> &'static str {
        match self {
            CheckError::BadPremiseRef(_) => "BadPremiseRef",
            CheckError::ConclusionMismatch { .. } => "ConclusionMismatch",
            CheckError::PremiseMismatch { .. } => "PremiseMismatch",
            CheckError::UnknownRule(_) => "UnknownRule",
            CheckError::MissingBinding(_) => "MissingBinding",
            CheckError::IllegalParameter(_) => "IllegalParameter",
            CheckError::NotAHypothesis => "NotAHypothesis",
        }
    }
}

impl From<RuleError> for CheckError {
    fn from(e: RuleError) -> Self {
        match e {
            RuleError::MissingBinding(m) => CheckError::MissingBinding(m),
            RuleError::IllegalParameter(m) => CheckError::IllegalParameter(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {error}")]
pub struct ProofFailure {
    pub line: usize,
    pub error: CheckError,
}

/// Checks one line against the lines before it.
pub fn check_step(
    line: &ProofLine,
    earlier: &[ProofLine],
    hypotheses: &[Judgement],
) -> Result<(), CheckError> {
    match &line.justification {
        Justification::Hypothesis => {
            if hypotheses.contains(&line.judgement) {
                Ok(())
            } else {
                Err(CheckError::NotAHypothesis)
            }
        }
        Justification::Rule {
            name,
            premises,
            subst,
        } => {
            let rule = RuleId::from_name(name).ok_or_else(|| CheckError::UnknownRule(name.clone()))?;
            let cited: Vec<&Judgement> = premises
                .iter()
                .map(|n| {
                    earlier
                        .iter()
                        .find(|l| l.number == *n)
                        .map(|l| &l.judgement)
                        .ok_or(CheckError::BadPremiseRef(*n))
                })
                .collect::<Result<_, _>>()?;
            let inst = instantiate_rule(rule, subst)?;
            if cited.len() != inst.premises.len() {
                return Err(CheckError::PremiseMismatch {
                    index: cited.len().min(inst.premises.len()) + 1,
                    reason: format!(
                        "{rule} takes {} premises, {} cited",
                        inst.premises.len(),
                        cited.len()
                    ),
                });
            }
            for (i, (want, got)) in inst.premises.iter().zip(cited).enumerate() {
                if want != got {
                    return Err(CheckError::PremiseMismatch {
                        index: i + 1,
                        reason: format!("the rule needs `{want}`, the cited line is `{got}`"),
                    });
                }
            }
            if inst.conclusion != line.judgement {
                return Err(CheckError::ConclusionMismatch {
                    expected: inst.conclusion,
                });
            }
            Ok(())
        }
    }
}

pub fn check_proof(script: &ProofScript, hypotheses: &[Judgement]) -> Result<(), ProofFailure> {
    for (i, line) in script.lines.iter().enumerate() {
        let earlier = &script.lines[..i];
        check_step(line, earlier, hypotheses).map_err(|error| ProofFailure {
            line: line.number,
            error,
        })?;
    }
    Ok(())
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn parse_bindings(text: &str) -> Result<Subst, ParseError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for piece in split_top_level(text) {
        match piece.split_once(":=") {
            Some((k, v)) if !k.trim().is_empty() && k.trim().chars().all(char::is_alphanumeric) => {
                pairs.push((k.trim().to_string(), v.trim().to_string()))
            }
            _ => match pairs.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(piece);
                }
                None => return Err(ParseError::syntax(0, format!("expected `name := value`, found `{}`", piece.trim()))),
            },
        }
    }
    let mut s = Subst::default();
    for (k, v) in pairs {
        let dup = || ParseError::syntax(0, format!("`{k}` bound twice"));
        match k.as_str() {
            "phi" | "psi" | "theta" => {
                let f = parse_formula(&v)?;
                let slot = match k.as_str() {
                    "phi" => &mut s.phi,
                    "psi" => &mut s.psi,
                    _ => &mut s.theta,
                };
                if slot.replace(f).is_some() {
                    return Err(dup());
                }
            }
            "Gamma" | "Delta" => {
                let l = parse_formula_list(&v)?;
                let slot = if k == "Gamma" { &mut s.gamma } else { &mut s.delta };
                if slot.replace(l).is_some() {
                    return Err(dup());
                }
            }
            "r" | "s" => {
                let r = parse_rat(&v)?;
                let slot = if k == "r" { &mut s.r } else { &mut s.s };
                if slot.replace(r).is_some() {
                    return Err(dup());
                }
            }
            "op" => {
                if s.op.replace(v).is_some() {
                    return Err(dup());
                }
            }
            _ => return Err(ParseError::syntax(0, format!("unknown metavariable `{k}`"))),
        }
    }
    Ok(s)
}

fn parse_justification(text: &str) -> Result<Justification, ParseError> {
    let text = text.trim();
    let (head, with) = match text.find(" with ") {
        Some(i) => (&text[..i], Some(&text[i + 6..])),
        None => (text, None),
    };
    let (name, from) = match head.find(" from ") {
        Some(i) => (head[..i].trim(), Some(&head[i + 6..])),
        None => (head.trim(), None),
    };
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(ParseError::syntax(0, format!("expected a rule name, found `{name}`")));
    }
    if name == "hyp" {
        if from.is_some() || with.is_some() {
            return Err(ParseError::syntax(0, "hypothesis lines take no premises or bindings"));
        }
        return Ok(Justification::Hypothesis);
    }
    let premises = match from {
        None => vec![],
        Some(list) => list
            .split(',')
            .map(|n| {
                n.trim()
                    .parse::<usize>()
                    .map_err(|_| ParseError::syntax(0, format!("bad line reference `{}`", n.trim())))
            })
            .collect::<Result<_, _>>()?,
    };
    let subst = match with {
        None => Subst::default(),
        Some(b) => parse_bindings(b)?,
    };
    Ok(Justification::Rule {
        name: name.to_string(),
        premises,
        subst,
    })
}

/// Reads `n: <judgement> ; <rule> [from n1,n2] [with k := v, ...]` lines.
/// Hypotheses use the rule name `hyp`. Line numbers must increase.
pub fn parse_proof(text: &str) -> Result<ProofScript, ParseError> {
    let mut script = ProofScript::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parsed = (|| {
            let (num, rest) = line
                .split_once(':')
                .ok_or_else(|| ParseError::syntax(0, "expected `n:` line number"))?;
            let number: usize = num
                .trim()
                .parse()
                .map_err(|_| ParseError::syntax(0, format!("bad line number `{}`", num.trim())))?;
            let (j, just) = rest
                .split_once(';')
                .ok_or_else(|| ParseError::syntax(0, "expected `;` before the justification"))?;
            Ok(ProofLine {
                number,
                judgement: parse_judgement(j)?,
                justification: parse_justification(just)?,
            })
        })()
        .map_err(|e: ParseError| e.at_line(line_no))?;
        if script.lines.last().is_some_and(|l| l.number >= parsed.number) {
            return Err(ParseError::syntax(0, "line numbers must increase").at_line(line_no));
        }
        script.lines.push(parsed);
    }
    Ok(script)
}

/// A rule with its parameter fixed, or the corrupted control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AuditTarget {
    Rule(RuleId),
    P4(P4Op),
    P9(P9Op),
    CorruptedLolli2,
}

impl AuditTarget {
    pub fn name(&self) -> String {
        match self {
            AuditTarget::Rule(r) => r.name().to_string(),
            AuditTarget::P4(op) => format!("P4[{}]", op.name()),
            AuditTarget::P9(op) => format!("P9[{}:{}]", op.name(), op.connective()),
            AuditTarget::CorruptedLolli2 => "lolli2-without-side-premise".to_string(),
        }
    }
}

/// Every catalog rule, with P4 and P9 expanded per parameter choice.
pub fn audit_targets() -> Vec<AuditTarget> {
    let mut out = Vec::new();
    for r in RuleId::ALL {
        match r {
            RuleId::P4 => out.extend(P4Op::ALL.into_iter().map(AuditTarget::P4)),
            RuleId::P9 => out.extend(P9Op::ALL.into_iter().map(AuditTarget::P9)),
            other => out.push(AuditTarget::Rule(other)),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub instance: Instance,
    pub model: Model,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditEntry {
    pub target: AuditTarget,
    pub instances: usize,
    pub checks: usize,
    /// Checks in which every premise held.
    pub premises_held: usize,
    pub violations: usize,
    /// The first few violations found.
    pub examples: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn total_violations(&self) -> usize {
        self.entries.iter().map(|e| e.violations).sum()
    }
}

const MAX_EXAMPLES: usize = 3;

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{:<28} instances={} checks={} premises_held={} violations={}",
                e.target.name(),
                e.instances,
                e.checks,
                e.premises_held,
                e.violations
            )?;
            for v in &e.examples {
                let premises: Vec<String> = v.instance.premises.iter().map(ToString::to_string).collect();
                writeln!(f, "  premises: [{}]", premises.join("; "))?;
                writeln!(f, "  conclusion: {}", v.instance.conclusion)?;
                let model: Vec<String> = v
                    .model
                    .assignment
                    .iter()
                    .map(|(p, x)| format!("{p}={x}"))
                    .collect();
                writeln!(f, "  model: {}", model.join(", "))?;
            }
        }
        writeln!(f, "total violations: {}", self.total_violations())
    }
}

fn random_subst(rng: &mut impl Rng, cfg: &GenConfig) -> Subst {
    let list = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(0..=2);
        (0..n).map(|_| random_formula(rng, cfg)).collect::<Vec<_>>()
    };
    let mut inner = ChaCha8Rng::seed_from_u64(rng.gen());
    let scalars = default_scalars();
    Subst {
        phi: Some(random_formula(&mut inner, cfg)),
        psi: Some(random_formula(&mut inner, cfg)),
        theta: Some(random_formula(&mut inner, cfg)),
        gamma: Some(list(&mut inner)),
        delta: Some(list(&mut inner)),
        r: Some(scalars[inner.gen_range(0..scalars.len())].clone()),
        s: Some(scalars[inner.gen_range(0..scalars.len())].clone()),
        op: None,
    }
}

/// Keeps only the bindings the rule uses and fixes the parameter.
fn restrict(target: AuditTarget, mut s: Subst) -> (RuleId, Subst) {
    let (rule, op) = match target {
        AuditTarget::Rule(r) => (r, None),
        AuditTarget::P4(op) => (RuleId::P4, Some(op.name().to_string())),
        AuditTarget::P9(op) => (RuleId::P9, Some(op.name().to_string())),
        AuditTarget::CorruptedLolli2 => (RuleId::Lolli2, None),
    };
    let metas = rule.metavariables();
    let keep = |m: Meta| metas.contains(&m);
    if !keep(Meta::Phi) {
        s.phi = None;
    }
    if !keep(Meta::Psi) {
        s.psi = None;
    }
    if !keep(Meta::Theta) {
        s.theta = None;
    }
    if !keep(Meta::Gamma) {
        s.gamma = None;
    }
    if !keep(Meta::Delta) {
        s.delta = None;
    }
    if !keep(Meta::R) {
        s.r = None;
    }
    if !keep(Meta::S) {
        s.s = None;
    }
    s.op = op;
    (rule, s)
}

fn pair_seed(seed: u64, target: usize, instance: usize) -> u64 {
    seed ^ (target as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (instance as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(17)
}

/// Audits one target with `samples` random instances (depth at most 3,
/// letters `p, q, r`, scalars `{0, 1/2, 1, 2, 3}`) and `models` general
/// models per instance. `index` separates the seed streams of targets.
pub fn audit_target(target: AuditTarget, index: usize, samples: usize, models: usize, seed: u64) -> AuditEntry {
    let cfg = GenConfig::polynomial();
    let mut entry = AuditEntry {
        target,
        instances: 0,
        checks: 0,
        premises_held: 0,
        violations: 0,
        examples: Vec::new(),
    };
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(pair_seed(seed, index, i));
        let (rule, subst) = restrict(target, random_subst(&mut rng, &cfg));
        let inst = if target == AuditTarget::CorruptedLolli2 {
            instantiate_corrupted_lolli2(&subst)
        } else {
            instantiate_rule(rule, &subst)
        }
        .expect("generated substitutions bind every metavariable");
        entry.instances += 1;
        let mut letters = Vec::new();
        for j in inst.premises.iter().chain(std::iter::once(&inst.conclusion)) {
            for p in j.letters() {
                if !letters.contains(&p) {
                    letters.push(p);
                }
            }
        }
        for _ in 0..models {
            let m = sample_model_with(&letters, Profile::General, &mut rng);
            entry.checks += 1;
            let holds = |j: &Judgement| satisfies(&m, j).expect("model covers every letter");
            if !inst.premises.iter().all(holds) {
                continue;
            }
            entry.premises_held += 1;
            if !holds(&inst.conclusion) {
                entry.violations += 1;
                if entry.examples.len() < MAX_EXAMPLES {
                    entry.examples.push(Violation {
                        instance: inst.clone(),
                        model: m,
                    });
                }
            }
        }
    }
    entry
}

/// Audits every catalog rule. Targets run on separate threads; results
/// depend only on the arguments.
pub fn audit_rules(samples: usize, models: usize, seed: u64) -> AuditReport {
    let targets = audit_targets();
    let entries = std::thread::scope(|scope| {
        let handles: Vec<_> = targets
            .iter()
            .enumerate()
            .map(|(i, t)| scope.spawn(move || audit_target(*t, i, samples, models, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("audit thread panicked"))
            .collect()
    });
    AuditReport { entries }
}

/// Audits the corrupted `lolli2` control.
pub fn audit_corrupted_lolli2(samples: usize, models: usize, seed: u64) -> AuditEntry {
    audit_target(AuditTarget::CorruptedLolli2, usize::MAX, samples, models, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};
    use crate::semantics::parse_model;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn j(s: &str) -> Judgement {
        parse_judgement(s).unwrap()
    }

    #[test]
    fn catalog_size() {
        assert_eq!(RuleId::ALL.len(), 33);
        assert_eq!(audit_targets().len(), 39);
        for r in RuleId::ALL {
            assert_eq!(RuleId::from_name(r.name()), Some(r));
        }
        assert_eq!(RuleId::P1.schema_text(), "⊢ r∗φ ↔ rψ");
        assert_eq!(RuleId::P1.implemented_schema(), "⊢ r∗φ ↔ rφ");
    }

    #[test]
    fn id_instance() {
        let s = Subst {
            phi: Some(f("p")),
            ..Subst::default()
        };
        let inst = instantiate_rule(RuleId::Id, &s).unwrap();
        assert!(inst.premises.is_empty());
        assert_eq!(inst.conclusion, j("p |- p"));
    }

    #[test]
    fn p9_plus_instance() {
        let s = Subst {
            phi: Some(f("p")),
            r: Some(rat_int(1)),
            s: Some(rat_int(2)),
            op: Some("plus:tensor".into()),
            ..Subst::default()
        };
        let inst = instantiate_rule(RuleId::P9, &s).unwrap();
        assert_eq!(inst.conclusion, j("|- 3 p o-o (1 p (+) 2 p)"));
        let bad = Subst {
            op: Some("plus:and".into()),
            ..s
        };
        assert!(matches!(
            instantiate_rule(RuleId::P9, &bad),
            Err(RuleError::IllegalParameter(_))
        ));
    }

    #[test]
    fn p9_monus_truncates() {
        let s = Subst {
            phi: Some(f("p")),
            r: Some(rat(1, 2)),
            s: Some(rat_int(2)),
            op: Some("monus".into()),
            ..Subst::default()
        };
        let inst = instantiate_rule(RuleId::P9, &s).unwrap();
        assert_eq!(inst.conclusion, j("|- 0 p o-o (2 p -o 1/2 p)"));
    }

    #[test]
    fn one_rule_instance() {
        let inst = instantiate_rule(RuleId::OneRule, &Subst::default()).unwrap();
        assert_eq!(inst.premises, vec![j("|- I \\/ (~I)")]);
        assert_eq!(inst.conclusion, j("|- bot"));
    }

    #[test]
    fn missing_and_extra_bindings() {
        assert_eq!(
            instantiate_rule(RuleId::Id, &Subst::default()),
            Err(RuleError::MissingBinding("phi"))
        );
        let s = Subst {
            phi: Some(f("p")),
            r: Some(rat_int(1)),
            ..Subst::default()
        };
        assert!(matches!(
            instantiate_rule(RuleId::Id, &s),
            Err(RuleError::IllegalParameter(_))
        ));
    }

    #[test]
    fn id_weak_script() {
        let script = parse_proof(
            "1: p |- p ; id with phi := p\n\
             2: p, q |- p ; weak from 1 with Gamma := [p], phi := p, psi := q\n",
        )
        .unwrap();
        assert_eq!(check_proof(&script, &[]), Ok(()));
    }

    #[test]
    fn top_cannot_prove_bot() {
        let script = parse_proof("1: |- bot ; top with Gamma := []").unwrap();
        let err = check_proof(&script, &[]).unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.error.class(), "ConclusionMismatch");
    }

    #[test]
    fn wem_script() {
        let script = parse_proof("1: |- (~p) \\/ (~~p) ; wem with phi := p").unwrap();
        assert_eq!(check_proof(&script, &[]), Ok(()));
    }

    #[test]
    fn checker_errors() {
        let hyps = vec![j("p |- q")];
        let cases = [
            ("1: p |- q ; hyp\n2: p, r |- q ; weak from 3 with Gamma := [p], phi := q, psi := r", "BadPremiseRef"),
            ("1: q |- q ; hyp", "NotAHypothesis"),
            ("1: p |- p ; disjunction_lemma", "UnknownRule"),
            ("1: p |- q ; hyp\n2: p, r |- q ; weak from 1 with Gamma := [r], phi := q, psi := p", "PremiseMismatch"),
            ("1: p |- q ; hyp\n2: p, r |- q ; weak from 1,1 with Gamma := [p], phi := q, psi := r", "PremiseMismatch"),
            ("1: p |- p ; id", "MissingBinding"),
            ("1: |- 2 p o-o 2 p ; P9 with phi := p, r := 1, s := 1, op := plus:or", "IllegalParameter"),
        ];
        for (text, class) in cases {
            let script = parse_proof(text).unwrap();
            let err = check_proof(&script, &hyps).unwrap_err();
            assert_eq!(err.error.class(), class, "{text}");
        }
    }

    #[test]
    fn bindings_with_lists_and_commas() {
        let script = parse_proof(
            "1: a, b, c, d |- e ; hyp\n\
             2: a, c, b, d |- e ; perm from 1 with Gamma := [a], phi := b, psi := c, Delta := [d], theta := e",
        )
        .unwrap();
        assert_eq!(check_proof(&script, &[j("a, b, c, d |- e")]), Ok(()));
        let Justification::Rule { subst, .. } = &script.lines[1].justification else {
            panic!()
        };
        assert_eq!(subst.gamma.as_deref(), Some(&[f("a")][..]));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_proof("p |- p ; id with phi := p").is_err());
        assert!(parse_proof("1: p |- p id").is_err());
        assert!(parse_proof("2: p |- p ; id with phi := p\n1: p |- p ; id with phi := p").is_err());
        assert!(parse_proof("1: p |- p ; id with chi := p").is_err());
    }

    #[test]
    fn sound_rules_in_small_audit() {
        for (i, t) in [
            AuditTarget::Rule(RuleId::Tensor3),
            AuditTarget::Rule(RuleId::P8),
            AuditTarget::Rule(RuleId::Lolli2),
        ]
        .into_iter()
        .enumerate()
        {
            let e = audit_target(t, i, 40, 50, 7);
            assert_eq!(e.violations, 0, "{}", t.name());
            assert_eq!(e.checks, 40 * 50);
        }
    }

    #[test]
    fn corrupted_lolli2_is_caught() {
        let e = audit_corrupted_lolli2(100, 50, 11);
        assert!(e.violations > 0);
        let v = &e.examples[0];
        assert!(v.instance.premises.iter().all(|p| satisfies(&v.model, p).unwrap()));
        assert!(!satisfies(&v.model, &v.instance.conclusion).unwrap());
    }

    #[test]
    fn lolli2_side_premise_matters_on_a_fixed_model() {
        let s = Subst {
            gamma: Some(vec![]),
            phi: Some(f("p")),
            psi: Some(f("I")),
            theta: Some(f("q")),
            ..Subst::default()
        };
        let bad = instantiate_corrupted_lolli2(&s).unwrap();
        let m = parse_model("p = inf\nq = inf").unwrap();
        assert!(satisfies(&m, &bad.premises[0]).unwrap());
        assert!(!satisfies(&m, &bad.conclusion).unwrap());
        let good = instantiate_rule(RuleId::Lolli2, &s).unwrap();
        assert!(!satisfies(&m, &good.premises[1]).unwrap());
    }
}
