//! Seeded random generators for formulas, problems and CNF instances.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::decide::BoolFormula;
use crate::numeric::{rat, rat_int, Rat};
use crate::syntax::{Formula, Judgement, Problem, PropLetter};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: u32,
    pub letters: Vec<PropLetter>,
    pub scalars: Vec<Rat>,
    pub allow_mult: bool,
    pub allow_bot: bool,
    pub allow_lolli: bool,
}

/// Scalars `{0, 1/2, 1, 2, 3}`.
pub fn default_scalars() -> Vec<Rat> {
    vec![rat_int(0), rat(1, 2), rat_int(1), rat_int(2), rat_int(3)]
}

pub fn letters(names: &[&str]) -> Vec<PropLetter> {
    names.iter().map(|n| PropLetter::user(n)).collect()
}

impl GenConfig {
    /// Depth 3 over `p, q, r` with the default scalars and every connective.
    pub fn polynomial() -> Self {
        GenConfig {
            max_depth: 3,
            letters: letters(&["p", "q", "r"]),
            scalars: default_scalars(),
            allow_mult: true,
            allow_bot: true,
            allow_lolli: true,
        }
    }

    pub fn affine() -> Self {
        GenConfig {
            allow_mult: false,
            ..GenConfig::polynomial()
        }
    }
}

fn leaf(rng: &mut impl Rng, cfg: &GenConfig) -> Formula {
    let k = rng.gen_range(0..10);
    match k {
        0 if cfg.allow_bot => Formula::Bot,
        1 => Formula::One,
        2 => Formula::constant(cfg.scalars.choose(rng).expect("scalars").clone()),
        _ => Formula::letter(cfg.letters.choose(rng).expect("letters").clone()),
    }
}

pub fn random_formula(rng: &mut impl Rng, cfg: &GenConfig) -> Formula {
    formula_at(rng, cfg, cfg.max_depth)
}

fn formula_at(rng: &mut impl Rng, cfg: &GenConfig, depth: u32) -> Formula {
    if depth == 0 || rng.gen_range(0..4) == 0 {
        return leaf(rng, cfg);
    }
    loop {
        match rng.gen_range(0..4) {
            0 => {
                let r = cfg.scalars.choose(rng).expect("scalars").clone();
                return Formula::scalar(r, formula_at(rng, cfg, depth - 1));
            }
            1 => {
                let a = formula_at(rng, cfg, depth - 1);
                return Formula::tensor(a, formula_at(rng, cfg, depth - 1));
            }
            2 if cfg.allow_lolli => {
                let a = formula_at(rng, cfg, depth - 1);
                return Formula::lolli(a, formula_at(rng, cfg, depth - 1));
            }
            3 if cfg.allow_mult => {
                let a = formula_at(rng, cfg, depth - 1);
                return Formula::mult(a, formula_at(rng, cfg, depth - 1));
            }
            _ => {}
        }
    }
}

/// A formula in canonical form: `bot`, or a bot-free formula with only
/// nonzero scalars. Constants `r` count as leaves for the depth bound.
pub fn random_cf(rng: &mut impl Rng, cfg: &GenConfig) -> Formula {
    if cfg.allow_bot && rng.gen_range(0..20) == 0 {
        return Formula::Bot;
    }
    pcf_at(rng, cfg, cfg.max_depth)
}

fn pcf_leaf(rng: &mut impl Rng, cfg: &GenConfig) -> Formula {
    let p = Formula::letter(cfg.letters.choose(rng).expect("letters").clone());
    let positive: Vec<&Rat> = cfg.scalars.iter().filter(|r| !r.is_zero()).collect();
    match rng.gen_range(0..4) {
        0 => Formula::One,
        1 => match positive.choose(rng) {
            Some(r) if **r != rat_int(1) => Formula::scalar((*r).clone(), p),
            _ => p,
        },
        2 => match positive.choose(rng) {
            Some(r) if **r != rat_int(1) => Formula::constant((*r).clone()),
            _ => Formula::One,
        },
        _ => p,
    }
}

fn pcf_at(rng: &mut impl Rng, cfg: &GenConfig, depth: u32) -> Formula {
    if depth == 0 || rng.gen_range(0..4) == 0 {
        return pcf_leaf(rng, cfg);
    }
    loop {
        match rng.gen_range(0..4) {
            0 => {
                let a = pcf_at(rng, cfg, depth - 1);
                return Formula::tensor(a, pcf_at(rng, cfg, depth - 1));
            }
            3 => {
                if let Some(r) = cfg.scalars.iter().filter(|r| !r.is_zero()).collect::<Vec<_>>().choose(rng) {
                    return Formula::scalar((*r).clone(), pcf_at(rng, cfg, depth - 1));
                }
            }
            1 if cfg.allow_lolli => {
                let a = pcf_at(rng, cfg, depth - 1);
                return Formula::lolli(a, pcf_at(rng, cfg, depth - 1));
            }
            2 if cfg.allow_mult => {
                let a = pcf_at(rng, cfg, depth - 1);
                return Formula::mult(a, pcf_at(rng, cfg, depth - 1));
            }
            _ => {}
        }
    }
}

/// A judgement with at most one antecedent.
pub fn random_judgement(rng: &mut impl Rng, cfg: &GenConfig) -> Judgement {
    let lhs = rng.gen_bool(0.75).then(|| random_formula(rng, cfg));
    Judgement::single(lhs, random_formula(rng, cfg))
}

/// A satisfiability problem with 1 to `max_hyps` hypotheses.
pub fn random_sat_problem(rng: &mut impl Rng, cfg: &GenConfig, max_hyps: usize) -> Problem {
    let n = rng.gen_range(1..=max_hyps.max(1));
    Problem::sat((0..n).map(|_| random_judgement(rng, cfg)).collect())
}

pub fn random_entails_problem(rng: &mut impl Rng, cfg: &GenConfig, max_hyps: usize) -> Problem {
    let n = rng.gen_range(0..=max_hyps);
    let hyps = (0..n).map(|_| random_judgement(rng, cfg)).collect();
    Problem::entails(hyps, random_judgement(rng, cfg))
}

/// Clauses of three distinct variables `x0..x{vars-1}` with random signs.
pub fn random_3cnf(rng: &mut impl Rng, vars: usize, clauses: usize) -> Vec<Vec<(String, bool)>> {
    assert!(vars >= 3, "3-CNF needs at least three variables");
    let names: Vec<String> = (0..vars).map(|i| format!("x{i}")).collect();
    (0..clauses)
        .map(|_| {
            names
                .choose_multiple(rng, 3)
                .map(|n| (n.clone(), rng.gen_bool(0.5)))
                .collect()
        })
        .collect()
}

/// Brute-force truth-table satisfiability of a CNF.
pub fn cnf_satisfiable(cnf: &[Vec<(String, bool)>]) -> bool {
    let mut names: Vec<&str> = cnf.iter().flatten().map(|(n, _)| n.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let f = BoolFormula::cnf(cnf);
    (0u64..1 << names.len()).any(|bits| {
        f.eval(&|v| {
            let i = names.iter().position(|n| *n == v).expect("variable of the CNF");
            bits >> i & 1 == 1
        })
    })
}
