//! Polynomial inequality systems: bounded witness search and SMT-LIB output.

use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lp::Rel;
use crate::numeric::{rat, Rat};
use crate::poly::Poly;
use crate::syntax::PropLetter;

/// Constraints `p >= 0` or `p > 0` over nonnegative variables, some of
/// which are additionally required to be strictly positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySystem {
    pub vars: Vec<PropLetter>,
    pub constraints: Vec<(Poly, Rel)>,
    pub positive: Vec<bool>,
}

impl PolySystem {
    pub fn new(vars: Vec<PropLetter>) -> Self {
        let positive = vec![false; vars.len()];
        PolySystem {
            vars,
            constraints: Vec::new(),
            positive,
        }
    }

    pub fn push(&mut self, p: Poly, rel: Rel) {
        assert_eq!(p.vars(), &self.vars[..], "constraint variable order");
        self.constraints.push((p, rel));
    }

    pub fn mark_positive(&mut self, p: &PropLetter) {
        if let Some(i) = self.vars.iter().position(|v| v == p) {
            self.positive[i] = true;
        }
    }

    /// Exact check of a candidate point.
    pub fn holds(&self, x: &[Rat]) -> bool {
        if x.len() != self.vars.len() {
            return false;
        }
        let signs_ok = x.iter().zip(&self.positive).all(|(v, &pos)| {
            if pos {
                v.is_positive()
            } else {
                !v.is_negative()
            }
        });
        signs_ok
            && self.constraints.iter().all(|(p, rel)| {
                let v = p.eval(x).expect("arity checked");
                match rel {
                    Rel::Ge => !v.is_negative(),
                    Rel::Gt => v.is_positive(),
                }
            })
    }

    pub fn is_affine(&self) -> bool {
        self.constraints.iter().all(|(p, _)| p.degree() <= 1)
    }
}

/// Search limits for [`poly_feasible`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest grid denominator.
    pub max_den: u32,
    /// Largest grid magnitude.
    pub max_mag: u32,
    /// Exhaustive grid enumeration only when the grid has at most this
    /// many points.
    pub grid_limit: usize,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_den: 3,
            max_mag: 4,
            grid_limit: 50_000,
            random_samples: 2_000,
            seed: 0,
        }
    }
}

impl Budget {
    /// Scales the search effort by a single user-facing number.
    pub fn with_level(level: u32, seed: u64) -> Self {
        let level = level.max(1);
        Budget {
            max_den: 1 + level,
            max_mag: 2 * level,
            grid_limit: 10_000 * level as usize,
            random_samples: 1_000 * level as usize,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyResult {
    Sat(Vec<Rat>),
    Unknown,
}

/// Grid values `a/b` with `b <= max_den` and `a/b <= max_mag`, by
/// denominator then numerator.
pub fn grid_values(budget: &Budget, positive: bool) -> Vec<Rat> {
    let mut out = Vec::new();
    for b in 1..=budget.max_den.max(1) {
        let top = budget.max_mag as u64 * b as u64;
        for a in 0..=top {
            if positive && a == 0 {
                continue;
            }
            if a.gcd(&(b as u64)) != 1 {
                continue;
            }
            out.push(rat(a as i64, b as i64));
        }
    }
    out
}

/// Sound, incomplete witness search. `Sat` witnesses always satisfy the
/// system exactly.
pub fn poly_feasible(sys: &PolySystem, budget: &Budget) -> PolyResult {
    let n = sys.vars.len();
    let result = search(sys, budget, n);
    if let PolyResult::Sat(x) = &result {
        assert!(sys.holds(x), "unverified witness");
    }
    result
}

fn search(sys: &PolySystem, budget: &Budget, n: usize) -> PolyResult {
    if n == 0 {
        return if sys.holds(&[]) {
            PolyResult::Sat(Vec::new())
        } else {
            PolyResult::Unknown
        };
    }
    let values: Vec<Vec<Rat>> = sys
        .positive
        .iter()
        .map(|&pos| grid_values(budget, pos))
        .collect();
    let size = values
        .iter()
        .try_fold(1usize, |acc, v| acc.checked_mul(v.len()));
    if let Some(size) = size.filter(|s| *s <= budget.grid_limit) {
        let mut digits = vec![0usize; n];
        for _ in 0..size {
            let x: Vec<Rat> = digits.iter().zip(&values).map(|(&d, v)| v[d].clone()).collect();
            if sys.holds(&x) {
                return PolyResult::Sat(x);
            }
            for (d, v) in digits.iter_mut().zip(&values) {
                *d += 1;
                if *d < v.len() {
                    break;
                }
                *d = 0;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let max_den = 2 * budget.max_den.max(1) as i64;
    let max_mag = 2 * budget.max_mag.max(1) as i64;
    for _ in 0..budget.random_samples {
        let x: Vec<Rat> = sys
            .positive
            .iter()
            .map(|&pos| {
                if !pos && rng.gen_range(0..8) == 0 {
                    return Rat::zero();
                }
                let d = rng.gen_range(1..=max_den);
                let a = rng.gen_range(1..=max_mag * d);
                rat(a, d)
            })
            .collect();
        if sys.holds(&x) {
            return PolyResult::Sat(x);
        }
    }
    PolyResult::Unknown
}

const RESERVED: &[&str] = &[
    "_", "!", "as", "let", "exists", "forall", "match", "par", "assert", "check-sat",
    "declare-fun", "declare-const", "define-fun", "set-logic", "set-option", "push", "pop",
    "exit", "and", "or", "not", "xor", "ite", "true", "false", "distinct", "abs", "div", "mod",
    "to_real", "to_int", "is_int", "Real", "Int", "Bool", "NUMERAL", "DECIMAL", "STRING",
];

pub fn smt_symbol(p: &PropLetter) -> String {
    let name = p.to_string();
    if name.starts_with('_') || RESERVED.contains(&name.as_str()) {
        format!("|{name}|")
    } else {
        name
    }
}

fn smt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("(/ {} {})", r.numer(), r.denom())
    }
}

/// SMT-LIB rendering of a polynomial term by term.
pub fn smt_poly(p: &Poly) -> String {
    let names: Vec<String> = p.vars().iter().map(smt_symbol).collect();
    let terms: Vec<String> = p
        .ordered_terms()
        .into_iter()
        .map(|(e, c)| {
            let abs = c.abs();
            let mut factors = Vec::new();
            if !abs.is_one() || e.iter().all(|k| *k == 0) {
                factors.push(smt_rat(&abs));
            }
            for (j, k) in e.iter().enumerate() {
                for _ in 0..*k {
                    factors.push(names[j].clone());
                }
            }
            let body = if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                format!("(* {})", factors.join(" "))
            };
            if c.is_negative() {
                format!("(- {body})")
            } else {
                body
            }
        })
        .collect();
    match terms.len() {
        0 => "0".to_string(),
        1 => terms.into_iter().next().unwrap(),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

/// SMT-LIB 2 text in the logic QF_NRA.
pub fn emit_etr(sys: &PolySystem) -> String {
    let mut out = String::new();
    out.push_str("(set-logic QF_NRA)\n");
    for v in &sys.vars {
        writeln!(out, "(declare-fun {} () Real)", smt_symbol(v)).unwrap();
    }
    for (v, &pos) in sys.vars.iter().zip(&sys.positive) {
        writeln!(out, "(assert (>= {} 0))", smt_symbol(v)).unwrap();
        if pos {
            writeln!(out, "(assert (> {} 0))", smt_symbol(v)).unwrap();
        }
    }
    for (p, rel) in &sys.constraints {
        writeln!(out, "(assert ({rel} {} 0))", smt_poly(p)).unwrap();
    }
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_int;
    use crate::poly::parse_poly;

    fn system(vars: &[&str], cons: &[(&str, Rel)]) -> PolySystem {
        let vars: Vec<PropLetter> = vars.iter().map(|v| PropLetter::user(v)).collect();
        let mut s = PolySystem::new(vars.clone());
        for (text, rel) in cons {
            s.push(parse_poly(text, &vars).unwrap(), *rel);
        }
        s
    }

    #[test]
    fn witness_examples() {
        let s = system(&["x", "y"], &[("x*y^2 - 1", Rel::Ge), ("1 - x", Rel::Ge)]);
        assert_eq!(
            poly_feasible(&s, &Budget::default()),
            PolyResult::Sat(vec![rat_int(1), rat_int(1)])
        );
        let s = system(&["x"], &[("x^2 - 2", Rel::Ge)]);
        assert_eq!(poly_feasible(&s, &Budget::default()), PolyResult::Sat(vec![rat_int(2)]));
        let s = system(&["x"], &[("x^2 - 2", Rel::Ge), ("1 - x", Rel::Ge)]);
        assert_eq!(poly_feasible(&s, &Budget::default()), PolyResult::Unknown);
    }

    #[test]
    fn positivity_marks() {
        let mut s = system(&["x"], &[("1 - x", Rel::Ge)]);
        s.mark_positive(&PropLetter::user("x"));
        assert!(!s.holds(&[rat_int(0)]));
        match poly_feasible(&s, &Budget::default()) {
            PolyResult::Sat(x) => assert!(x[0].is_positive()),
            PolyResult::Unknown => panic!(),
        }
    }

    #[test]
    fn grid_order() {
        let b = Budget {
            max_den: 2,
            max_mag: 1,
            ..Budget::default()
        };
        let v: Vec<String> = grid_values(&b, false).iter().map(|r| r.to_string()).collect();
        assert_eq!(v, ["0", "1", "1/2"]);
        assert_eq!(grid_values(&b, true).len(), 2);
    }

    #[test]
    fn smt_rendering() {
        let s = system(&["x"], &[("x^2 - 2", Rel::Ge)]);
        assert!(emit_etr(&s).contains("(assert (>= (+ (* x x) (- 2)) 0))"));
        let mut s = system(&["x"], &[]);
        s.mark_positive(&PropLetter::user("x"));
        assert!(emit_etr(&s).contains("(assert (> x 0))"));
        let vars = vec![PropLetter::user("x"), PropLetter::Fresh(2)];
        let p = parse_poly("1/2*x*_2^2 - 3*x + 1", &vars).unwrap();
        assert_eq!(smt_poly(&p), "(+ (* (/ 1 2) x |_2| |_2|) (- (* 3 x)) 1)");
        assert_eq!(emit_etr(&s), emit_etr(&s.clone()));
    }
}
