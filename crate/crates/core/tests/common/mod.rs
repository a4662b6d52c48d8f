//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use num_traits::{One, Signed, Zero};
use plq_core::arith::{LinRow, LinSystem, Rel};
use plq_core::numeric::{rat_int, Rat};
use plq_core::syntax::PropLetter;
use rand::Rng;

/// Solves a square system by Gauss-Jordan elimination; `None` if singular.
fn solve(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rat::one() / a[col][col].clone();
        for k in col..n {
            a[col][k] = &a[col][k] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for k in col..n {
                    let delta = &factor * &a[col][k];
                    a[r][k] -= delta;
                }
                let delta = &factor * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some(b)
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Feasibility by vertex enumeration. Strict rows get a shared slack `t`
/// in `[0, 1]`; the system is strictly feasible iff the largest `t` over
/// all vertices of the relaxed polyhedron is positive.
pub fn vertex_oracle(sys: &LinSystem) -> bool {
    let n = sys.vars.len();
    let d = n + 1;
    let mut cons: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for r in &sys.rows {
        let mut a = r.coeffs.clone();
        a.push(if r.rel == Rel::Gt { -Rat::one() } else { Rat::zero() });
        cons.push((a, r.constant.clone()));
    }
    for i in 0..d {
        let mut a = vec![Rat::zero(); d];
        a[i] = Rat::one();
        cons.push((a, Rat::zero()));
    }
    let mut cap = vec![Rat::zero(); d];
    cap[n] = -Rat::one();
    cons.push((cap, Rat::one()));
    let strict = sys.rows.iter().any(|r| r.rel == Rel::Gt);
    let mut idx = Vec::new();
    subsets(cons.len(), d, 0, &mut Vec::new(), &mut idx);
    let mut best: Option<Rat> = None;
    for s in idx {
        let a: Vec<Vec<Rat>> = s.iter().map(|&i| cons[i].0.clone()).collect();
        let b: Vec<Rat> = s.iter().map(|&i| -cons[i].1.clone()).collect();
        let Some(z) = solve(a, b) else { continue };
        let ok = cons.iter().all(|(a, c)| {
            let v = a.iter().zip(&z).fold(c.clone(), |acc, (x, y)| acc + x * y);
            !v.is_negative()
        });
        if ok && best.as_ref().is_none_or(|t| z[n] > *t) {
            best = Some(z[n].clone());
        }
    }
    match best {
        None => false,
        Some(t) => !strict || t.is_positive(),
    }
}

/// A random system with at most 3 variables and 5 rows, integer
/// coefficients in `-3..=3`.
pub fn random_lin_system(rng: &mut impl Rng) -> LinSystem {
    let n = rng.gen_range(1..=3);
    let vars = (0..n).map(|i| PropLetter::user(&format!("x{i}"))).collect();
    let mut sys = LinSystem::new(vars);
    for _ in 0..rng.gen_range(1..=5) {
        let coeffs = (0..n).map(|_| rat_int(rng.gen_range(-3..=3))).collect();
        let rel = if rng.gen_bool(0.3) { Rel::Gt } else { Rel::Ge };
        sys.push(LinRow::new(coeffs, rat_int(rng.gen_range(-3..=3)), rel));
    }
    sys
}
