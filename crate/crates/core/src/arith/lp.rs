//! Exact two-phase simplex over the rationals with Bland's rule.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::numeric::{fmt_rat, Rat};
use crate::syntax::PropLetter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Ge,
    Gt,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Ge => ">=",
            Rel::Gt => ">",
        })
    }
}

/// `coeffs . x + constant (>= | >) 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinRow {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
    pub rel: Rel,
}

impl LinRow {
    pub fn new(coeffs: Vec<Rat>, constant: Rat, rel: Rel) -> Self {
        LinRow {
            coeffs,
            constant,
            rel,
        }
    }

    pub fn value(&self, x: &[Rat]) -> Rat {
        self.coeffs
            .iter()
            .zip(x)
            .fold(self.constant.clone(), |acc, (c, v)| acc + c * v)
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        let v = self.value(x);
        match self.rel {
            Rel::Ge => !v.is_negative(),
            Rel::Gt => v.is_positive(),
        }
    }
}

/// Linear rows over nonnegative variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinSystem {
    pub vars: Vec<PropLetter>,
    pub rows: Vec<LinRow>,
}

impl LinSystem {
    pub fn new(vars: Vec<PropLetter>) -> Self {
        LinSystem {
            vars,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: LinRow) {
        assert_eq!(row.coeffs.len(), self.vars.len(), "row arity");
        self.rows.push(row);
    }

    /// Every row holds and every coordinate is nonnegative.
    pub fn holds(&self, x: &[Rat]) -> bool {
        x.len() == self.vars.len()
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|r| r.holds(x))
    }
}

impl fmt::Display for LinSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let mut first = true;
            for (c, v) in r.coeffs.iter().zip(&self.vars) {
                if c.is_zero() {
                    continue;
                }
                if !first {
                    f.write_str(" + ")?;
                }
                write!(f, "{}*{v}", fmt_rat(c))?;
                first = false;
            }
            if first {
                write!(f, "{}", fmt_rat(&r.constant))?;
            } else if !r.constant.is_zero() {
                write!(f, " + {}", fmt_rat(&r.constant))?;
            }
            writeln!(f, " {} 0", r.rel)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinResult {
    Feasible(Vec<Rat>),
    Infeasible,
}

impl LinResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LinResult::Feasible(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LpStats {
    pub pivots: usize,
    pub rows: usize,
    pub columns: usize,
}

pub fn lin_feasible(sys: &LinSystem) -> LinResult {
    lin_feasible_stats(sys).0
}

/// Decides feasibility. Strict rows are relaxed by a shared slack `t` with
/// `0 <= t <= 1`, which is then maximised; the system is strictly feasible
/// iff the optimum is positive.
pub fn lin_feasible_stats(sys: &LinSystem) -> (LinResult, LpStats) {
    let n = sys.vars.len();
    let strict = sys.rows.iter().any(|r| r.rel == Rel::Gt);
    let nx = n + usize::from(strict);
    let t = n;

    // Each constraint as `a . y <= b`.
    let mut cons: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for r in &sys.rows {
        let mut a: Vec<Rat> = r.coeffs.iter().map(|c| -c).collect();
        if strict {
            a.push(if r.rel == Rel::Gt { Rat::one() } else { Rat::zero() });
        }
        cons.push((a, r.constant.clone()));
    }
    if strict {
        let mut a = vec![Rat::zero(); nx];
        a[t] = Rat::one();
        cons.push((a, Rat::one()));
    }

    let mut objective = vec![Rat::zero(); nx];
    if strict {
        objective[t] = Rat::one();
    }
    let mut tab = Tableau::new(&cons, nx);
    let mut stats = LpStats {
        pivots: 0,
        rows: tab.rows.len(),
        columns: tab.width - 1,
    };
    let feasible = tab.phase_one(&mut stats.pivots);
    if !feasible {
        return (LinResult::Infeasible, stats);
    }
    if strict {
        tab.maximize(&objective, &mut stats.pivots);
        let y = tab.solution(nx);
        if !y[t].is_positive() {
            return (LinResult::Infeasible, stats);
        }
        let x = y[..n].to_vec();
        debug_assert!(sys.holds(&x));
        (LinResult::Feasible(x), stats)
    } else {
        let x = tab.solution(n);
        debug_assert!(sys.holds(&x));
        (LinResult::Feasible(x), stats)
    }
}

/// Dense tableau for `A y + s = b`, `y, s >= 0`, with artificial columns
/// for rows whose right-hand side is negative.
struct Tableau {
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    width: usize,
    artificial_from: usize,
}

impl Tableau {
    fn new(cons: &[(Vec<Rat>, Rat)], nx: usize) -> Self {
        let m = cons.len();
        let needs: Vec<bool> = cons.iter().map(|(_, b)| b.is_negative()).collect();
        let n_art = needs.iter().filter(|x| **x).count();
        let artificial_from = nx + m;
        let width = nx + m + n_art + 1;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = artificial_from;
        for (i, (a, b)) in cons.iter().enumerate() {
            let mut row = vec![Rat::zero(); width];
            row[..nx].clone_from_slice(a);
            row[nx + i] = Rat::one();
            row[width - 1] = b.clone();
            if needs[i] {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
                row[next_art] = Rat::one();
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(nx + i);
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            width,
            artificial_from,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for a cost vector over all columns.
    fn reduced(&self, cost: &[Rat]) -> Vec<Rat> {
        let mut red: Vec<Rat> = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row.iter().enumerate().take(self.width - 1) {
                red[j] -= cb * v;
            }
        }
        red
    }

    /// Bland's rule maximisation over the columns `< limit`. Returns false
    /// when unbounded.
    fn run(&mut self, cost: &[Rat], limit: usize, pivots: &mut usize) -> bool {
        loop {
            let red = self.reduced(cost);
            let entering = (0..limit).find(|&j| red[j].is_positive() && !self.basis.contains(&j));
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.width - 1] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c);
            *pivots += 1;
        }
    }

    /// Minimises the sum of artificial variables, then drives any remaining
    /// artificial basics out of the basis.
    fn phase_one(&mut self, pivots: &mut usize) -> bool {
        let total = self.width - 1;
        if self.artificial_from == total {
            return true;
        }
        let mut cost = vec![Rat::zero(); total];
        for c in cost.iter_mut().skip(self.artificial_from) {
            *c = -Rat::one();
        }
        let bounded = self.run(&cost, total, pivots);
        debug_assert!(bounded);
        let infeasible = self
            .rows
            .iter()
            .zip(&self.basis)
            .any(|(row, &b)| b >= self.artificial_from && row[total].is_positive());
        if infeasible {
            return false;
        }
        for i in 0..self.rows.len() {
            if self.basis[i] < self.artificial_from {
                continue;
            }
            if let Some(c) = (0..self.artificial_from).find(|&j| !self.rows[i][j].is_zero()) {
                self.pivot(i, c);
                *pivots += 1;
            }
        }
        // zero out artificial columns so they never re-enter
        for row in self.rows.iter_mut() {
            for v in row.iter_mut().take(total).skip(self.artificial_from) {
                *v = Rat::zero();
            }
        }
        true
    }

    fn maximize(&mut self, objective: &[Rat], pivots: &mut usize) -> bool {
        let mut cost = vec![Rat::zero(); self.width - 1];
        cost[..objective.len()].clone_from_slice(objective);
        let limit = self.artificial_from;
        self.run(&cost, limit, pivots)
    }

    fn solution(&self, n: usize) -> Vec<Rat> {
        let mut y = vec![Rat::zero(); n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < n {
                y[b] = row[self.width - 1].clone();
            }
        }
        y
    }
}

/// `C(n + k, k)`, the bound on the number of bases visited.
pub fn basis_bound(rows: usize, columns: usize) -> u128 {
    let (n, k) = (rows + columns, columns.min(rows));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};

    fn sys(n: usize, rows: &[(&[i64], i64, Rel)]) -> LinSystem {
        let vars = (0..n).map(|i| PropLetter::user(&format!("x{i}"))).collect();
        let mut s = LinSystem::new(vars);
        for (c, k, rel) in rows {
            s.push(LinRow::new(c.iter().map(|v| rat_int(*v)).collect(), rat_int(*k), *rel));
        }
        s
    }

    #[test]
    fn strict_incompleteness_instance() {
        let s = sys(2, &[(&[2, -1], 0, Rel::Ge), (&[-1, 1], 0, Rel::Gt)]);
        match lin_feasible(&s) {
            LinResult::Feasible(x) => assert!(s.holds(&x), "{x:?}"),
            LinResult::Infeasible => panic!("expected feasible"),
        }
        assert!(s.holds(&[rat(1, 2), rat_int(1)]));
    }

    #[test]
    fn infeasible_examples() {
        let s = sys(1, &[(&[1], -1, Rel::Ge), (&[-1], 0, Rel::Ge)]);
        assert_eq!(lin_feasible(&s), LinResult::Infeasible);
        let s = sys(2, &[(&[1, -1], 0, Rel::Ge), (&[-1, 1], 0, Rel::Gt)]);
        assert_eq!(lin_feasible(&s), LinResult::Infeasible);
    }

    #[test]
    fn empty_and_trivial() {
        assert_eq!(lin_feasible(&sys(0, &[])), LinResult::Feasible(vec![]));
        assert_eq!(lin_feasible(&sys(0, &[(&[], -1, Rel::Ge)])), LinResult::Infeasible);
        assert_eq!(lin_feasible(&sys(0, &[(&[], 0, Rel::Gt)])), LinResult::Infeasible);
        assert!(lin_feasible(&sys(0, &[(&[], 1, Rel::Gt)])).is_feasible());
    }

    #[test]
    fn unbounded_direction_is_fine() {
        let s = sys(2, &[(&[1, -1], -3, Rel::Gt)]);
        match lin_feasible(&s) {
            LinResult::Feasible(x) => assert!(s.holds(&x)),
            LinResult::Infeasible => panic!(),
        }
    }

    #[test]
    fn bound() {
        assert_eq!(basis_bound(2, 2), 6);
        assert_eq!(basis_bound(5, 3), 56);
    }
}
