//! Dense two-phase simplex over exact rationals, for the small LPs of the
//! image-set relaxation.
//!
//! Solves `max c.x  s.t.  A x <= b,  x >= 0`. Bland's rule keeps it from
//! cycling; sizes here are a few dozen rows at most.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    /// Objective coefficients (maximized).
    pub objective: Vec<Rational>,
    /// Rows `(a, b)` meaning `a . x <= b`.
    pub rows: Vec<(Vec<Rational>, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        assert_eq!(coeffs.len(), self.objective.len(), "row width");
        self.rows.push((coeffs, rhs));
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::solve(self)
    }
}

struct Tableau {
    /// Each row is `[coeffs.., rhs]`.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs followed by `-z`.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn solve(lp: &LinearProgram) -> LpOutcome {
        let n = lp.objective.len();
        let m = lp.rows.len();
        // Columns: originals, slacks, one artificial.
        let art = n + m;
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (i, (a, b)) in lp.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            row[..n].copy_from_slice(a);
            row[n + i] = Rational::one();
            row[art] = -Rational::one();
            row[width] = *b;
            rows.push(row);
        }
        let mut t = Tableau {
            rows,
            obj: vec![Rational::zero(); width + 1],
            basis: (n..n + m).collect(),
            width,
        };

        let most_negative = (0..m)
            .filter(|&i| t.rows[i][width].is_negative())
            .min_by(|&i, &j| t.rows[i][width].cmp(&t.rows[j][width]).then(i.cmp(&j)));
        if let Some(r) = most_negative {
            // Phase one: maximize -x_art from the feasible dictionary that
            // pivoting x_art into the most violated row produces.
            t.obj[art] = -Rational::one();
            t.pivot(r, art);
            match t.run(|_| true) {
                Step::Optimal => {}
                Step::Unbounded => unreachable!("phase one is bounded by zero"),
            }
            if t.obj[width].is_positive() {
                return LpOutcome::Infeasible;
            }
            if let Some(r) = t.basis.iter().position(|&b| b == art) {
                match (0..art).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(j) => t.pivot(r, j),
                    None => {
                        // Redundant row; leaving it with the artificial in the
                        // basis at level zero is harmless once the column is barred.
                    }
                }
            }
        }

        // Phase two: price the real objective against the current basis.
        t.obj = vec![Rational::zero(); width + 1];
        t.obj[..n].copy_from_slice(&lp.objective);
        for (r, &b) in t.basis.clone().iter().enumerate() {
            let cb = if b < n { lp.objective[b] } else { Rational::zero() };
            if cb.is_zero() {
                continue;
            }
            for j in 0..=width {
                let delta = cb * t.rows[r][j];
                t.obj[j] -= delta;
            }
        }
        match t.run(|j| j != art) {
            Step::Unbounded => LpOutcome::Unbounded,
            Step::Optimal => {
                let mut x = vec![Rational::zero(); n];
                for (r, &b) in t.basis.iter().enumerate() {
                    if b < n {
                        x[b] = t.rows[r][width];
                    }
                }
                let value = -t.obj[width];
                LpOutcome::Optimal { value, x }
            }
        }
    }

    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Step {
        loop {
            // Bland: lowest-index improving column, lowest-index leaving
            // variable among ratio ties.
            let Some(s) = (0..self.width).find(|&j| allowed(j) && self.obj[j].is_positive()) else {
                return Step::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[s].is_positive() {
                    continue;
                }
                let ratio = row[self.width] / row[s];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Step::Unbounded,
                Some((r, _)) => self.pivot(r, s),
            }
        }
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let piv = self.rows[r][s];
        debug_assert!(!piv.is_zero());
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[s].is_zero() {
                continue;
            }
            let f = row[s];
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= f * p;
                }
            }
        }
        let f = self.obj[s];
        if !f.is_zero() {
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= f * p;
                }
            }
        }
        self.basis[r] = s;
    }
}
