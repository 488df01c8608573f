//! Dense exact-rational simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! With a non-negative right-hand side the slack basis is feasible, so no
//! phase one is needed. Bland's rule picks entering and leaving variables,
//! which rules out cycling.

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOptimum {
    pub value: Rational,
    pub x: Vec<Rational>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `Σ coeffs[i].1 · x[coeffs[i].0] <= rhs`.
    pub fn add_le(&mut self, coeffs: &[(usize, Rational)], rhs: Rational) {
        let mut row = vec![Rational::zero(); self.num_vars()];
        for (j, c) in coeffs {
            row[*j] += c;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn maximize(&self) -> Result<LpOptimum> {
        let n = self.num_vars();
        let m = self.rows.len();
        if self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::Lp("row length differs from variable count".into()));
        }
        if self.rhs.iter().any(Rational::is_negative) {
            return Err(Error::Lp(
                "negative right-hand side; slack basis infeasible".into(),
            ));
        }

        // Columns 0..n are structural, n..n+m are slacks.
        let width = n + m;
        let mut tab: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.resize(width, Rational::zero());
                row[n + i] = Rational::one();
                row
            })
            .collect();
        let mut rhs = self.rhs.clone();
        let mut reduced: Vec<Rational> = self.objective.clone();
        reduced.resize(width, Rational::zero());
        let mut value = Rational::zero();
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut pivots = 0usize;

        while let Some(enter) = (0..width).find(|&j| reduced[j].is_positive()) {
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..m {
                if !tab[i][enter].is_positive() {
                    continue;
                }
                let ratio = &rhs[i] / &tab[i][enter];
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Lp("objective is unbounded".into()));
            };

            let piv = tab[r][enter].clone();
            if piv != Rational::one() {
                let inv = piv.recip();
                for v in tab[r].iter_mut() {
                    if !v.is_zero() {
                        *v = &*v * &inv;
                    }
                }
                rhs[r] = &rhs[r] * &inv;
            }
            let nz: Vec<usize> = (0..width).filter(|&j| !tab[r][j].is_zero()).collect();
            let pivot_row = tab[r].clone();
            let pivot_rhs = rhs[r].clone();
            for i in 0..m {
                if i == r || tab[i][enter].is_zero() {
                    continue;
                }
                let factor = tab[i][enter].clone();
                for &j in &nz {
                    let delta = &factor * &pivot_row[j];
                    tab[i][j] -= &delta;
                }
                let delta = &factor * &pivot_rhs;
                rhs[i] -= &delta;
            }
            let factor = reduced[enter].clone();
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                reduced[j] -= &delta;
            }
            value += &factor * &pivot_rhs;
            basis[r] = enter;
            pivots += 1;
        }

        let mut x = vec![Rational::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = rhs[i].clone();
            }
        }
        Ok(LpOptimum { value, x, pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(3), r(5)];
        lp.add_le(&[(0, r(1))], r(4));
        lp.add_le(&[(1, r(2))], r(12));
        lp.add_le(&[(0, r(3)), (1, r(2))], r(18));
        let opt = lp.maximize().unwrap();
        assert_eq!(opt.value, 36);
        assert_eq!(opt.x, vec![r(2), r(6)]);
    }

    #[test]
    fn fractional_optimum() {
        // max x + y  s.t.  2x + y <= 1, x + 2y <= 1  ->  2/3 at (1/3, 1/3)
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![r(1), r(1)];
        lp.add_le(&[(0, r(2)), (1, r(1))], r(1));
        lp.add_le(&[(0, r(1)), (1, r(2))], r(1));
        let opt = lp.maximize().unwrap();
        assert_eq!(opt.value, q(2, 3));
        assert_eq!(opt.x, vec![q(1, 3), q(1, 3)]);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example, terminates under Bland's rule.
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![q(3, 4), r(-150), q(1, 50), r(-6)];
        lp.add_le(
            &[(0, q(1, 4)), (1, r(-60)), (2, q(-1, 25)), (3, r(9))],
            r(0),
        );
        lp.add_le(
            &[(0, q(1, 2)), (1, r(-90)), (2, q(-1, 50)), (3, r(3))],
            r(0),
        );
        lp.add_le(&[(2, r(1))], r(1));
        let opt = lp.maximize().unwrap();
        assert_eq!(opt.value, q(1, 20));
    }

    #[test]
    fn unbounded_and_infeasible_start() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![r(1)];
        lp.add_le(&[(0, r(-1))], r(0));
        assert!(matches!(lp.maximize(), Err(Error::Lp(_))));

        let mut lp = LinearProgram::new(1);
        lp.add_le(&[(0, r(1))], r(-1));
        assert!(matches!(lp.maximize(), Err(Error::Lp(_))));
    }
}
