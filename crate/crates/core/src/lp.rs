//! Exact rational linear algebra: feasibility of `A x = b, x >= 0` by the
//! two-phase simplex method (phase one only) with Bland's rule, and
//! Gaussian elimination for plain linear systems.

use num_traits::{Signed, Zero};

use crate::semiring::Rational;

/// Sparse-ish builder for equality-constrained feasibility problems.
#[derive(Clone, Debug, Default)]
pub struct FeasibilityProblem {
    num_vars: usize,
    rows: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
}

impl FeasibilityProblem {
    pub fn new(num_vars: usize) -> Self {
        FeasibilityProblem { num_vars, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Adds `sum coeff * x[var] = rhs`. Repeated variables accumulate.
    pub fn add_equality(&mut self, terms: Vec<(usize, Rational)>, rhs: Rational) {
        debug_assert!(terms.iter().all(|(v, _)| *v < self.num_vars));
        self.rows.push(terms);
        self.rhs.push(rhs);
    }

    /// Returns a nonnegative solution if one exists (a basic feasible one).
    pub fn solve(&self) -> Option<Vec<Rational>> {
        let m = self.rows.len();
        let n = self.num_vars;
        let width = n + m + 1;
        let rhs_col = n + m;

        let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
        for (i, (terms, b)) in self.rows.iter().zip(&self.rhs).enumerate() {
            let mut row = vec![Rational::zero(); width];
            for (v, c) in terms {
                row[*v] += c;
            }
            row[rhs_col] = b.clone();
            if b.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            row[n + i] = Rational::from_integer(1.into());
            tab.push(row);
        }
        let mut basis: Vec<usize> = (n..n + m).collect();

        // Reduced costs for minimizing the sum of artificials; the rhs
        // entry holds minus the objective value.
        let mut cost = vec![Rational::zero(); width];
        for row in &tab {
            for j in 0..n {
                cost[j] -= &row[j];
            }
            cost[rhs_col] -= &row[rhs_col];
        }

        loop {
            let entering = (0..n + m).find(|&j| cost[j].is_negative());
            let Some(e) = entering else { break };

            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in tab.iter().enumerate() {
                if row[e].is_positive() {
                    let ratio = &row[rhs_col] / &row[e];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            // Phase one is bounded below by zero.
            let (r, _) = leave.expect("phase-one objective is bounded");
            pivot(&mut tab, &mut cost, r, e);
            basis[r] = e;
        }

        if !cost[rhs_col].is_zero() {
            return None;
        }
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = tab[i][rhs_col].clone();
            }
        }
        debug_assert!(self.check(&x));
        Some(x)
    }

    /// Exact check of a candidate solution.
    pub fn check(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.rows.iter().zip(&self.rhs).all(|(terms, b)| {
            let lhs = terms.iter().fold(Rational::zero(), |acc, (v, c)| acc + c * &x[*v]);
            lhs == *b
        })
    }
}

fn pivot(tab: &mut [Vec<Rational>], cost: &mut [Rational], r: usize, e: usize) {
    let p = tab[r][e].clone();
    for x in tab[r].iter_mut() {
        *x = &*x / &p;
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || row[e].is_zero() {
            continue;
        }
        let factor = row[e].clone();
        for (x, pv) in row.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *x -= &factor * pv;
            }
        }
    }
    if !cost[e].is_zero() {
        let factor = cost[e].clone();
        for (x, pv) in cost.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *x -= &factor * pv;
            }
        }
    }
}

/// Solves `rows * y = rhs` for `y`, returning one solution (free variables
/// set to zero) or `None` when the system is inconsistent.
pub fn solve_linear_system(rows: &[Vec<Rational>], rhs: &[Rational], num_vars: usize) -> Option<Vec<Rational>> {
    assert_eq!(rows.len(), rhs.len());
    let mut aug: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            assert_eq!(r.len(), num_vars);
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let pivots = row_reduce(&mut aug, num_vars);
    for row in aug.iter().skip(pivots.len()) {
        if !row[num_vars].is_zero() {
            return None;
        }
    }
    let mut y = vec![Rational::zero(); num_vars];
    for (i, &c) in pivots.iter().enumerate() {
        y[c] = aug[i][num_vars].clone();
    }
    Some(y)
}

/// Rank of a rational matrix with `num_cols` columns.
pub fn rank(rows: &[Vec<Rational>], num_cols: usize) -> usize {
    let mut m = rows.to_vec();
    row_reduce(&mut m, num_cols).len()
}

/// Reduced row echelon form on the first `num_cols` columns; returns pivot
/// columns in row order.
fn row_reduce(m: &mut [Vec<Rational>], num_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..num_cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &pv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, pv) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::{q, qi};

    #[test]
    fn finds_nonnegative_solution() {
        // x0 + x1 = 1, x0 - x1 = 1/2
        let mut p = FeasibilityProblem::new(2);
        p.add_equality(vec![(0, qi(1)), (1, qi(1))], qi(1));
        p.add_equality(vec![(0, qi(1)), (1, qi(-1))], q(1, 2));
        let x = p.solve().unwrap();
        assert_eq!(x, vec![q(3, 4), q(1, 4)]);
    }

    #[test]
    fn detects_infeasibility_from_sign() {
        // x0 + x1 = 1, x0 = 2 forces x1 = -1.
        let mut p = FeasibilityProblem::new(2);
        p.add_equality(vec![(0, qi(1)), (1, qi(1))], qi(1));
        p.add_equality(vec![(0, qi(1))], qi(2));
        assert!(p.solve().is_none());
    }

    #[test]
    fn handles_degenerate_and_redundant_rows() {
        let mut p = FeasibilityProblem::new(3);
        p.add_equality(vec![(0, qi(1)), (1, qi(1)), (2, qi(1))], qi(1));
        p.add_equality(vec![(0, qi(2)), (1, qi(2)), (2, qi(2))], qi(2));
        p.add_equality(vec![(2, qi(1))], qi(0));
        p.add_equality(vec![(0, qi(-1))], q(-1, 3));
        let x = p.solve().unwrap();
        assert!(p.check(&x));
        assert_eq!(x[0], q(1, 3));
    }

    #[test]
    fn linear_system_solutions_and_inconsistency() {
        let rows = vec![vec![qi(1), qi(1)], vec![qi(1), qi(-1)]];
        assert_eq!(solve_linear_system(&rows, &[qi(2), qi(0)], 2), Some(vec![qi(1), qi(1)]));
        let rows = vec![vec![qi(1), qi(1)], vec![qi(2), qi(2)]];
        assert_eq!(solve_linear_system(&rows, &[qi(1), qi(3)], 2), None);
        assert_eq!(rank(&rows, 2), 1);
    }
}
