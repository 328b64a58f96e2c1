//! Dense two-phase tableau simplex for `max cᵀx  s.t.  Ax = b, x ≥ 0`.
//!
//! Bland's rule picks both the entering and the leaving variable, so the
//! method terminates on degenerate problems. Intended for a few dozen rows
//! and at most a few thousand columns.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    /// Equality constraint rows.
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    /// Objective (maximized).
    pub c: Vec<T>,
}

struct Tableau<T> {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    eps: T,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, r: usize) -> T {
        self.t[r][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != T::zero() {
                for (v, &pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced costs of `max objᵀx` for columns `0..limit`.
    fn reduced(&self, obj: &[T], limit: usize) -> Vec<T> {
        (0..limit)
            .map(|j| {
                let zj = self
                    .basis
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |s, (r, &bv)| s + obj[bv] * self.t[r][j]);
                obj[j] - zj
            })
            .collect()
    }

    /// Simplex iterations on the columns `0..limit`. Returns false if unbounded.
    fn optimize(&mut self, obj: &[T], limit: usize) -> bool {
        loop {
            let red = self.reduced(obj, limit);
            let Some(enter) = (0..limit).find(|&j| red[j] > self.eps && !self.basis.contains(&j)) else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][enter];
                if a > self.eps {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= self.eps * (T::one() + lratio.abs());
                            if ratio < lratio && !tie || tie && self.basis[r] < self.basis[lr] {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter),
                None => return false,
            }
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn solve(&self) -> LpOutcome<T> {
        let rows = self.a.len();
        let n = self.c.len();
        let eps = T::lit(1e-11).max(T::epsilon() * T::lit(1e3));
        // Phase one: artificial variable per row, right-hand side made nonnegative.
        let cols = n + rows;
        let mut t = Vec::with_capacity(rows);
        for (r, row) in self.a.iter().enumerate() {
            let sign = if self.b[r] < T::zero() { -T::one() } else { T::one() };
            let mut line: Vec<T> = row.iter().map(|&v| v * sign).collect();
            line.resize(cols + 1, T::zero());
            line[n + r] = T::one();
            line[cols] = self.b[r] * sign;
            t.push(line);
        }
        let mut tab = Tableau { t, basis: (n..n + rows).collect(), cols, eps };
        let mut phase_one = vec![T::zero(); cols];
        for v in phase_one.iter_mut().skip(n) {
            *v = -T::one();
        }
        tab.optimize(&phase_one, cols);
        let infeas = (0..rows)
            .filter(|&r| tab.basis[r] >= n)
            .fold(T::zero(), |s, r| s + tab.rhs(r));
        let scale = self.b.iter().fold(T::one(), |m, v| m.max(v.abs()));
        if infeas > T::lit(1e-9) * scale {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= n {
                match (0..n).find(|&j| tab.t[r][j].abs() > eps) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        let mut obj = self.c.clone();
        obj.resize(cols, T::zero());
        if !tab.optimize(&obj, n) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![T::zero(); n];
        for (r, &bv) in tab.basis.iter().enumerate() {
            if bv < n {
                x[bv] = tab.rhs(r);
            }
        }
        let value = x.iter().zip(&self.c).fold(T::zero(), |s, (a, b)| s + *a * *b);
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 2y, x + y + s1 = 4, x + 3y + s2 = 6
        let lp = LinearProgram::<f64> {
            a: vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            b: vec![4.0, 6.0],
            c: vec![3.0, 2.0, 0.0, 0.0],
        };
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 12.0).abs() < 1e-12);
                assert!((x[0] - 4.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        let lp = LinearProgram::<f64> { a: vec![vec![1.0, 1.0]], b: vec![-1.0], c: vec![1.0, 0.0] };
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram::<f64> { a: vec![vec![1.0, -1.0]], b: vec![1.0], c: vec![1.0, 0.0] };
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_tolerated() {
        let lp = LinearProgram::<f64> {
            a: vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]],
            b: vec![1.0, 2.0, 1.0],
            c: vec![1.0, 0.0, 0.0],
        };
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example (Beale) under Dantzig's rule.
        let lp = LinearProgram::<f64> {
            a: vec![
                vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            b: vec![0.0, 0.0, 1.0],
            c: vec![0.75, -150.0, 0.02, -6.0, 0.0, 0.0, 0.0],
        };
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert!((value - 0.05).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
    }
}
