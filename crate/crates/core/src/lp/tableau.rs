//! Full-tableau two-phase simplex with Bland's rule.
//!
//! Slow and memory hungry, but shares no code with the revised solver, so it
//! serves as the alternative backend when cross-checking objectives.

use crate::error::{Error, Result};

use super::{LpBackend, LpResult, StandardForm};

#[derive(Clone, Debug)]
pub struct DenseTableau {
    pub max_pivots: usize,
    pub tol: f64,
}

impl Default for DenseTableau {
    fn default() -> Self {
        DenseTableau { max_pivots: 1_000_000, tol: 1e-10 }
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows` constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                row.iter_mut().zip(&pivot_row).for_each(|(v, pr)| *v -= f * pr);
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule on columns `0..limit`.
    fn run(&mut self, limit: usize, tol: f64, max_pivots: usize, pivots: &mut usize) -> Result<()> {
        let obj = self.rows;
        loop {
            let Some(c) = (0..limit).find(|&j| self.t[obj][j] < -tol) else { return Ok(()) };
            let rhs = self.cols;
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i][c];
                if a > tol {
                    let ratio = self.t[i][rhs] / a;
                    let better = match best {
                        None => true,
                        Some((k, b)) => ratio < b - tol || (ratio <= b + tol && self.basis[i] < self.basis[k]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return Err(Error::SolverFailed("unbounded objective".into())) };
            if *pivots >= max_pivots {
                return Err(Error::SolverStalled(*pivots));
            }
            self.pivot(r, c);
            *pivots += 1;
        }
    }
}

impl LpBackend for DenseTableau {
    fn name(&self) -> &str {
        "dense-tableau"
    }

    fn solve(&self, lp: &StandardForm) -> Result<LpResult> {
        lp.validate()?;
        let m = lp.num_rows;
        let n = lp.columns.len();
        // columns: structural, one artificial per row, then rhs
        let width = n + m;
        let mut t = vec![vec![0.0; width + 1]; m + 1];
        for (j, col) in lp.columns.iter().enumerate() {
            for &(i, a) in col {
                t[i][j] += a;
            }
        }
        for i in 0..m {
            t[i][width] = lp.rhs[i];
            if lp.rhs[i] < 0.0 {
                t[i].iter_mut().for_each(|v| *v = -*v);
            }
            t[i][n + i] = 1.0;
        }
        // phase one objective: sum of artificials, priced out
        for i in 0..m {
            let row = t[i].clone();
            for (j, x) in row.into_iter().enumerate() {
                if j < n || j == width {
                    t[m][j] -= x;
                }
            }
        }
        let mut tab = Tableau { rows: m, cols: width, t, basis: (n..n + m).collect() };
        let mut pivots = 0;
        tab.run(width, self.tol, self.max_pivots, &mut pivots)?;
        let bscale = lp.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if -tab.t[m][width] > 1e-7 * bscale {
            return Err(Error::SolverFailed("infeasible".into()));
        }
        // drive remaining artificials out of the basis where possible
        for r in 0..m {
            if tab.basis[r] >= n {
                if let Some(c) = (0..n).find(|&j| tab.t[r][j].abs() > self.tol) {
                    tab.pivot(r, c);
                }
            }
        }
        // phase two objective row
        tab.t[m] = vec![0.0; width + 1];
        tab.t[m][..n].copy_from_slice(&lp.costs);
        for r in 0..m {
            let b = tab.basis[r];
            let cb = if b < n { lp.costs[b] } else { 0.0 };
            if cb != 0.0 {
                let row = tab.t[r].clone();
                tab.t[m].iter_mut().zip(&row).for_each(|(v, a)| *v -= cb * a);
            }
        }
        // artificials stuck in the basis sit in redundant rows; keep them out
        for j in n..width {
            tab.t[m][j] = 0.0;
        }
        tab.run(n, self.tol, self.max_pivots, &mut pivots)?;
        let mut x = vec![0.0; n];
        for r in 0..m {
            if tab.basis[r] < n {
                x[tab.basis[r]] = tab.t[r][width].max(0.0);
            }
        }
        let objective = x.iter().zip(&lp.costs).map(|(a, c)| a * c).sum();
        Ok(LpResult { x, objective, pivots })
    }
}
