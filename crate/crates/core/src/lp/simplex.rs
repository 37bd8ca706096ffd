//! Revised primal simplex over a sparse factorized basis.
//!
//! The basis factorization is extended by eta columns after every pivot and
//! rebuilt from scratch every `refactor_interval` pivots, or earlier when the
//! primal residual drifts.

use crate::error::{Error, Result};

use super::factor::Factorization;
use super::{LpBackend, LpResult, StandardForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Most negative reduced cost, falling back to Bland's rule while a run of
    /// degenerate pivots is in progress.
    DantzigWithBlandFallback { degenerate_run: usize },
}

#[derive(Clone, Debug)]
pub struct RevisedSimplex {
    pub rule: PivotRule,
    pub max_pivots: usize,
    /// Reduced costs above `-optimality_tol * max|c|` count as non-negative.
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// Eta columns kept before the basis is factorized again.
    pub refactor_interval: usize,
}

impl Default for RevisedSimplex {
    fn default() -> Self {
        RevisedSimplex {
            rule: PivotRule::DantzigWithBlandFallback { degenerate_run: 50 },
            max_pivots: 1_000_000,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_interval: 100,
        }
    }
}

impl RevisedSimplex {
    pub fn bland() -> Self {
        RevisedSimplex { rule: PivotRule::Bland, ..Default::default() }
    }
}

struct State<'a> {
    lp: &'a StandardForm,
    /// Columns of the working problem; artificial columns appended.
    columns: Vec<Vec<(usize, f64)>>,
    n_structural: usize,
    m: usize,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    factor: Factorization,
    xb: Vec<f64>,
    pivots: usize,
}

impl<'a> State<'a> {
    fn new(lp: &'a StandardForm) -> Result<Self> {
        let m = lp.num_rows;
        let n = lp.columns.len();
        let mut columns = lp.columns.clone();
        let mut basis = Vec::with_capacity(m);
        let mut position = vec![None; n];
        let mut xb = vec![0.0; m];
        // a column equal to +-e_i with the sign of b_i starts basic at |b_i|
        let mut unit_for_row: Vec<Option<(usize, f64)>> = vec![None; m];
        for (j, col) in lp.columns.iter().enumerate() {
            if let [(i, v)] = col.as_slice() {
                if v.abs() == 1.0 && lp.rhs[*i] * v >= 0.0 && unit_for_row[*i].is_none() {
                    unit_for_row[*i] = Some((j, *v));
                }
            }
        }
        for i in 0..m {
            let (j, v) = match unit_for_row[i] {
                Some(u) => u,
                None => {
                    let v = if lp.rhs[i] >= 0.0 { 1.0 } else { -1.0 };
                    columns.push(vec![(i, v)]);
                    position.push(None);
                    (columns.len() - 1, v)
                }
            };
            basis.push(j);
            position[j] = Some(i);
            xb[i] = lp.rhs[i] / v;
        }
        let factor = Factorization::new(m, basis.iter().map(|&j| columns[j].clone()).collect())?;
        Ok(State { lp, columns, n_structural: n, m, basis, position, factor, xb, pivots: 0 })
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_structural
    }

    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&j| costs[j]).collect();
        self.factor.btran(&cb)
    }

    fn reduced_cost(&self, j: usize, costs: &[f64], y: &[f64]) -> f64 {
        costs[j] - self.columns[j].iter().map(|&(k, a)| y[k] * a).sum::<f64>()
    }

    fn direction(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        for &(k, v) in &self.columns[j] {
            a[k] += v;
        }
        self.factor.ftran(&a)
    }

    fn pivot(&mut self, entering: usize, row: usize, u: &[f64]) {
        let theta = self.xb[row] / u[row];
        for (i, &ui) in u.iter().enumerate() {
            if i != row && ui != 0.0 {
                self.xb[i] -= theta * ui;
            }
        }
        self.xb[row] = theta;
        self.factor.update(row, u);
        let leaving = self.basis[row];
        self.position[leaving] = None;
        self.position[entering] = Some(row);
        self.basis[row] = entering;
        self.pivots += 1;
    }

    fn primal_residual(&self) -> f64 {
        let mut r = self.lp.rhs.clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            for &(k, a) in &self.columns[bj] {
                r[k] -= a * self.xb[i];
            }
        }
        r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Factorizes the current basis afresh and recomputes `x_B`.
    fn refactor(&mut self) -> Result<()> {
        self.factor = Factorization::new(self.m, self.basis.iter().map(|&j| self.columns[j].clone()).collect())?;
        self.xb = self.factor.ftran(&self.lp.rhs);
        Ok(())
    }

    /// Runs simplex iterations for the given costs until optimal.
    fn optimize(&mut self, costs: &[f64], cfg: &RevisedSimplex, allow_artificial_entry: bool) -> Result<()> {
        let scale = costs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = cfg.optimality_tol * scale;
        let mut y = self.duals(costs);
        let mut degenerate = 0usize;
        loop {
            let use_bland = match cfg.rule {
                PivotRule::Bland => true,
                PivotRule::DantzigWithBlandFallback { degenerate_run } => degenerate >= degenerate_run,
            };
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.columns.len() {
                if self.position[j].is_some() || (!allow_artificial_entry && self.is_artificial(j)) {
                    continue;
                }
                let d = self.reduced_cost(j, costs, &y);
                if d < -tol {
                    if use_bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| d < best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = entering else { return Ok(()) };
            if self.pivots >= cfg.max_pivots {
                return Err(Error::SolverStalled(self.pivots));
            }
            let u = self.direction(q);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &ui) in u.iter().enumerate().take(self.m) {
                // artificials parked at zero leave as soon as they would move
                let forced =
                    self.is_artificial(self.basis[i]) && ui.abs() > cfg.pivot_tol && self.xb[i].abs() <= cfg.pivot_tol;
                if !(ui > cfg.pivot_tol || forced) {
                    continue;
                }
                let ratio = if forced { 0.0 } else { self.xb[i].max(0.0) / ui };
                let better = match leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < best - cfg.pivot_tol || (ratio <= best + cfg.pivot_tol && self.basis[i] < self.basis[k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, theta)) = leave else {
                return Err(Error::SolverFailed("unbounded objective".into()));
            };
            degenerate = if theta <= cfg.pivot_tol { degenerate + 1 } else { 0 };
            self.pivot(q, r, &u);
            if self.factor.num_etas() >= cfg.refactor_interval {
                self.refactor()?;
            }
            y = self.duals(costs);
        }
    }
}

impl LpBackend for RevisedSimplex {
    fn name(&self) -> &str {
        "builtin-revised-simplex"
    }

    fn solve(&self, lp: &StandardForm) -> Result<LpResult> {
        lp.validate()?;
        let mut st = State::new(lp)?;
        let total = st.columns.len();
        if total > st.n_structural {
            let phase1: Vec<f64> = (0..total).map(|j| if j >= st.n_structural { 1.0 } else { 0.0 }).collect();
            st.optimize(&phase1, self, true)?;
            let infeas: f64 =
                st.basis.iter().zip(&st.xb).filter(|(bj, _)| st.is_artificial(**bj)).map(|(_, x)| x.abs()).sum();
            let bscale = lp.rhs.iter().fold(1.0f64, |m, b| m.max(b.abs()));
            if infeas > 1e-7 * bscale {
                return Err(Error::SolverFailed("infeasible".into()));
            }
        }
        let mut costs = lp.costs.clone();
        costs.resize(total, 0.0);
        st.optimize(&costs, self, false)?;
        let bscale = lp.rhs.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        if st.primal_residual() > 1e-10 * bscale {
            st.refactor()?;
        }
        let mut x = vec![0.0; st.n_structural];
        for (i, &bj) in st.basis.iter().enumerate() {
            if bj < st.n_structural {
                // clean round-off below the pivot tolerance
                x[bj] = if st.xb[i].abs() <= 1e-12 { 0.0 } else { st.xb[i].max(0.0) };
            }
        }
        let objective = x.iter().zip(&lp.costs).map(|(a, c)| a * c).sum();
        Ok(LpResult { x, objective, pivots: st.pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lp(rows: usize, cols: Vec<Vec<(usize, f64)>>, costs: Vec<f64>, rhs: Vec<f64>) -> StandardForm {
        StandardForm { num_rows: rows, columns: cols, costs, rhs }
    }

    #[test]
    fn textbook_problem_with_slacks() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let p = lp(
            3,
            vec![vec![(0, 1.0), (2, 3.0)], vec![(1, 2.0), (2, 2.0)], vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)]],
            vec![-3.0, -5.0, 0.0, 0.0, 0.0],
            vec![4.0, 12.0, 18.0],
        );
        for solver in [RevisedSimplex::default(), RevisedSimplex::bland()] {
            let r = solver.solve(&p).unwrap();
            assert_abs_diff_eq!(r.objective, -36.0, epsilon = 1e-9);
            assert_abs_diff_eq!(r.x[0], 2.0, epsilon = 1e-9);
            assert_abs_diff_eq!(r.x[1], 6.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn phase_one_with_artificials() {
        // min x + y s.t. x + y = 2, x - y = 0  ->  x = y = 1
        let p = lp(2, vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, -1.0)]], vec![1.0, 1.0], vec![2.0, 0.0]);
        let r = RevisedSimplex::default().solve(&p).unwrap();
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.x[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_is_reported() {
        // x = -1 with x >= 0
        let p = lp(1, vec![vec![(0, 2.0)]], vec![1.0], vec![-1.0]);
        assert!(matches!(RevisedSimplex::default().solve(&p), Err(Error::SolverFailed(_))));
    }

    #[test]
    fn pivot_cap_is_reported() {
        let p = lp(1, vec![vec![(0, 1.0)], vec![(0, 1.0)]], vec![1.0, 0.0], vec![1.0]);
        let solver = RevisedSimplex { max_pivots: 0, ..RevisedSimplex::default() };
        assert_eq!(solver.solve(&p), Err(Error::SolverStalled(0)));
    }
}
