//! The optimal-cycle linear program: restrict the complex to a birth value,
//! minimise the weighted l1 norm of `c = c0 + A w`, and check the result.

mod factor;
mod orient;
pub mod simplex;
pub mod tableau;

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, F2Chain};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::reduction::ReducedDecomposition;
use crate::weights::WeightMatrix;

pub use orient::lift_signs;
pub use simplex::{PivotRule, RevisedSimplex};
pub use tableau::DenseTableau;

pub const DEFAULT_ROUND_TOL: f64 = 1e-6;
pub const ORACLE_MAX_COLUMNS: usize = 20;

/// `min costs . x` subject to `A x = rhs`, `x >= 0`, with `A` stored by
/// sparse columns of `(row, value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardForm {
    pub num_rows: usize,
    pub columns: Vec<Vec<(usize, f64)>>,
    pub costs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl StandardForm {
    pub fn validate(&self) -> Result<()> {
        if self.costs.len() != self.columns.len() {
            return Err(Error::DimensionMismatch { expected: self.columns.len(), found: self.costs.len() });
        }
        if self.rhs.len() != self.num_rows {
            return Err(Error::DimensionMismatch { expected: self.num_rows, found: self.rhs.len() });
        }
        let finite = self.costs.iter().chain(&self.rhs).all(|v| v.is_finite());
        let rows_ok = self.columns.iter().flatten().all(|&(i, v)| i < self.num_rows && v.is_finite());
        if !finite || !rows_ok {
            return Err(Error::SolverFailed("malformed problem".into()));
        }
        Ok(())
    }

    /// Writes the problem in CPLEX LP text format. Variables are named by
    /// `names`, or `x0, x1, ...` when none are given.
    pub fn write_lp<W: Write>(&self, names: Option<&[String]>, mut out: W) -> Result<()> {
        let name = |j: usize| names.map_or_else(|| format!("x{j}"), |n| n[j].clone());
        let term = |v: f64, j: usize| format!("{} {:?} {}", if v < 0.0 { "-" } else { "+" }, v.abs(), name(j));
        writeln!(out, "Minimize")?;
        let obj: Vec<String> =
            self.costs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, &c)| term(c, j)).collect();
        writeln!(out, " obj: {}", if obj.is_empty() { "0 x0".to_string() } else { obj.join(" ") })?;
        writeln!(out, "Subject To")?;
        let mut rows: Vec<Vec<String>> = vec![Vec::new(); self.num_rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                rows[i].push(term(v, j));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            let lhs = if row.is_empty() { "0 x0".to_string() } else { row.join(" ") };
            writeln!(out, " r{i}: {lhs} = {:?}", self.rhs[i])?;
        }
        writeln!(out, "Bounds")?;
        for j in 0..self.columns.len() {
            writeln!(out, " {} >= 0", name(j))?;
        }
        writeln!(out, "End")?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// A solver for problems in standard form.
pub trait LpBackend: Sync {
    fn name(&self) -> &str;
    fn solve(&self, lp: &StandardForm) -> Result<LpResult>;
}

/// The simplices available to the program at a given birth value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSets {
    pub dim: usize,
    pub birth: f64,
    /// `dim`-simplices with value at most `birth`, in filtration order.
    pub p_set: Vec<usize>,
    /// `(dim+1)`-simplices with value at most `birth` whose reduced column is
    /// nonzero, in filtration order.
    pub q_set: Vec<usize>,
}

pub fn restrict_sets(f: &Filtration, dec: &ReducedDecomposition, dim: usize, birth: f64) -> Result<RestrictedSets> {
    let p_set: Vec<usize> = f.indices_of_dim(dim).iter().copied().take_while(|&i| f.value(i) <= birth).collect();
    if p_set.is_empty() {
        return Err(Error::NoSimplicesAlive);
    }
    let q_set = f
        .indices_of_dim(dim + 1)
        .iter()
        .copied()
        .take_while(|&i| f.value(i) <= birth)
        .filter(|&i| !dec.is_zero_column(i))
        .collect();
    Ok(RestrictedSets { dim, birth, p_set, q_set })
}

/// The program over positions of `P` (rows) and `Q` (free directions).
#[derive(Clone, Debug)]
pub struct CycleLp {
    pub sets: RestrictedSets,
    /// Signed boundary of each `Q` simplex as `(P position, sign)`.
    pub a: Vec<Vec<(usize, f64)>>,
    /// Real lift of the initial representative over `P` positions.
    pub c0: Vec<f64>,
    pub weights: WeightMatrix,
}

impl CycleLp {
    pub fn costs(&self) -> &[f64] {
        self.weights.column_costs()
    }

    pub fn num_p(&self) -> usize {
        self.sets.p_set.len()
    }

    pub fn num_q(&self) -> usize {
        self.sets.q_set.len()
    }

    /// The full program with variables `c+, c-, w+, w-` in that order.
    pub fn standard_form(&self) -> (StandardForm, Vec<String>) {
        let (np, nq) = (self.num_p(), self.num_q());
        let mut columns = Vec::with_capacity(2 * (np + nq));
        let mut names = Vec::with_capacity(2 * (np + nq));
        for (sign, tag) in [(1.0, "cp"), (-1.0, "cm")] {
            for j in 0..np {
                columns.push(vec![(j, sign)]);
                names.push(format!("{tag}{j}"));
            }
        }
        for (sign, tag) in [(-1.0, "wp"), (1.0, "wm")] {
            for (q, col) in self.a.iter().enumerate() {
                columns.push(col.iter().map(|&(i, v)| (i, sign * v)).collect());
                names.push(format!("{tag}{q}"));
            }
        }
        let mut costs: Vec<f64> = self.costs().iter().chain(self.costs()).copied().collect();
        costs.resize(columns.len(), 0.0);
        (StandardForm { num_rows: np, columns, costs, rhs: self.c0.clone() }, names)
    }

    pub fn write_lp<W: Write>(&self, out: W) -> Result<()> {
        let (sf, names) = self.standard_form();
        sf.write_lp(Some(&names), out)
    }
}

/// Validates the initial representative and assembles the program.
pub fn build_lp(f: &Filtration, sets: RestrictedSets, c0: &F2Chain, weights: WeightMatrix) -> Result<CycleLp> {
    if c0.dim() != sets.dim {
        return Err(Error::DimensionMismatch { expected: sets.dim, found: c0.dim() });
    }
    if weights.size() != sets.p_set.len() {
        return Err(Error::DimensionMismatch { expected: sets.p_set.len(), found: weights.size() });
    }
    if sets.dim > 0 && !f.boundary(c0)?.is_zero() {
        return Err(Error::NotACycle);
    }
    let position: HashMap<usize, usize> = sets.p_set.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let support: Vec<usize> = c0.support().collect();
    let signs = lift_signs(f, &support)?;
    let mut lifted = vec![0.0; sets.p_set.len()];
    for (&i, s) in support.iter().zip(signs) {
        let &k = position.get(&i).ok_or(Error::SupportOutsideRestriction)?;
        lifted[k] = s;
    }
    let a = sets
        .q_set
        .iter()
        .map(|&q| {
            f.boundary_of(q)
                .into_iter()
                .map(|(i, s)| position.get(&i).map(|&k| (k, f64::from(s))).ok_or(Error::SupportOutsideRestriction))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CycleLp { sets, a, c0: lifted, weights })
}

/// Sum of `costs[j]` over the given positions, accumulated in the order given.
pub fn support_cost(costs: &[f64], positions: &[usize]) -> f64 {
    positions.iter().fold(0.0, |acc, &j| acc + costs[j])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSolution {
    /// Coefficients over `P` positions.
    pub c: Vec<f64>,
    /// Coefficients over `Q` positions.
    pub w: Vec<f64>,
    /// `sum_j cost_j |c_j|` of the real solution.
    pub objective: f64,
    /// Filtration indices with `|c_j| > round_tol`, ascending.
    pub support: Vec<usize>,
    /// Coefficient of each support simplex.
    pub coefficients: Vec<f64>,
    /// `max |c - c0 - A w|`.
    pub residual: f64,
    pub pivots: usize,
    /// The solution reduced mod 2 after rounding.
    pub rounded: F2Chain,
    /// Cost of the rounded support.
    pub rounded_objective: f64,
    /// Some coefficient is further than `round_tol` from an integer.
    pub fractional: bool,
}

/// Solves the program. Rows untouched by any `Q` simplex are fixed at `c0`
/// and removed before the backend sees the problem.
pub fn solve(lp: &CycleLp, backend: &dyn LpBackend, round_tol: f64) -> Result<CycleSolution> {
    let (np, nq) = (lp.num_p(), lp.num_q());
    let costs = lp.costs();
    let mut touched = vec![false; np];
    lp.a.iter().flatten().for_each(|&(i, _)| touched[i] = true);
    let rows: Vec<usize> = (0..np).filter(|&i| touched[i]).collect();
    let mut row_of = vec![usize::MAX; np];
    rows.iter().enumerate().for_each(|(r, &i)| row_of[i] = r);
    let m = rows.len();

    let mut columns = Vec::with_capacity(2 * (m + nq));
    let mut obj = Vec::with_capacity(2 * (m + nq));
    for sign in [1.0, -1.0] {
        for (r, &i) in rows.iter().enumerate() {
            columns.push(vec![(r, sign)]);
            obj.push(costs[i]);
        }
    }
    for sign in [-1.0, 1.0] {
        for col in &lp.a {
            columns.push(col.iter().map(|&(i, v)| (row_of[i], sign * v)).collect());
            obj.push(0.0);
        }
    }
    let sf = StandardForm { num_rows: m, columns, costs: obj, rhs: rows.iter().map(|&i| lp.c0[i]).collect() };
    let result = if m == 0 { LpResult { x: Vec::new(), objective: 0.0, pivots: 0 } } else { backend.solve(&sf)? };

    let mut c = lp.c0.clone();
    for (r, &i) in rows.iter().enumerate() {
        c[i] = result.x[r] - result.x[m + r];
    }
    let w: Vec<f64> = (0..nq).map(|q| result.x[2 * m + q] - result.x[2 * m + nq + q]).collect();
    let mut resid: Vec<f64> = c.iter().zip(&lp.c0).map(|(a, b)| a - b).collect();
    for (col, &wq) in lp.a.iter().zip(&w) {
        for &(i, v) in col {
            resid[i] -= v * wq;
        }
    }
    let residual = resid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let objective = c.iter().zip(costs).fold(0.0, |acc, (v, k)| if *v == 0.0 { acc } else { acc + k * v.abs() });
    let positions: Vec<usize> = (0..np).filter(|&j| c[j].abs() > round_tol).collect();
    let fractional = c.iter().any(|v| (v - v.round()).abs() > round_tol);
    let odd: Vec<usize> = (0..np).filter(|&j| (c[j].round() as i64).rem_euclid(2) == 1).collect();
    Ok(CycleSolution {
        support: positions.iter().map(|&j| lp.sets.p_set[j]).collect(),
        coefficients: positions.iter().map(|&j| c[j]).collect(),
        rounded: Chain::from_indices(lp.sets.dim, odd.iter().map(|&j| lp.sets.p_set[j])),
        rounded_objective: support_cost(costs, &odd),
        c,
        w,
        objective,
        residual,
        pivots: result.pivots,
        fractional,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub objective: f64,
    /// Positions in `P` of an optimal cycle, ascending.
    pub positions: Vec<usize>,
}

/// Exhaustive minimum over all F2 cycles `c0 + sum_{S subset Q} boundary(S)`.
pub fn oracle_optimal(lp: &CycleLp) -> Result<OracleResult> {
    let nq = lp.num_q();
    if nq > ORACLE_MAX_COLUMNS {
        return Err(Error::OracleTooLarge(nq, ORACLE_MAX_COLUMNS));
    }
    let words = lp.num_p().div_ceil(64);
    let to_bits = |positions: &mut dyn Iterator<Item = usize>| {
        let mut b = vec![0u64; words];
        positions.for_each(|j| b[j / 64] ^= 1 << (j % 64));
        b
    };
    let columns: Vec<Vec<u64>> = lp.a.iter().map(|col| to_bits(&mut col.iter().map(|&(i, _)| i))).collect();
    let mut current = to_bits(&mut (0..lp.num_p()).filter(|&j| lp.c0[j] != 0.0));
    let positions_of =
        |bits: &[u64]| -> Vec<usize> { (0..lp.num_p()).filter(|&j| bits[j / 64] >> (j % 64) & 1 == 1).collect() };
    let mut best_positions = positions_of(&current);
    let mut best = support_cost(lp.costs(), &best_positions);
    for k in 1u64..(1u64 << nq) {
        let flip = k.trailing_zeros() as usize;
        current.iter_mut().zip(&columns[flip]).for_each(|(a, b)| *a ^= b);
        let positions = positions_of(&current);
        let cost = support_cost(lp.costs(), &positions);
        if cost < best {
            best = cost;
            best_positions = positions;
        }
    }
    Ok(OracleResult { objective: best, positions: best_positions })
}
