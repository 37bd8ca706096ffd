//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Pivots are chosen by the Markowitz criterion with threshold partial
//! pivoting. Singleton rows and columns cost nothing and are taken first;
//! bases made of unit columns and short boundary columns are mostly
//! singletons, so fill-in stays small. After a basis change the factorization
//! is extended by an eta column instead of being rebuilt.

use crate::error::{Error, Result};

const SINGULAR_TOL: f64 = 1e-11;
/// Entries below this after elimination are dropped.
const DROP_TOL: f64 = 1e-14;
/// A pivot must be at least this fraction of the largest entry in its column.
const THRESHOLD: f64 = 0.1;

/// One elimination step: pivot `(row, position)` with value `pivot`.
struct Step {
    row: usize,
    position: usize,
    pivot: f64,
    /// Multipliers `(row, l)` applied as `b[row] -= l * b[self.row]`.
    lower: Vec<(usize, f64)>,
    /// Remaining entries `(position, u)` of the pivot row.
    upper: Vec<(usize, f64)>,
}

struct Eta {
    position: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

pub(crate) struct Factorization {
    m: usize,
    steps: Vec<Step>,
    etas: Vec<Eta>,
}

/// The active submatrix during elimination.
struct Active {
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<usize>>,
    row_alive: Vec<bool>,
    col_alive: Vec<bool>,
}

impl Active {
    fn entry(&self, i: usize, k: usize) -> f64 {
        self.cols[k].iter().find(|e| e.0 == i).map_or(0.0, |e| e.1)
    }

    fn col_max(&self, k: usize) -> f64 {
        self.cols[k].iter().fold(0.0f64, |mx, e| mx.max(e.1.abs()))
    }

    /// Removes row `i` and column `k` and applies the rank-one update to the
    /// rest of the active matrix.
    fn eliminate(&mut self, i: usize, k: usize) -> Step {
        let pivot = self.entry(i, k);
        let lower: Vec<(usize, f64)> = self.cols[k].iter().filter(|e| e.0 != i).map(|&(r, v)| (r, v / pivot)).collect();
        let upper: Vec<(usize, f64)> =
            self.rows[i].iter().filter(|&&c| c != k).map(|&c| (c, self.entry(i, c))).collect();
        self.row_alive[i] = false;
        self.col_alive[k] = false;
        for &(r, _) in &lower {
            self.rows[r].retain(|&c| c != k);
        }
        self.cols[k].clear();
        self.rows[i].clear();
        for &(c, u) in &upper {
            self.cols[c].retain(|e| e.0 != i);
            for &(r, l) in &lower {
                let delta = -l * u;
                match self.cols[c].iter_mut().find(|e| e.0 == r) {
                    Some(e) => e.1 += delta,
                    None => {
                        self.cols[c].push((r, delta));
                        self.rows[r].push(c);
                    }
                }
            }
            let rows = &mut self.rows;
            self.cols[c].retain(|&(r, v)| {
                let keep = v.abs() > DROP_TOL;
                if !keep {
                    rows[r].retain(|&x| x != c);
                }
                keep
            });
        }
        Step { row: i, position: k, pivot, lower, upper }
    }
}

impl Factorization {
    /// Factorizes the square matrix whose column `k` is `columns[k]`.
    pub(crate) fn new(m: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if columns.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: columns.len() });
        }
        let singular = || Error::SolverFailed("singular basis".into());
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (k, col) in columns.into_iter().enumerate() {
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for (i, v) in col {
                match merged.iter_mut().find(|e| e.0 == i) {
                    Some(e) => e.1 += v,
                    None => merged.push((i, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            for &(i, _) in &merged {
                rows[i].push(k);
            }
            cols.push(merged);
        }
        let mut a = Active { cols, rows, row_alive: vec![true; m], col_alive: vec![true; m] };
        let mut steps = Vec::with_capacity(m);

        // Column singletons only shorten other columns and row singletons only
        // shorten other rows, so two work lists suffice. Neither causes fill.
        let mut queue: Vec<usize> = (0..m).rev().collect();
        while let Some(k) = queue.pop() {
            if a.col_alive[k] && a.cols[k].len() == 1 && a.cols[k][0].1.abs() >= SINGULAR_TOL {
                let i = a.cols[k][0].0;
                let touched = a.rows[i].clone();
                steps.push(a.eliminate(i, k));
                queue.extend(touched.into_iter().filter(|&c| a.col_alive[c] && a.cols[c].len() == 1));
            }
        }
        let mut queue: Vec<usize> = (0..m).rev().collect();
        while let Some(i) = queue.pop() {
            if !(a.row_alive[i] && a.rows[i].len() == 1) {
                continue;
            }
            let k = a.rows[i][0];
            let v = a.entry(i, k).abs();
            if v >= SINGULAR_TOL && v >= THRESHOLD * a.col_max(k) {
                let touched: Vec<usize> = a.cols[k].iter().map(|e| e.0).collect();
                steps.push(a.eliminate(i, k));
                queue.extend(touched.into_iter().filter(|&r| a.row_alive[r] && a.rows[r].len() == 1));
            }
        }

        // Markowitz on whatever remains
        let mut remaining: Vec<usize> = (0..m).filter(|&k| a.col_alive[k]).collect();
        while !remaining.is_empty() {
            let min_len = remaining.iter().map(|&k| a.cols[k].len()).min().expect("non-empty");
            if min_len == 0 {
                return Err(singular());
            }
            let mut best: Option<(usize, usize, usize)> = None;
            for &k in &remaining {
                let len = a.cols[k].len();
                // only columns close to the shortest are worth a look
                if len > min_len + 2 {
                    continue;
                }
                let max = a.col_max(k);
                for &(i, v) in &a.cols[k] {
                    if v.abs() < SINGULAR_TOL || v.abs() < THRESHOLD * max {
                        continue;
                    }
                    let cost = (len - 1) * (a.rows[i].len() - 1);
                    if best.is_none_or(|(c, _, _)| cost < c) {
                        best = Some((cost, i, k));
                    }
                }
            }
            let (_, i, k) = match best {
                Some(b) => b,
                None => {
                    // fall back to the largest entry anywhere
                    let mut top: Option<(f64, usize, usize)> = None;
                    for &k in &remaining {
                        for &(i, v) in &a.cols[k] {
                            if top.is_none_or(|(t, _, _)| v.abs() > t) {
                                top = Some((v.abs(), i, k));
                            }
                        }
                    }
                    match top {
                        Some((t, i, k)) if t >= SINGULAR_TOL => (0, i, k),
                        _ => return Err(singular()),
                    }
                }
            };
            steps.push(a.eliminate(i, k));
            remaining.retain(|&c| c != k);
        }
        if steps.len() != m {
            return Err(singular());
        }
        Ok(Factorization { m, steps, etas: Vec::new() })
    }

    pub(crate) fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = b`; `b` is indexed by row, `x` by basis position.
    pub(crate) fn ftran(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = b.to_vec();
        for s in &self.steps {
            let v = rhs[s.row];
            if v != 0.0 {
                for &(r, l) in &s.lower {
                    rhs[r] -= l * v;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for s in self.steps.iter().rev() {
            let acc: f64 = s.upper.iter().map(|&(c, u)| u * x[c]).sum();
            x[s.position] = (rhs[s.row] - acc) / s.pivot;
        }
        for eta in &self.etas {
            let xr = x[eta.position] / eta.pivot;
            x[eta.position] = xr;
            if xr != 0.0 {
                for &(i, u) in &eta.entries {
                    x[i] -= u * xr;
                }
            }
        }
        x
    }

    /// Solves `B^T y = c`; `c` is indexed by basis position, `y` by row.
    pub(crate) fn btran(&self, c: &[f64]) -> Vec<f64> {
        let mut c = c.to_vec();
        for eta in self.etas.iter().rev() {
            let s: f64 = eta.entries.iter().map(|&(i, u)| u * c[i]).sum();
            c[eta.position] = (c[eta.position] - s) / eta.pivot;
        }
        let mut y = vec![0.0; self.m];
        for s in &self.steps {
            let w = c[s.position] / s.pivot;
            y[s.row] = w;
            if w != 0.0 {
                for &(p, u) in &s.upper {
                    c[p] -= u * w;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let acc: f64 = s.lower.iter().map(|&(r, l)| l * y[r]).sum();
            y[s.row] -= acc;
        }
        y
    }

    /// Records that the column at `position` was replaced by one whose
    /// representation in the current basis is `u`.
    pub(crate) fn update(&mut self, position: usize, u: &[f64]) {
        let entries = u.iter().enumerate().filter(|&(i, &v)| i != position && v != 0.0).map(|(i, &v)| (i, v)).collect();
        self.etas.push(Eta { position, pivot: u[position], entries });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_mul(cols: &[Vec<(usize, f64)>], x: &[f64], m: usize) -> Vec<f64> {
        let mut b = vec![0.0; m];
        for (k, col) in cols.iter().enumerate() {
            for &(i, a) in col {
                b[i] += a * x[k];
            }
        }
        b
    }

    fn check(cols: Vec<Vec<(usize, f64)>>) {
        let m = cols.len();
        let f = Factorization::new(m, cols.clone()).unwrap();
        let b: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).sin() + 1.0).collect();
        let x = f.ftran(&b);
        for (got, want) in dense_mul(&cols, &x, m).iter().zip(&b) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
        let c: Vec<f64> = (0..m).map(|i| (i as f64 * 1.3).cos()).collect();
        let y = f.btran(&c);
        for (k, col) in cols.iter().enumerate() {
            let dot: f64 = col.iter().map(|&(i, a)| a * y[i]).sum();
            assert_abs_diff_eq!(dot, c[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn singletons_and_kernel() {
        check(vec![
            vec![(0, 2.0), (2, 1.0)],
            vec![(1, -1.0)],
            vec![(2, 1.0), (3, 1.0), (4, 1.0)],
            vec![(3, 1.0), (4, -1.0), (0, 3.0)],
            vec![(3, 2.0), (4, 1.0)],
        ]);
        check(vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, -1.0)]]);
        check(vec![vec![(0, 1.0)]]);
    }

    #[test]
    fn random_sparse_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [3usize, 8, 20, 60] {
            for _ in 0..20 {
                // a dominant diagonal keeps the matrix comfortably nonsingular
                let cols: Vec<Vec<(usize, f64)>> = (0..m)
                    .map(|k| {
                        let mut col = vec![(k, 4.0 + rng.random::<f64>())];
                        for _ in 0..rng.random_range(0..4) {
                            let r = rng.random_range(0..m);
                            if r != k && col.iter().all(|e| e.0 != r) {
                                col.push((r, rng.random_range(-1.0..1.0)));
                            }
                        }
                        col
                    })
                    .collect();
                check(cols);
            }
        }
    }

    #[test]
    fn cyclic_band_needs_elimination() {
        // no singletons at all
        let m = 6;
        let cols: Vec<Vec<(usize, f64)>> =
            (0..m).map(|k| vec![(k, 1.0), ((k + 1) % m, if k == m - 1 { 1.0 } else { -1.0 })]).collect();
        check(cols);
    }

    #[test]
    fn updates_match_a_fresh_factorization() {
        let mut cols = vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)]];
        let mut f = Factorization::new(3, cols.clone()).unwrap();
        let entering = vec![(0, 1.0), (1, -1.0), (2, 1.0)];
        let mut a = vec![0.0; 3];
        entering.iter().for_each(|&(i, v)| a[i] = v);
        let u = f.ftran(&a);
        f.update(1, &u);
        cols[1] = entering;
        let fresh = Factorization::new(3, cols).unwrap();
        let b = [1.0, 2.0, 3.0];
        let (x1, x2) = (f.ftran(&b), fresh.ftran(&b));
        let (y1, y2) = (f.btran(&b), fresh.btran(&b));
        for k in 0..3 {
            assert_abs_diff_eq!(x1[k], x2[k], epsilon = 1e-12);
            assert_abs_diff_eq!(y1[k], y2[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_basis_is_rejected() {
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        assert!(Factorization::new(2, cols).is_err());
        assert!(Factorization::new(2, vec![vec![(0, 1.0)], vec![(0, 1.0)]]).is_err());
    }
}
