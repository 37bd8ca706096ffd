//! Persistence over F2 by the standard left-to-right column reduction
//! `R = D V`.

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, F2Chain};
use crate::error::{Error, Result};
use crate::filtration::Filtration;

/// Which columns keep their column of `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VTracking {
    All,
    /// Only simplices of dimension strictly below the given one.
    BelowDim(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionOptions {
    pub track_v: VTracking,
}

impl ReductionOptions {
    /// `V` for every dimension but the top one, which is all that essential
    /// representatives below the top dimension require.
    pub fn for_filtration(f: &Filtration) -> Self {
        ReductionOptions { track_v: VTracking::BelowDim(f.max_dim()) }
    }

    fn tracks(&self, dim: usize) -> bool {
        match self.track_v {
            VTracking::All => true,
            VTracking::BelowDim(k) => dim < k,
        }
    }
}

/// Reduced boundary matrix `R`, reduction matrix `V` and the pivot lookup.
/// Columns are sorted ascending row-index lists.
#[derive(Clone, Debug)]
pub struct ReducedDecomposition {
    r: Vec<Vec<usize>>,
    v: Vec<Option<Vec<usize>>>,
    dims: Vec<usize>,
    column_of_low: Vec<Option<usize>>,
}

/// Symmetric difference of two ascending index lists.
pub(crate) fn add_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn reduce(f: &Filtration) -> ReducedDecomposition {
    reduce_with(f, ReductionOptions::for_filtration(f))
}

pub fn reduce_with(f: &Filtration, opts: ReductionOptions) -> ReducedDecomposition {
    let n = f.len();
    let mut r: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut v: Vec<Option<Vec<usize>>> = Vec::with_capacity(n);
    let mut dims = Vec::with_capacity(n);
    let mut column_of_low: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        let dim = f.dim_of(j);
        let mut col: Vec<usize> = f.boundary_of(j).into_iter().map(|(i, _)| i).collect();
        col.sort_unstable();
        let tracked = opts.tracks(dim);
        let mut vcol = tracked.then(|| vec![j]);
        while let Some(&low) = col.last() {
            let Some(k) = column_of_low[low] else { break };
            col = add_sorted(&col, &r[k]);
            if let Some(vc) = vcol.as_mut() {
                let vk = v[k].as_ref().expect("same dimension shares tracking");
                *vc = add_sorted(vc, vk);
            }
        }
        if let Some(&low) = col.last() {
            column_of_low[low] = Some(j);
        }
        col.shrink_to_fit();
        r.push(col);
        v.push(vcol);
        dims.push(dim);
    }
    ReducedDecomposition { r, v, dims, column_of_low }
}

impl ReducedDecomposition {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_column(&self, j: usize) -> &[usize] {
        &self.r[j]
    }

    pub fn v_column(&self, j: usize) -> Option<&[usize]> {
        self.v[j].as_deref()
    }

    pub fn is_zero_column(&self, j: usize) -> bool {
        self.r[j].is_empty()
    }

    pub fn lowest_one(&self, j: usize) -> Option<usize> {
        self.r[j].last().copied()
    }

    /// Column whose lowest one sits in row `i`, if any.
    pub fn column_with_low(&self, i: usize) -> Option<usize> {
        self.column_of_low[i]
    }

    /// Checks that distinct nonzero columns have distinct lowest ones.
    pub fn is_reduced(&self) -> bool {
        let mut seen = vec![false; self.r.len()];
        for col in &self.r {
            if let Some(&low) = col.last() {
                if seen[low] {
                    return false;
                }
                seen[low] = true;
            }
        }
        true
    }

    /// Recomputes `D V` column by column and compares with `R`. Columns whose
    /// `V` is untracked are skipped.
    pub fn verify(&self, f: &Filtration) -> bool {
        (0..self.r.len()).all(|j| {
            let Some(vc) = &self.v[j] else { return true };
            let mut acc: Vec<usize> = Vec::new();
            for &k in vc {
                let mut b: Vec<usize> = f.boundary_of(k).into_iter().map(|(i, _)| i).collect();
                b.sort_unstable();
                acc = add_sorted(&acc, &b);
            }
            acc == self.r[j]
        })
    }

    /// Whether `c` bounds in the subcomplex of simplices with value at most
    /// `max_value`. The reduced columns born by then form an echelon basis of
    /// that boundary space, so reducing by lowest ones decides membership.
    pub fn is_boundary_at(&self, f: &Filtration, c: &F2Chain, max_value: f64) -> bool {
        let mut col: Vec<usize> = c.support().collect();
        while let Some(&low) = col.last() {
            match self.column_of_low[low] {
                Some(j) if f.value(j) <= max_value => col = add_sorted(&col, &self.r[j]),
                _ => return false,
            }
        }
        true
    }

    /// Persistence pairs of dimension `dim`, zero-persistence pairs dropped.
    /// Finite pairs come first ordered by death simplex, then essential
    /// classes ordered by birth simplex.
    pub fn diagram(&self, f: &Filtration, dim: usize) -> Result<Vec<PersistencePair>> {
        let mut out = Vec::new();
        for &j in f.indices_of_dim(dim + 1) {
            let Some(low) = self.lowest_one(j) else { continue };
            let (birth, death) = (f.value(low), f.value(j));
            if birth < death {
                out.push(PersistencePair {
                    dim,
                    birth,
                    death,
                    birth_simplex: low,
                    death_simplex: Some(j),
                    initial_rep: Chain::from_indices(dim, self.r[j].iter().copied()),
                });
            }
        }
        for &i in f.indices_of_dim(dim) {
            if self.is_zero_column(i) && self.column_of_low[i].is_none() {
                let vc = self.v[i].as_ref().ok_or(Error::VNotTracked(self.dims[i]))?;
                out.push(PersistencePair {
                    dim,
                    birth: f.value(i),
                    death: f64::INFINITY,
                    birth_simplex: i,
                    death_simplex: None,
                    initial_rep: Chain::from_indices(dim, vc.iter().copied()),
                });
            }
        }
        Ok(out)
    }
}

/// A point of a persistence diagram with the initial cycle representative
/// read off the decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
    pub birth_simplex: usize,
    pub death_simplex: Option<usize>,
    pub initial_rep: F2Chain,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death_simplex.is_none()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Persistence with an infinite death replaced by `cap`.
    pub fn persistence_capped(&self, cap: f64) -> f64 {
        self.death.min(cap) - self.birth
    }
}

/// The F2 span of `(p+1)`-boundaries born no later than a threshold, kept in
/// reduced form so membership and preimages are cheap to query.
#[derive(Clone, Debug)]
pub struct BoundarySpace {
    dim: usize,
    /// Reduced columns with the set of original simplices summing to each.
    columns: Vec<(Vec<usize>, Vec<usize>)>,
    column_of_low: std::collections::HashMap<usize, usize>,
}

impl BoundarySpace {
    /// Boundaries of `dim`-chains generated by `(dim+1)`-simplices with value
    /// at most `max_value`.
    pub fn new(f: &Filtration, dim: usize, max_value: f64) -> Self {
        let mut columns = Vec::new();
        let mut column_of_low = std::collections::HashMap::new();
        for &j in f.indices_of_dim(dim + 1) {
            if f.value(j) > max_value {
                break;
            }
            let mut col: Vec<usize> = f.boundary_of(j).into_iter().map(|(i, _)| i).collect();
            col.sort_unstable();
            let mut pre = vec![j];
            while let Some(&low) = col.last() {
                let Some(&k) = column_of_low.get(&low) else { break };
                let (rk, pk): &(Vec<usize>, Vec<usize>) = &columns[k];
                col = add_sorted(&col, rk);
                pre = add_sorted(&pre, pk);
            }
            if let Some(&low) = col.last() {
                column_of_low.insert(low, columns.len());
                columns.push((col, pre));
            }
        }
        BoundarySpace { dim, columns, column_of_low }
    }

    /// A `(dim+1)`-chain whose boundary is `c`, if one exists.
    pub fn preimage(&self, c: &F2Chain) -> Option<F2Chain> {
        let mut col: Vec<usize> = c.support().collect();
        let mut pre: Vec<usize> = Vec::new();
        while let Some(&low) = col.last() {
            let &k = self.column_of_low.get(&low)?;
            col = add_sorted(&col, &self.columns[k].0);
            pre = add_sorted(&pre, &self.columns[k].1);
        }
        Some(Chain::from_indices(self.dim + 1, pre))
    }

    pub fn contains(&self, c: &F2Chain) -> bool {
        self.preimage(c).is_some()
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }
}
