//! Loss weights over a restricted set of `p`-simplices.
//!
//! Each matrix is summarised for the linear program by its column costs
//! `sum_i w_ij`, the per-simplex price of `|c_j|` in `sum_i sum_j w_ij |c_j|`.

use std::borrow::Borrow;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::Simplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Diagonal: vertex time-label spread of each simplex.
    VertexBased,
    /// Time-label differences between adjacent simplices.
    SimplexBased,
    /// Identity; minimizes the number of simplices.
    Length,
    /// Diagonal: filtration diameter of each simplex (edge length for Rips).
    EuclideanLength,
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::VertexBased => "vertex",
            WeightKind::SimplexBased => "simplex",
            WeightKind::Length => "length",
            WeightKind::EuclideanLength => "euclidean",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vertex" | "vertex_based" => Ok(WeightKind::VertexBased),
            "simplex" | "simplex_based" => Ok(WeightKind::SimplexBased),
            "length" => Ok(WeightKind::Length),
            "euclidean" | "euclidean_length" => Ok(WeightKind::EuclideanLength),
            other => Err(Error::InvalidParameter(format!("unknown weight kind {other:?}"))),
        }
    }
}

/// Sparse non-negative weight matrix over positions `0..size` of a simplex set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub kind: WeightKind,
    size: usize,
    /// Nonzero entries `(i, j, w_ij)`, sorted by `(i, j)`.
    entries: Vec<(usize, usize, f64)>,
    column_costs: Vec<f64>,
}

impl WeightMatrix {
    fn diagonal(kind: WeightKind, diag: Vec<f64>) -> Self {
        let entries = diag.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(i, &w)| (i, i, w)).collect();
        WeightMatrix { kind, size: diag.len(), entries, column_costs: diag }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.binary_search_by(|e| (e.0, e.1).cmp(&(i, j))).map_or(0.0, |k| self.entries[k].2)
    }

    pub fn column_costs(&self) -> &[f64] {
        &self.column_costs
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|e| e.0 == e.1)
    }
}

/// Mean time label of the vertices of `s`.
pub fn simplex_time_label(s: &Simplex, labels: &[f64]) -> f64 {
    s.vertices().iter().map(|&v| labels[v]).sum::<f64>() / s.vertices().len() as f64
}

fn label_spread(s: &Simplex, labels: &[f64]) -> f64 {
    let (lo, hi) = s
        .vertices()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(labels[v]), hi.max(labels[v])));
    hi - lo
}

/// Two `p`-simplices are adjacent when they share exactly `p` vertices.
pub fn adjacent(a: &Simplex, b: &Simplex) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let p = a.dim();
    Ok(p > 0 && a.intersection_len(b) == p)
}

pub fn vertex_weights<S: Borrow<Simplex>>(set: &[S], labels: &[f64]) -> WeightMatrix {
    WeightMatrix::diagonal(WeightKind::VertexBased, set.iter().map(|s| label_spread(s.borrow(), labels)).collect())
}

/// `w_ij = |T(s_i) - T(s_j)|` for adjacent pairs within `set`.
pub fn simplex_weights<S: Borrow<Simplex>>(set: &[S], labels: &[f64]) -> WeightMatrix {
    let times: Vec<f64> = set.iter().map(|s| simplex_time_label(s.borrow(), labels)).collect();
    // adjacent simplices share exactly one codimension-one face
    let mut by_face: HashMap<Simplex, Vec<usize>> = HashMap::new();
    for (pos, s) in set.iter().enumerate() {
        if s.borrow().dim() == 0 {
            continue;
        }
        for (face, _) in s.borrow().faces() {
            by_face.entry(face).or_default().push(pos);
        }
    }
    let mut entries = Vec::new();
    for members in by_face.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let w = (times[i] - times[j]).abs();
                if w != 0.0 {
                    entries.push((i, j, w));
                    entries.push((j, i, w));
                }
            }
        }
    }
    entries.sort_by_key(|e| (e.0, e.1));
    let mut column_costs = vec![0.0; set.len()];
    // summation in row order keeps costs independent of hash order
    for &(_, j, w) in &entries {
        column_costs[j] += w;
    }
    WeightMatrix { kind: WeightKind::SimplexBased, size: set.len(), entries, column_costs }
}

pub fn length_weights(size: usize) -> WeightMatrix {
    WeightMatrix::diagonal(WeightKind::Length, vec![1.0; size])
}

pub fn euclidean_length_weights(diameters: &[f64]) -> WeightMatrix {
    WeightMatrix::diagonal(WeightKind::EuclideanLength, diameters.to_vec())
}

/// Max minus min time label over all vertices of the given simplices.
pub fn time_dispersion<'a, I>(simplices: I, labels: &[f64]) -> Result<f64>
where
    I: IntoIterator<Item = &'a Simplex>,
{
    let mut range: Option<(f64, f64)> = None;
    for s in simplices {
        for &v in s.vertices() {
            let t = labels[v];
            range = Some(range.map_or((t, t), |(lo, hi)| (lo.min(t), hi.max(t))));
        }
    }
    range.map(|(lo, hi)| hi - lo).ok_or(Error::ZeroChainDispersion)
}

/// Diagnostic cost of a chain support: for every simplex the largest label
/// difference to an adjacent simplex of the same support, summed.
pub fn adjacent_difference_cost(simplices: &[&Simplex], labels: &[f64]) -> f64 {
    let times: Vec<f64> = simplices.iter().map(|s| simplex_time_label(s, labels)).collect();
    (0..simplices.len())
        .map(|i| {
            (0..simplices.len())
                .filter(|&j| j != i && adjacent(simplices[i], simplices[j]).unwrap_or(false))
                .map(|j| (times[i] - times[j]).abs())
                .fold(0.0, f64::max)
        })
        .sum()
}
