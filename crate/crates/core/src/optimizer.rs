//! Time-optimal representatives for the classes of a persistence diagram.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{Chain, F2Chain};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::lp::{build_lp, restrict_sets, solve, CycleSolution, LpBackend, DEFAULT_ROUND_TOL};
use crate::reduction::{PersistencePair, ReducedDecomposition};
use crate::simplex::Simplex;
use crate::weights::{
    euclidean_length_weights, length_weights, simplex_weights, time_dispersion, vertex_weights, WeightKind,
    WeightMatrix,
};

/// How far below the death value a representative may be born.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum RelaxationPolicy {
    /// Born at the class's own birth value.
    Full,
    /// `eps = rho * (death - birth)` for `rho` in `(0, 1]`.
    Fraction(f64),
    /// A fixed `eps`.
    AbsoluteBound(f64),
}

impl RelaxationPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RelaxationPolicy::Fraction(rho) if !(rho > 0.0 && rho <= 1.0) => {
                Err(Error::Relaxation(format!("fraction must lie in (0, 1], got {rho}")))
            }
            RelaxationPolicy::AbsoluteBound(eps) if !(eps > 0.0 && eps.is_finite()) => {
                Err(Error::Relaxation(format!("bound must be positive, got {eps}")))
            }
            _ => Ok(()),
        }
    }

    /// The relaxed birth `death - eps`. Never earlier than the birth itself,
    /// where the initial representative is first alive.
    pub fn relaxed_birth(&self, pair: &PersistencePair) -> Result<f64> {
        self.validate()?;
        let (b, d) = (pair.birth, pair.death);
        match *self {
            RelaxationPolicy::Full => Ok(b),
            _ if pair.is_essential() => Err(Error::Relaxation("essential classes only admit full persistence".into())),
            RelaxationPolicy::Fraction(1.0) => Ok(b),
            RelaxationPolicy::Fraction(rho) => Ok((d - rho * (d - b)).max(b)),
            RelaxationPolicy::AbsoluteBound(eps) => {
                let slack = 1e-12 * d.abs().max(1.0);
                if eps > d - b + slack {
                    return Err(Error::Relaxation(format!(
                        "bound {eps} exceeds the persistence {} of the class",
                        d - b
                    )));
                }
                Ok((d - eps).max(b))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizedRepresentative {
    pub pair: PersistencePair,
    pub policy: RelaxationPolicy,
    pub kind: WeightKind,
    pub relaxed_birth: f64,
    pub num_p: usize,
    pub num_q: usize,
    pub solution: CycleSolution,
    /// Time dispersion of the rounded support, or of the fractional support
    /// when rounding does not give a cycle.
    pub dispersion: f64,
    pub initial_dispersion: f64,
    /// The rounded solution has zero boundary.
    pub is_cycle: bool,
    /// The rounded solution differs from the initial one by a boundary alive
    /// at the relaxed birth.
    pub homologous: bool,
    /// The rounded solution is not yet a boundary just before the death value.
    /// `None` for essential classes.
    pub persists: Option<bool>,
}

impl OptimizedRepresentative {
    /// The chain reported to users: the rounded cycle when valid, else the
    /// fractional support.
    pub fn representative(&self) -> F2Chain {
        if self.is_cycle && !self.solution.fractional {
            self.solution.rounded.clone()
        } else {
            Chain::from_indices(self.pair.dim, self.solution.support.iter().copied())
        }
    }
}

/// Weights of the requested kind over the given simplices.
pub fn weights_for(kind: WeightKind, f: &Filtration, set: &[usize], labels: &[f64]) -> WeightMatrix {
    let simplices: Vec<&Simplex> = set.iter().map(|&i| f.simplex(i)).collect();
    match kind {
        WeightKind::VertexBased => vertex_weights(&simplices, labels),
        WeightKind::SimplexBased => simplex_weights(&simplices, labels),
        WeightKind::Length => length_weights(set.len()),
        WeightKind::EuclideanLength => euclidean_length_weights(&set.iter().map(|&i| f.value(i)).collect::<Vec<_>>()),
    }
}

/// Time dispersion of an F2 chain given by filtration indices.
pub fn chain_dispersion(f: &Filtration, c: &F2Chain, labels: &[f64]) -> Result<f64> {
    time_dispersion(c.support().map(|i| f.simplex(i)), labels)
}

/// Solves the optimal-cycle program for classes of one filtration.
pub struct Optimizer<'a> {
    pub filtration: &'a Filtration,
    pub decomposition: &'a ReducedDecomposition,
    /// Time label of each vertex id.
    pub labels: &'a [f64],
    pub backend: &'a dyn LpBackend,
    pub round_tol: f64,
}

impl<'a> Optimizer<'a> {
    pub fn new(
        filtration: &'a Filtration,
        decomposition: &'a ReducedDecomposition,
        labels: &'a [f64],
        backend: &'a dyn LpBackend,
    ) -> Self {
        Optimizer { filtration, decomposition, labels, backend, round_tol: DEFAULT_ROUND_TOL }
    }

    pub fn optimize_class(
        &self,
        pair: &PersistencePair,
        policy: RelaxationPolicy,
        kind: WeightKind,
    ) -> Result<OptimizedRepresentative> {
        let f = self.filtration;
        let relaxed_birth = policy.relaxed_birth(pair)?;
        let sets = restrict_sets(f, self.decomposition, pair.dim, relaxed_birth)?;
        let (num_p, num_q) = (sets.p_set.len(), sets.q_set.len());
        let weights = weights_for(kind, f, &sets.p_set, self.labels);
        let lp = build_lp(f, sets, &pair.initial_rep, weights)?;
        let solution = solve(&lp, self.backend, self.round_tol)?;

        let rounded = &solution.rounded;
        let is_cycle = pair.dim == 0 || f.boundary(rounded)?.is_zero();
        let mut difference = rounded.clone();
        difference.add_assign(&pair.initial_rep);
        let homologous = is_cycle && self.decomposition.is_boundary_at(f, &difference, relaxed_birth);
        let persists = pair.death_simplex.map(|_| {
            let before = f.values().partition_point(|&v| v < pair.death);
            before == 0 || !self.decomposition.is_boundary_at(f, rounded, f.values()[before - 1])
        });
        let reported = if is_cycle && !solution.fractional {
            rounded.clone()
        } else {
            Chain::from_indices(pair.dim, solution.support.iter().copied())
        };
        let dispersion = if reported.is_zero() { 0.0 } else { chain_dispersion(f, &reported, self.labels)? };
        let initial_dispersion = chain_dispersion(f, &pair.initial_rep, self.labels)?;
        Ok(OptimizedRepresentative {
            pair: pair.clone(),
            policy,
            kind,
            relaxed_birth,
            num_p,
            num_q,
            solution,
            dispersion,
            initial_dispersion,
            is_cycle,
            homologous,
            persists,
        })
    }

    /// Optimizes every significant class for every kind. Results are ordered
    /// by persistence, longest first, then by kind.
    pub fn optimize_all(
        &self,
        diagram: &[PersistencePair],
        policy: RelaxationPolicy,
        kinds: &[WeightKind],
        sig: Significance,
    ) -> Result<Vec<OptimizedRepresentative>> {
        let selected = significant_classes(diagram, sig);
        let jobs: Vec<(&PersistencePair, WeightKind)> =
            selected.iter().flat_map(|&p| kinds.iter().map(move |&k| (p, k))).collect();
        jobs.par_iter().map(|&(pair, kind)| self.optimize_class(pair, policy, kind)).collect()
    }
}

/// Which classes of a diagram are worth optimizing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Significance {
    /// Minimum persistence; `None` means half the largest.
    pub threshold: Option<f64>,
    /// Death value assumed for essential classes, usually the radius cap.
    /// With an infinite value essential classes always qualify and do not
    /// enter the default threshold.
    pub essential_death: f64,
}

impl Default for Significance {
    fn default() -> Self {
        Significance { threshold: None, essential_death: f64::INFINITY }
    }
}

impl Significance {
    pub fn with_threshold(threshold: f64) -> Self {
        Significance { threshold: Some(threshold), ..Default::default() }
    }

    pub fn capped_at(essential_death: f64) -> Self {
        Significance { threshold: None, essential_death }
    }

    /// The explicit threshold, or half the largest finite persistence (zero
    /// when there is none).
    pub fn resolve(&self, diagram: &[PersistencePair]) -> f64 {
        self.threshold.unwrap_or_else(|| {
            0.5 * diagram
                .iter()
                .map(|p| p.persistence_capped(self.essential_death))
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max)
        })
    }
}

/// Classes with persistence at least the resolved threshold, longest first;
/// ties keep birth-simplex order.
pub fn significant_classes(diagram: &[PersistencePair], sig: Significance) -> Vec<&PersistencePair> {
    let t = sig.resolve(diagram);
    let pers = |p: &PersistencePair| p.persistence_capped(sig.essential_death);
    let mut selected: Vec<&PersistencePair> = diagram.iter().filter(|p| pers(p) >= t).collect();
    selected.sort_by(|a, b| pers(b).total_cmp(&pers(a)).then(a.birth_simplex.cmp(&b.birth_simplex)));
    selected
}
