//! Lifting an F2 cycle to a real cycle with coefficients in {-1, +1}.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::simplex::Simplex;

const MAX_STEPS: usize = 1_000_000;

/// Signs, in support order, such that the signed sum of the given simplices
/// has zero real boundary. `support` holds filtration indices of simplices of
/// one dimension whose F2 boundary vanishes.
pub fn lift_signs(f: &Filtration, support: &[usize]) -> Result<Vec<f64>> {
    if support.is_empty() {
        return Ok(Vec::new());
    }
    let dim = f.dim_of(support[0]);
    match dim {
        0 => Ok(vec![1.0; support.len()]),
        1 => Ok(euler_orientation(f, support)),
        _ => SignSearch::new(f, support).run(),
    }
}

/// Walks closed trails through the edge set; traversing an edge from its
/// smaller vertex gives it sign +1. Every vertex has even degree, so each walk
/// returns to its start and in- and out-degrees balance.
fn euler_orientation(f: &Filtration, support: &[usize]) -> Vec<f64> {
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &e) in support.iter().enumerate() {
        for &v in f.simplex(e).vertices() {
            incident.entry(v).or_default().push(k);
        }
    }
    let mut signs = vec![0.0; support.len()];
    let mut cursor: HashMap<usize, usize> = HashMap::new();
    for start_edge in 0..support.len() {
        if signs[start_edge] != 0.0 {
            continue;
        }
        let start = f.simplex(support[start_edge]).vertices()[0];
        let mut at = start;
        loop {
            let list = &incident[&at];
            let pos = cursor.entry(at).or_insert(0);
            while *pos < list.len() && signs[list[*pos]] != 0.0 {
                *pos += 1;
            }
            if *pos == list.len() {
                break;
            }
            let k = list[*pos];
            let s = f.simplex(support[k]);
            let (a, b) = (s.vertices()[0], s.vertices()[1]);
            signs[k] = if at == a { 1.0 } else { -1.0 };
            at = if at == a { b } else { a };
        }
    }
    signs
}

/// Backtracking over signs with propagation: every codimension-one face must
/// see as many positive as negative incidences.
struct SignSearch {
    /// For each face, incident support positions with their boundary sign.
    faces: Vec<Vec<(usize, f64)>>,
    /// For each support position, the faces it touches.
    touches: Vec<Vec<usize>>,
    signs: Vec<f64>,
    steps: usize,
}

impl SignSearch {
    fn new(f: &Filtration, support: &[usize]) -> Self {
        let mut face_id: HashMap<Simplex, usize> = HashMap::new();
        let mut faces: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut touches = vec![Vec::new(); support.len()];
        for (k, &s) in support.iter().enumerate() {
            for (face, sign) in f.simplex(s).faces() {
                let next = faces.len();
                let id = *face_id.entry(face).or_insert(next);
                if id == next {
                    faces.push(Vec::new());
                }
                faces[id].push((k, f64::from(sign)));
                touches[k].push(id);
            }
        }
        SignSearch { faces, touches, signs: vec![0.0; support.len()], steps: 0 }
    }

    fn run(mut self) -> Result<Vec<f64>> {
        if self.search()? {
            Ok(self.signs)
        } else {
            Err(Error::OrientationLift("support is not orientable".into()))
        }
    }

    /// Propagates forced signs from the given faces; returns the positions
    /// assigned, or `None` on a contradiction (assignments are rolled back).
    fn propagate(&mut self, mut queue: Vec<usize>) -> Option<Vec<usize>> {
        let mut assigned = Vec::new();
        while let Some(face) = queue.pop() {
            let (mut sum, mut free) = (0.0, 0usize);
            for &(k, e) in &self.faces[face] {
                if self.signs[k] == 0.0 {
                    free += 1;
                } else {
                    sum += e * self.signs[k];
                }
            }
            if sum.abs() > free as f64 {
                for k in assigned {
                    self.signs[k] = 0.0;
                }
                return None;
            }
            if free > 0 && sum.abs() == free as f64 {
                // every free incidence must push the sum back to zero
                let forced: Vec<(usize, f64)> = self.faces[face]
                    .iter()
                    .filter(|(k, _)| self.signs[*k] == 0.0)
                    .map(|&(k, e)| (k, -sum.signum() * e))
                    .collect();
                for (k, s) in forced {
                    self.signs[k] = s;
                    assigned.push(k);
                    queue.extend(self.touches[k].iter().copied());
                }
            }
        }
        Some(assigned)
    }

    fn search(&mut self) -> Result<bool> {
        let Some(k) = self.signs.iter().position(|&s| s == 0.0) else { return Ok(true) };
        for s in [1.0, -1.0] {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(Error::OrientationLift(format!("search exceeded {MAX_STEPS} steps")));
            }
            self.signs[k] = s;
            if let Some(assigned) = self.propagate(self.touches[k].clone()) {
                if self.search()? {
                    return Ok(true);
                }
                for a in assigned {
                    self.signs[a] = 0.0;
                }
            }
            self.signs[k] = 0.0;
        }
        Ok(false)
    }
}
