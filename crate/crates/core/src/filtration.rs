//! Filtered simplicial complexes and their boundary operators.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, Coefficient};
use crate::error::{Error, Result};
use crate::simplex::Simplex;

/// A simplicial complex with a monotone filtration value per simplex.
///
/// Simplices are stored in filtration order: ascending value, then dimension,
/// then lexicographic vertex order. Every face precedes its cofaces.
#[derive(Clone, Debug)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    values: Vec<f64>,
    index: HashMap<Simplex, usize>,
    by_dim: Vec<Vec<usize>>,
}

impl Filtration {
    /// Sorts the entries into filtration order and checks closure under faces
    /// and monotonicity of values.
    pub fn new(mut entries: Vec<(Simplex, f64)>) -> Result<Self> {
        if let Some((s, v)) = entries.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidFiltration(format!("value {v} of {s} must be finite and >= 0")));
        }
        entries.sort_by(|(a, va), (b, vb)| va.total_cmp(vb).then(a.dim().cmp(&b.dim())).then_with(|| a.cmp(b)));
        let mut index = HashMap::with_capacity(entries.len());
        let mut by_dim: Vec<Vec<usize>> = Vec::new();
        for (i, (s, _)) in entries.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidFiltration(format!("duplicate simplex {s}")));
            }
            if by_dim.len() <= s.dim() {
                by_dim.resize(s.dim() + 1, Vec::new());
            }
            by_dim[s.dim()].push(i);
        }
        for (s, v) in &entries {
            for (face, _) in s.faces() {
                match index.get(&face) {
                    None => return Err(Error::InvalidFiltration(format!("face {face} of {s} missing"))),
                    Some(&fi) if entries[fi].1 > *v => {
                        return Err(Error::InvalidFiltration(format!(
                            "face {face} enters at {} after coface {s} at {v}",
                            entries[fi].1
                        )))
                    }
                    _ => {}
                }
            }
        }
        let (simplices, values) = entries.into_iter().unzip();
        Ok(Filtration { simplices, values, index, by_dim })
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplex(&self, i: usize) -> &Simplex {
        &self.simplices[i]
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim_of(&self, i: usize) -> usize {
        self.simplices[i].dim()
    }

    /// Highest simplex dimension present.
    pub fn max_dim(&self) -> usize {
        self.by_dim.len().saturating_sub(1)
    }

    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Indices of all `p`-simplices in filtration order.
    pub fn indices_of_dim(&self, p: usize) -> &[usize] {
        self.by_dim.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_vertices(&self) -> usize {
        self.indices_of_dim(0).len()
    }

    /// Signed faces of simplex `i` as `(face index, (-1)^k)`.
    pub fn boundary_of(&self, i: usize) -> Vec<(usize, i8)> {
        self.simplices[i].faces().map(|(f, sign)| (self.index[&f], sign)).collect()
    }

    /// Boundary of a chain; the coefficient type selects the field mode.
    pub fn boundary<C: Coefficient>(&self, c: &Chain<C>) -> Result<Chain<C>> {
        if c.dim() == 0 {
            return Err(Error::NoBoundaryBelowZero);
        }
        let mut out = Chain::zero(c.dim() - 1);
        for (i, coef) in c.iter() {
            self.check_index(i, c.dim())?;
            for (f, sign) in self.boundary_of(i) {
                out.add_term(f, coef.mul(C::from_sign(sign)));
            }
        }
        Ok(out)
    }

    /// Least filtration value at which the chain exists.
    pub fn chain_birth<C: Coefficient>(&self, c: &Chain<C>) -> Result<f64> {
        let mut birth: Option<f64> = None;
        for i in c.support() {
            self.check_index(i, c.dim())?;
            birth = Some(birth.map_or(self.values[i], |b| b.max(self.values[i])));
        }
        birth.ok_or(Error::ZeroChainBirth)
    }

    fn check_index(&self, i: usize, dim: usize) -> Result<()> {
        match self.simplices.get(i) {
            None => Err(Error::UnknownSimplex(format!("index {i}"))),
            Some(s) if s.dim() != dim => Err(Error::DimensionMismatch { expected: dim, found: s.dim() }),
            Some(_) => Ok(()),
        }
    }
}

/// Coefficient field of a boundary matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldMode {
    F2,
    Real,
}

/// The filtration boundary matrix, one sparse column per simplex, with rows
/// sorted ascending by filtration index.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    mode: FieldMode,
    columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn new(f: &Filtration, mode: FieldMode) -> Self {
        let columns = (0..f.len())
            .map(|i| {
                let mut col = f.boundary_of(i);
                if mode == FieldMode::F2 {
                    col.iter_mut().for_each(|e| e.1 = 1);
                }
                col.sort_unstable_by_key(|e| e.0);
                col
            })
            .collect();
        BoundaryMatrix { mode, columns }
    }

    pub fn mode(&self) -> FieldMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }
}
