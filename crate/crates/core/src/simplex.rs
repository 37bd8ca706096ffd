use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Vertex storage; covers simplices up to dimension 4 without allocating.
pub type Vertices = SmallVec<[usize; 5]>;

/// An abstract simplex given by its strictly increasing vertex ids.
///
/// The increasing order of vertex ids also fixes the orientation used by the
/// signed boundary operator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex {
    vertices: Vertices,
}

impl Simplex {
    /// Builds a simplex from any vertex order. Duplicates are rejected.
    pub fn new<I: IntoIterator<Item = usize>>(vertices: I) -> Result<Self> {
        let mut v: Vertices = vertices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::InvalidSimplex("no vertices".into()));
        }
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSimplex(format!("duplicate vertex in {v:?}")));
        }
        Ok(Simplex { vertices: v })
    }

    /// Caller guarantees strictly increasing vertices.
    pub(crate) fn from_sorted_unchecked(vertices: Vertices) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex { vertices }
    }

    pub fn vertex(v: usize) -> Self {
        Simplex { vertices: smallvec::smallvec![v] }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-one faces paired with the sign `(-1)^i` of the removed
    /// position `i`. Empty for vertices.
    pub fn faces(&self) -> impl Iterator<Item = (Simplex, i8)> + '_ {
        let n = if self.vertices.len() > 1 { self.vertices.len() } else { 0 };
        (0..n).map(move |i| {
            let face: Vertices = self.vertices.iter().enumerate().filter_map(|(k, &v)| (k != i).then_some(v)).collect();
            let sign = if i % 2 == 0 { 1 } else { -1 };
            (Simplex { vertices: face }, sign)
        })
    }

    /// Number of shared vertices.
    pub fn intersection_len(&self, other: &Simplex) -> usize {
        let (a, b) = (&self.vertices, &other.vertices);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices.as_slice())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.vertices.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_rejects_duplicates() {
        let s = Simplex::new([2, 0, 1]).unwrap();
        assert_eq!(s.vertices(), &[0, 1, 2]);
        assert_eq!(s.dim(), 2);
        assert!(Simplex::new([1, 1]).is_err());
        assert!(Simplex::new(std::iter::empty()).is_err());
    }

    #[test]
    fn faces_carry_alternating_signs() {
        let s = Simplex::new([0, 1, 2]).unwrap();
        let faces: Vec<_> = s.faces().map(|(f, sg)| (f.vertices().to_vec(), sg)).collect();
        assert_eq!(faces, vec![(vec![1, 2], 1), (vec![0, 2], -1), (vec![0, 1], 1)]);
        assert_eq!(Simplex::vertex(3).faces().count(), 0);
    }

    #[test]
    fn intersection() {
        let a = Simplex::new([0, 1, 2]).unwrap();
        let b = Simplex::new([0, 1, 3]).unwrap();
        assert_eq!(a.intersection_len(&b), 2);
    }
}
