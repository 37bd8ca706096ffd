//! Vietoris–Rips filtrations of labeled point clouds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::embedding::LabeledPointCloud;
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::simplex::{Simplex, Vertices};

pub const MAX_HOMOLOGY_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxRadius {
    /// Diameter of the cloud, i.e. the full complex.
    Enclosing,
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipsConfig {
    /// Highest homology dimension of interest; simplices are built up to
    /// dimension `max_dim + 1`.
    pub max_dim: usize,
    pub max_radius: MaxRadius,
    /// Guard on the total number of simplices.
    pub max_simplices: Option<usize>,
}

impl RipsConfig {
    pub fn new(max_dim: usize, max_radius: MaxRadius) -> Self {
        RipsConfig { max_dim, max_radius, max_simplices: None }
    }

    fn validate(&self) -> Result<()> {
        if self.max_dim == 0 || self.max_dim > MAX_HOMOLOGY_DIM {
            return Err(Error::InvalidParameter(format!(
                "max_dim must lie in 1..={MAX_HOMOLOGY_DIM}, got {}",
                self.max_dim
            )));
        }
        if let MaxRadius::Value(r) = self.max_radius {
            if !(r > 0.0) {
                return Err(Error::InvalidParameter(format!("max_radius must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// Dense Euclidean distance matrix.
pub fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .par_iter()
        .map(|p| points.iter().map(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()).collect())
        .collect()
}

/// Builds the Rips filtration: a simplex enters at the largest pairwise
/// distance among its vertices. Vertex ids are point indices.
pub fn build_rips(pc: &LabeledPointCloud, cfg: &RipsConfig) -> Result<Filtration> {
    cfg.validate()?;
    if pc.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let dist = distance_matrix(pc.points());
    build_rips_from_distances(&dist, cfg)
}

pub fn build_rips_from_distances(dist: &[Vec<f64>], cfg: &RipsConfig) -> Result<Filtration> {
    cfg.validate()?;
    let n = dist.len();
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    let radius = match cfg.max_radius {
        MaxRadius::Enclosing => f64::INFINITY,
        MaxRadius::Value(r) => r,
    };
    let top = cfg.max_dim + 1;
    // neighbours with larger index within the radius
    let upper: Vec<Vec<usize>> = (0..n).map(|i| ((i + 1)..n).filter(|&j| dist[i][j] <= radius).collect()).collect();

    let mut entries: Vec<(Simplex, f64)> = (0..n).map(|v| (Simplex::vertex(v), 0.0)).collect();
    let mut stack: Vec<(Vertices, f64, SmallVec<[usize; 64]>)> = Vec::new();
    for (v, up) in upper.iter().enumerate() {
        stack.push((smallvec::smallvec![v], 0.0, up.iter().copied().collect()));
        while let Some((verts, value, candidates)) = stack.pop() {
            if verts.len() > top {
                continue;
            }
            for (ci, &w) in candidates.iter().enumerate() {
                let new_value = verts.iter().fold(value, |m, &u| m.max(dist[u][w]));
                let mut nv = verts.clone();
                nv.push(w);
                entries.push((Simplex::from_sorted_unchecked(nv.clone()), new_value));
                if let Some(cap) = cfg.max_simplices {
                    if entries.len() > cap {
                        return Err(Error::TooManySimplices { count: entries.len(), cap });
                    }
                }
                if nv.len() <= top {
                    let next: SmallVec<[usize; 64]> =
                        candidates[ci + 1..].iter().copied().filter(|&x| dist[w][x] <= radius).collect();
                    if !next.is_empty() {
                        stack.push((nv, new_value, next));
                    }
                }
            }
        }
    }
    Filtration::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: Vec<Vec<f64>>) -> LabeledPointCloud {
        let labels = (0..points.len()).map(|i| i as f64).collect();
        LabeledPointCloud::new(points, labels).unwrap()
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let pc = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]);
        let f = build_rips(&pc, &RipsConfig::new(1, MaxRadius::Enclosing)).unwrap();
        assert_eq!(f.len(), 7);
        for i in f.indices_of_dim(1) {
            assert!((f.value(*i) - 1.0).abs() < 1e-12);
        }
        assert_eq!(f.indices_of_dim(2).len(), 1);
        assert!((f.value(f.indices_of_dim(2)[0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_edges() {
        let pc = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]);
        let f = build_rips(&pc, &RipsConfig::new(1, MaxRadius::Enclosing)).unwrap();
        let mut vals: Vec<f64> = f.indices_of_dim(1).iter().map(|&i| f.value(i)).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![1.0, 1.0, 1.0, 1.0, 2f64.sqrt(), 2f64.sqrt()]);
        assert_eq!(f.indices_of_dim(2).len(), 4);
    }

    #[test]
    fn radius_cap_and_guard() {
        let pc = cloud(vec![vec![0.0], vec![1.0], vec![3.0]]);
        let f = build_rips(&pc, &RipsConfig::new(1, MaxRadius::Value(1.5))).unwrap();
        assert_eq!(f.indices_of_dim(1).len(), 1);
        let guarded = RipsConfig { max_simplices: Some(4), ..RipsConfig::new(1, MaxRadius::Enclosing) };
        assert!(matches!(build_rips(&pc, &guarded), Err(Error::TooManySimplices { .. })));
        assert!(build_rips(&pc, &RipsConfig::new(4, MaxRadius::Enclosing)).is_err());
    }

    #[test]
    fn duplicate_points_allowed() {
        let pc = cloud(vec![vec![0.0], vec![0.0]]);
        let f = build_rips(&pc, &RipsConfig::new(1, MaxRadius::Enclosing)).unwrap();
        assert_eq!(f.value(f.indices_of_dim(1)[0]), 0.0);
    }
}
