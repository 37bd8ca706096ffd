//! Principal-component projection for plot exports.

use nalgebra::{DMatrix, SymmetricEigen};

/// Coordinates of each point on the top `k` principal axes. Axes beyond the
/// ambient dimension are zero. Each axis is signed so that its largest
/// component is positive, which keeps exports reproducible.
pub fn project(points: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let n = points.len();
    let d = points.first().map_or(0, Vec::len);
    if n == 0 || d == 0 {
        return vec![vec![0.0; k]; n];
    }
    let mean: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axes: Vec<Vec<f64>> = order
        .iter()
        .take(k)
        .map(|&c| {
            let v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                v.iter().map(|x| -x).collect()
            } else {
                v
            }
        })
        .collect();

    (0..n)
        .map(|i| {
            (0..k).map(|a| axes.get(a).map_or(0.0, |axis| (0..d).map(|j| centered[(i, j)] * axis[j]).sum())).collect()
        })
        .collect()
}
