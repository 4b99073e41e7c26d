use nalgebra::{DMatrix, SymmetricEigen};

use super::TopicError;
use crate::embedding::EmbeddingMatrix;

/// Swappable dimensionality-reduction step.
pub trait DimensionReducer {
    fn reduce(&self, emb: &EmbeddingMatrix, target_dim: usize, seed: u64) -> Result<EmbeddingMatrix, TopicError>;
}

/// Principal-components projection. Deterministic; the seed is ignored.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pca;

impl DimensionReducer for Pca {
    fn reduce(&self, emb: &EmbeddingMatrix, target_dim: usize, _seed: u64) -> Result<EmbeddingMatrix, TopicError> {
        pca_project(emb, target_dim)
    }
}

/// Convenience wrapper over [`Pca`].
pub fn reduce_dimensions(emb: &EmbeddingMatrix, target_dim: usize, seed: u64) -> Result<EmbeddingMatrix, TopicError> {
    Pca.reduce(emb, target_dim, seed)
}

/// Eigenvalues of the covariance and the matching unit directions as
/// columns. With fewer rows than columns the n×n Gram matrix is decomposed
/// instead and its eigenvectors are mapped back through the data.
fn principal_axes(centered: &DMatrix<f64>, denom: f64) -> (Vec<f64>, DMatrix<f64>) {
    let (n, d) = centered.shape();
    if n >= d {
        let eig = SymmetricEigen::new((centered.transpose() * centered) / denom);
        return (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors);
    }
    let eig = SymmetricEigen::new((centered * centered.transpose()) / denom);
    let mut directions = centered.transpose() * &eig.eigenvectors;
    for (k, mut col) in directions.column_iter_mut().enumerate() {
        let norm = col.norm();
        // Null-space columns are dropped later by the eigenvalue tolerance.
        if norm > 0.0 && eig.eigenvalues[k] > 0.0 {
            col /= norm;
        }
    }
    (eig.eigenvalues.iter().copied().collect(), directions)
}

/// Centers rows and projects them onto the top `target_dim` eigenvectors of
/// the covariance, in descending eigenvalue order. Each eigenvector is signed
/// so its largest-magnitude loading is positive. Directions beyond the data
/// rank become zero columns.
fn pca_project(emb: &EmbeddingMatrix, target_dim: usize) -> Result<EmbeddingMatrix, TopicError> {
    let (n, d) = (emb.len(), emb.dim());
    if target_dim == 0 || target_dim > d {
        return Err(TopicError::InvalidConfig(format!(
            "target dimension {target_dim} must be in 1..={d}"
        )));
    }
    if n == 0 {
        return Err(TopicError::TooFewPoints { got: 0, need: 1 });
    }

    let mut mean = vec![0.0; d];
    for row in emb.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| emb.row(i)[j] - mean[j]);

    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let (eigenvalues, directions) = principal_axes(&centered, denom);

    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let max_eig = eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let tol = max_eig * 1e-10;

    let mut basis = DMatrix::<f64>::zeros(d, target_dim);
    let mut rank = 0;
    for (col, &k) in order.iter().take(target_dim).enumerate() {
        if eigenvalues[k] <= tol || max_eig <= 0.0 {
            continue;
        }
        rank += 1;
        let mut v = directions.column(k).into_owned();
        let (mut best, mut best_abs) = (0, -1.0);
        for (i, x) in v.iter().enumerate() {
            if x.abs() > best_abs + 1e-12 {
                best = i;
                best_abs = x.abs();
            }
        }
        if v[best] < 0.0 {
            v.neg_mut();
        }
        basis.set_column(col, &v);
    }
    if rank < target_dim {
        log::warn!("input rank {rank} below target dimension {target_dim}; padding with zero columns");
    }

    let projected = centered * basis;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| projected.row(i).iter().cloned().collect()).collect();
    EmbeddingMatrix::new(emb.ids().to_vec(), rows, target_dim, emb.kind()).map_err(TopicError::from)
}
