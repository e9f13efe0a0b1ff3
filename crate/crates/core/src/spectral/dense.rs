//! Dense symmetric eigensolver, used for small blocks and as a test oracle.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::operators::{RealOperator, RealSymOperator};

/// All eigenvalues ascending with the matching eigenvectors as columns.
pub fn eigen_decomposition(h: &RealSymOperator) -> (Vec<f64>, DMatrix<f64>) {
    sorted(h)
}

/// All eigenvalues ascending.
pub fn full_spectrum(h: &RealSymOperator) -> Vec<f64> {
    sorted(h).0
}

fn sorted(op: &RealOperator) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(op.dim(), op.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn lowest(op: &RealOperator, k: usize) -> Vec<(f64, Vec<f64>)> {
    let (values, vectors) = sorted(op);
    values
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, v)| (v, vectors.column(i).iter().copied().collect()))
        .collect()
}
