//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    values
}

/// Smallest eigenvalue of the symmetric part (M + Mᵀ)/2.
pub fn min_symmetric_part_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    symmetric_eigenvalues(&sym)[0]
}

/// Largest singular value, computed as sqrt of the top eigenvalue of MᵀM.
pub fn max_singular_value(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let top = *symmetric_eigenvalues(&gram)
        .last()
        .expect("nonempty matrix");
    top.max(0.0).sqrt()
}

/// Smaller eigenvalue of the symmetric 2x2 matrix [[a, b], [b, d]].
pub fn min_eigenvalue_2x2(a: f64, b: f64, d: f64) -> f64 {
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    mean - radius
}

/// Kronecker product M x I_k as a dense matrix.
pub fn kron_with_identity(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut out = DMatrix::zeros(rows * k, cols * k);
    for i in 0..rows {
        for j in 0..cols {
            let v = m[(i, j)];
            if v != 0.0 {
                for t in 0..k {
                    out[(i * k + t, j * k + t)] = v;
                }
            }
        }
    }
    out
}
