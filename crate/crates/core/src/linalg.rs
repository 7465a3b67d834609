//! Dense symmetric eigen-machinery shared by the BS correlation matrix and the
//! surface-field sampler.

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Eigenpairs of a real symmetric matrix, eigenvalues in descending order.
pub(crate) struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

pub(crate) fn symmetric_eigen(matrix: &Mat<f64>) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    let evd = matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::CovarianceRepairFailure(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let values = order.iter().map(|&k| s[k]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(SymmetricEigen { values, vectors })
}

/// Low-rank square-root factor `L` of a unit-diagonal correlation matrix after
/// clamping negative eigenvalues, with `L L^T` rescaled back to unit diagonal.
pub(crate) struct CorrelationFactor {
    pub factor: Mat<f64>,
    /// Negative eigenvalue mass divided by total positive mass.
    pub clipped_mass: f64,
}

/// Factor a symmetric correlation matrix.
///
/// Eigenvalues below zero are clamped. Trailing positive modes are dropped
/// while the dropped contribution to every diagonal entry stays below
/// `truncation_tol`, which bounds every entry of the discarded part.
pub(crate) fn factor_correlation(
    matrix: &Mat<f64>,
    reject_ratio: f64,
    truncation_tol: f64,
) -> Result<CorrelationFactor> {
    let n = matrix.nrows();
    let eig = symmetric_eigen(matrix)?;
    let max_eigenvalue = eig.values[0];
    let min_eigenvalue = *eig.values.last().expect("non-empty matrix");
    if min_eigenvalue < -reject_ratio * max_eigenvalue.abs() {
        return Err(Error::CovarianceRepairFailure(format!(
            "eigenvalue {min_eigenvalue:.3e} below -{reject_ratio:.0e} x max eigenvalue {max_eigenvalue:.3e}"
        )));
    }
    let positive: f64 = eig.values.iter().filter(|&&v| v > 0.0).sum();
    let negative: f64 = eig.values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    let clipped_mass = if positive > 0.0 { negative / positive } else { 1.0 };

    let mut rank = eig.values.iter().take_while(|&&v| v > 0.0).count();
    let mut dropped = vec![0.0; n];
    while rank > 1 {
        let k = rank - 1;
        let lambda = eig.values[k];
        let fits = (0..n).all(|i| dropped[i] + lambda * eig.vectors[(i, k)].powi(2) <= truncation_tol);
        if !fits {
            break;
        }
        for (i, d) in dropped.iter_mut().enumerate() {
            *d += lambda * eig.vectors[(i, k)].powi(2);
        }
        rank -= 1;
    }
    let rank = rank.max(1);

    let mut factor = Mat::from_fn(n, rank, |i, k| eig.vectors[(i, k)] * eig.values[k].max(0.0).sqrt());
    for i in 0..n {
        let diag: f64 = (0..rank).map(|k| factor[(i, k)].powi(2)).sum();
        if diag <= 0.0 {
            return Err(Error::CovarianceRepairFailure(format!("row {i} lost all variance")));
        }
        let scale = diag.sqrt().recip();
        for k in 0..rank {
            factor[(i, k)] *= scale;
        }
    }
    Ok(CorrelationFactor { factor, clipped_mass })
}

/// `L L^T` for a tall factor.
pub(crate) fn gram(factor: &Mat<f64>) -> Mat<f64> {
    factor * factor.transpose()
}
