use alloc::format;
use alloc::vec::Vec;

use super::{dot, sym_eig, Matrix};
use crate::math;
use crate::{Error, Result};

/// Covariance eigenvalues at or below `EIGEN_FLOOR · λ_max` count as zero.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Per-row sample means.
pub fn row_means(x: &Matrix) -> Vec<f64> {
    let m = x.cols() as f64;
    (0..x.rows())
        .map(|r| x.row(r).iter().sum::<f64>() / m)
        .collect()
}

/// `x` with each row's mean removed.
pub fn center(x: &Matrix) -> (Matrix, Vec<f64>) {
    let mean = row_means(x);
    let mut centered = x.clone();
    for (r, mu) in mean.iter().enumerate() {
        centered.row_mut(r).iter_mut().for_each(|v| *v -= mu);
    }
    (centered, mean)
}

/// Sample covariance `(1/cols) Σ_t (x_t − x̄)(x_t − x̄)ᵀ`.
///
/// Normalized by the sample count, matching the expectation operator.
pub fn covariance(x: &Matrix) -> Result<Matrix> {
    if x.cols() < 2 {
        return Err(Error::Dimension(format!(
            "covariance needs at least 2 samples, got {}",
            x.cols()
        )));
    }
    let (centered, _) = center(x);
    Ok(second_moments(&centered))
}

/// `(1/cols) x xᵀ` without centering.
pub(crate) fn second_moments(x: &Matrix) -> Matrix {
    let n = x.rows();
    let m = x.cols() as f64;
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dot(x.row(i), x.row(j)) / m;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Affine map between raw observations and their whitened coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Whitening {
    /// `Z = Λ^{-1/2} Eᵀ`, applied to centered data.
    pub whitener: Matrix,
    /// `E Λ^{1/2}`, the inverse of `whitener`.
    pub dewhitener: Matrix,
    pub mean: Vec<f64>,
}

impl Whitening {
    /// `whitener · (x − mean)`.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let mut centered = x.clone();
        if centered.rows() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "whitening fitted on {} rows, got {}",
                self.mean.len(),
                x.rows()
            )));
        }
        for (r, mu) in self.mean.iter().enumerate() {
            centered.row_mut(r).iter_mut().for_each(|v| *v -= mu);
        }
        self.whitener.matmul(&centered)
    }

    /// `dewhitener · z + mean`.
    pub fn restore(&self, z: &Matrix) -> Result<Matrix> {
        let mut x = self.dewhitener.matmul(z)?;
        for (r, mu) in self.mean.iter().enumerate() {
            x.row_mut(r).iter_mut().for_each(|v| *v += mu);
        }
        Ok(x)
    }
}

/// Center and whiten `x` so its sample covariance is the identity.
///
/// Fails with [`Error::SingularData`] when any covariance eigenvalue is at or
/// below [`EIGEN_FLOOR`]` · λ_max`.
pub fn whiten(x: &Matrix) -> Result<(Matrix, Whitening)> {
    let (centered, mean) = center(x);
    if x.cols() < 2 {
        return Err(Error::Dimension(format!(
            "whitening needs at least 2 samples, got {}",
            x.cols()
        )));
    }
    let cov = second_moments(&centered);
    let eig = sym_eig(&cov)?;
    let n = x.rows();
    let top = eig.values[0];
    let deficient = eig
        .values
        .iter()
        .filter(|&&l| !(top > 0.0 && l > EIGEN_FLOOR * top))
        .count();
    if deficient > 0 {
        return Err(Error::SingularData { deficient, dims: n });
    }

    let whitener = Matrix::from_fn(n, n, |i, j| eig.vectors[(j, i)] / math::sqrt(eig.values[i]));
    let dewhitener = Matrix::from_fn(n, n, |i, j| eig.vectors[(i, j)] * math::sqrt(eig.values[j]));
    let z = &whitener * &centered;
    Ok((
        z,
        Whitening {
            whitener,
            dewhitener,
            mean,
        },
    ))
}

/// Orthonormal basis (as rows) of the numerically nonzero principal
/// subspace of `x`'s covariance.
pub fn principal_basis(x: &Matrix) -> Result<Matrix> {
    let cov = covariance(x)?;
    let eig = sym_eig(&cov)?;
    let top = eig.values[0];
    let rank = eig
        .values
        .iter()
        .take_while(|&&l| top > 0.0 && l > EIGEN_FLOOR * top)
        .count()
        .max(1);
    Ok(Matrix::from_fn(rank, x.rows(), |i, j| eig.vectors[(j, i)]))
}
