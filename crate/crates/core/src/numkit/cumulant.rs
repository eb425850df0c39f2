//! Fourth-order cumulants of (whitened) data in quadricovariance form.
//!
//! The cumulant tensor `T_ijkl` acts on symmetric matrices as
//! `M ↦ Σ_kl T_ijkl M_kl`. Vectorizing symmetric matrices over the
//! `n(n+1)/2` index pairs `i ≤ j`, with off-diagonal coordinates scaled by
//! `√2` so the map is an isometry, turns that operator into a symmetric
//! matrix `Q` (the quadricovariance). Its eigenvectors are the cumulant
//! eigen-matrices.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use super::{dot, second_moments, sym_eig, Matrix};
use crate::math;
use crate::{Error, Result};

/// Eigen-matrices of the fourth-order cumulant operator.
#[derive(Clone, Debug)]
pub struct CumulantSet {
    /// Symmetric `n×n` eigen-matrices, unit Frobenius norm.
    pub matrices: Vec<Matrix>,
    /// Matching eigenvalues, ordered by `|weight|` descending.
    pub weights: Vec<f64>,
    /// Fewer than `10·n²` samples backed the estimate.
    pub undersampled: bool,
}

impl CumulantSet {
    /// A set with explicit matrices and weights.
    pub fn new(matrices: Vec<Matrix>, weights: Vec<f64>) -> Result<Self> {
        if matrices.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} matrices but {} weights",
                matrices.len(),
                weights.len()
            )));
        }
        Ok(Self {
            matrices,
            weights,
            undersampled: false,
        })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// Index pairs `(i, j)` with `i ≤ j`, in row order.
pub fn symmetric_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

#[inline]
fn pair_scale(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        SQRT_2
    }
}

/// Quadricovariance of `z` over [`symmetric_pairs`].
///
/// `T_ijkl = E[z_i z_j z_k z_l] − R_ij R_kl − R_ik R_jl − R_il R_jk` with
/// `R` the sample second moments, which equals the identity for whitened
/// input. The data is treated as zero-mean.
pub fn quadricovariance(z: &Matrix) -> Matrix {
    let n = z.rows();
    let m = z.cols();
    let pairs = symmetric_pairs(n);
    let np = pairs.len();
    let r = second_moments(z);

    let mut products = Matrix::zeros(np, m);
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let s = pair_scale(i, j);
        let (zi, zj) = (z.row(i), z.row(j));
        for ((u, a), b) in products.row_mut(p).iter_mut().zip(zi).zip(zj) {
            *u = s * a * b;
        }
    }

    let mut q = gram(&products);
    let inv_m = 1.0 / m as f64;
    for (p, &(i, j)) in pairs.iter().enumerate() {
        for (pq, &(k, l)) in pairs.iter().enumerate().skip(p) {
            let moment = q[(p, pq)] * inv_m;
            let gauss = r[(i, j)] * r[(k, l)] + r[(i, k)] * r[(j, l)] + r[(i, l)] * r[(j, k)];
            let v = moment - pair_scale(i, j) * pair_scale(k, l) * gauss;
            q[(p, pq)] = v;
            q[(pq, p)] = v;
        }
    }
    q
}

/// Upper-triangular-filled Gram matrix `x xᵀ`, blocked over rows.
fn gram(x: &Matrix) -> Matrix {
    const BLOCK: usize = 8;
    let n = x.rows();
    let mut g = Matrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        for j in start..n {
            let xj = x.row(j);
            for i in start..end.min(j + 1) {
                g[(i, j)] = dot(x.row(i), xj);
            }
        }
        start = end;
    }
    g
}

/// Unvectorize an isometric pair vector into a symmetric matrix.
fn pair_vector_to_matrix(n: usize, pairs: &[(usize, usize)], v: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(n, n);
    for (&(i, j), &value) in pairs.iter().zip(v) {
        if i == j {
            out[(i, i)] = value;
        } else {
            out[(i, j)] = value / SQRT_2;
            out[(j, i)] = value / SQRT_2;
        }
    }
    out
}

/// The `count` most significant (by `|eigenvalue|`) eigen-matrices of the
/// fourth-order cumulant operator of `z`.
///
/// Fewer than `10·n²` samples only sets [`CumulantSet::undersampled`].
pub fn cum4_eigenmatrices(z: &Matrix, count: usize) -> Result<CumulantSet> {
    let n = z.rows();
    let dim = n * (n + 1) / 2;
    if count == 0 || count > dim {
        return Err(Error::Dimension(format!(
            "eigen-matrix count must be in 1..={dim}, got {count}"
        )));
    }
    let pairs = symmetric_pairs(n);
    let q = quadricovariance(z);
    let eig = sym_eig(&q)?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        math::abs(eig.values[b])
            .total_cmp(&math::abs(eig.values[a]))
            .then(a.cmp(&b))
    });
    let chosen = &order[..count];
    Ok(CumulantSet {
        matrices: chosen
            .iter()
            .map(|&k| pair_vector_to_matrix(n, &pairs, &eig.vector(k)))
            .collect(),
        weights: chosen.iter().map(|&k| eig.values[k]).collect(),
        undersampled: z.cols() < 10 * n * n,
    })
}

/// Squared fourth-order cross-cumulant energy `Σ_{i≠j} Σ_kl T_ijkl²`.
///
/// This is the quantity JADE drives down; it is zero for independent
/// components.
pub fn cross_cumulant_energy(z: &Matrix) -> f64 {
    let q = quadricovariance(z);
    let pairs = symmetric_pairs(z.rows());
    // In isometric coordinates each tensor entry's multiplicity cancels its
    // √2 scaling, so the energy is a plain sum over off-diagonal rows of Q.
    pairs
        .iter()
        .enumerate()
        .filter(|(_, (i, j))| i != j)
        .map(|(p, _)| q.row(p).iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// Marginal fourth cumulant `E[y⁴] − 3E[y²]²` of one zero-mean row.
pub fn kurtosis(row: &[f64]) -> f64 {
    let m = row.len() as f64;
    let (m2, m4) = row.iter().fold((0.0, 0.0), |(a, b), &v| {
        let v2 = v * v;
        (a + v2, b + v2 * v2)
    });
    let m2 = m2 / m;
    m4 / m - 3.0 * m2 * m2
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn bpsk(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut data = Vec::new();
        for r in 0..rows {
            let mut rng = crate::rng::row_stream(seed, r);
            data.extend((0..cols).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }));
        }
        Matrix::new(rows, cols, data).unwrap()
    }

    /// Direct tensor entry from moments, independent of the pair layout.
    fn tensor_entry(z: &Matrix, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let m = z.cols() as f64;
        let e4: f64 = (0..z.cols())
            .map(|t| z[(i, t)] * z[(j, t)] * z[(k, t)] * z[(l, t)])
            .sum::<f64>()
            / m;
        let e2 = |a: usize, b: usize| (0..z.cols()).map(|t| z[(a, t)] * z[(b, t)]).sum::<f64>() / m;
        e4 - e2(i, j) * e2(k, l) - e2(i, k) * e2(j, l) - e2(i, l) * e2(j, k)
    }

    #[test]
    fn quadricovariance_matches_direct_tensor() {
        let mut z = bpsk(3, 400, 2);
        // Make the rows correlated so every term of the formula matters.
        for t in 0..400 {
            z[(2, t)] += 0.5 * z[(0, t)];
        }
        let q = quadricovariance(&z);
        let pairs = symmetric_pairs(3);
        for (p, &(i, j)) in pairs.iter().enumerate() {
            for (pq, &(k, l)) in pairs.iter().enumerate() {
                let expect = pair_scale(i, j) * pair_scale(k, l) * tensor_entry(&z, i, j, k, l);
                assert!(math::abs(q[(p, pq)] - expect) < 1e-12, "{i}{j}{k}{l}");
            }
        }
    }

    #[test]
    fn single_bpsk_row_has_cumulant_minus_two() {
        let z = bpsk(1, 1000, 1);
        let set = cum4_eigenmatrices(&z, 1).unwrap();
        assert!(math::abs(set.weights[0] + 2.0) < 1e-12);
        assert!(set.undersampled == false);
    }

    #[test]
    fn two_independent_bpsk_rows() {
        let (z, _) = super::super::whiten(&bpsk(2, 100_000, 3)).unwrap();
        let set = cum4_eigenmatrices(&z, 3).unwrap();
        assert!(math::abs(set.weights[0] + 2.0) < 0.05);
        assert!(math::abs(set.weights[1] + 2.0) < 0.05);
        assert!(math::abs(set.weights[2]) < 0.05);
        // Whitening near-identity covariance rotates arbitrarily; the raw
        // rows are the independent ones.
        assert!(cross_cumulant_energy(&bpsk(2, 100_000, 3)) < 1e-3);
    }

    #[test]
    fn gaussian_rows_have_negligible_cumulants() {
        let mut data = Vec::new();
        for r in 0..3 {
            let mut rng = crate::rng::row_stream(11, r);
            data.extend((0..100_000).map(|_| rng.sample::<f64, _>(StandardNormal)));
        }
        let (z, _) = super::super::whiten(&Matrix::new(3, 100_000, data).unwrap()).unwrap();
        let set = cum4_eigenmatrices(&z, 6).unwrap();
        assert!(set.weights.iter().all(|w| math::abs(*w) < 0.1));
        assert!(set
            .weights
            .windows(2)
            .all(|w| math::abs(w[0]) >= math::abs(w[1])));
        for m in &set.matrices {
            assert!(m.asymmetry() < 1e-10);
            assert!(math::abs(m.frobenius_norm() - 1.0) < 1e-10);
        }
    }

    #[test]
    fn count_bounds_and_undersampling() {
        let z = bpsk(3, 50, 4);
        assert!(cum4_eigenmatrices(&z, 7).is_err());
        assert!(cum4_eigenmatrices(&z, 0).is_err());
        assert!(cum4_eigenmatrices(&z, 6).unwrap().undersampled);
    }

    #[test]
    fn kurtosis_of_constant_modulus() {
        assert_eq!(kurtosis(&[1.0, -1.0, 1.0, -1.0]), -2.0);
        let v = vec![0.0; 4];
        assert_eq!(kurtosis(&v), 0.0);
    }
}
