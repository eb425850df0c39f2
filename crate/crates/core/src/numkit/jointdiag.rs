//! Orthogonal joint diagonalization by Jacobi (Givens) sweeps.

use alloc::vec::Vec;

use super::{check_symmetric, CumulantSet, Matrix};
use crate::math;
use crate::{Error, Result};

/// Rotations with `|sin θ|` at or below this are skipped; a sweep without
/// any larger rotation ends the iteration.
pub const ROTATION_THRESHOLD: f64 = 1e-8;
pub const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct JointDiagonalization {
    /// Orthogonal `U` with `Uᵀ M U` approximately diagonal for every `M`.
    pub rotation: Matrix,
    pub sweeps: usize,
    pub converged: bool,
    /// Weighted off-diagonal energy before the first sweep and after each
    /// sweep.
    pub off_energy: Vec<f64>,
}

fn off_energy(mats: &[Matrix]) -> f64 {
    mats.iter().map(Matrix::off_diagonal_energy).sum()
}

/// Find the orthogonal `U` minimizing `Σ_k offdiag(Uᵀ (w_k M_k) U)`.
///
/// Each matrix enters scaled by its weight. For every index pair the
/// rotation angle comes from the dominant eigenvector of the 2×2 matrix
/// `Σ_k g_k g_kᵀ`, `g_k = (m_pp − m_qq, m_pq + m_qp)`, which is the exact
/// minimizer of the pair's off-diagonal energy.
pub fn joint_diagonalize(set: &CumulantSet) -> Result<JointDiagonalization> {
    let first = set
        .matrices
        .first()
        .ok_or_else(|| Error::Dimension("joint diagonalization of an empty set".into()))?;
    let n = first.rows();
    let mut mats = Vec::with_capacity(set.len());
    for (m, &w) in set.matrices.iter().zip(&set.weights) {
        if m.shape() != (n, n) {
            return Err(Error::Dimension(
                "joint diagonalization needs equal square shapes".into(),
            ));
        }
        check_symmetric(m)?;
        let mut scaled = m.clone();
        scaled.scale(w);
        mats.push(scaled);
    }

    let mut v = Matrix::identity(n);
    let mut history = Vec::new();
    history.push(off_energy(&mats));
    let mut sweeps = 0;
    let mut converged = n < 2;

    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
                for m in &mats {
                    let a = m[(p, p)] - m[(q, q)];
                    let b = m[(p, q)] + m[(q, p)];
                    g11 += a * a;
                    g12 += a * b;
                    g22 += b * b;
                }
                let ton = g11 - g22;
                let toff = 2.0 * g12;
                let theta = 0.25 * math::atan2(toff, ton);
                let (c, s) = (math::cos(theta), math::sin(theta));
                if math::abs(s) <= ROTATION_THRESHOLD {
                    continue;
                }
                rotated = true;
                for m in mats.iter_mut() {
                    givens_congruence(m, p, q, c, s);
                }
                // V ← V G, G = [[c, −s], [s, c]] on (p, q)
                for r in 0..n {
                    let (x, y) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * x + s * y;
                    v[(r, q)] = -s * x + c * y;
                }
            }
        }
        history.push(off_energy(&mats));
        if !rotated {
            converged = true;
        }
    }

    Ok(JointDiagonalization {
        rotation: v,
        sweeps,
        converged,
        off_energy: history,
    })
}

/// `M ← Gᵀ M G` for the plane rotation on `(p, q)`.
fn givens_congruence(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    {
        let (rp, rq) = m.row_pair_mut(p, q);
        for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
            let (a, b) = (*x, *y);
            *x = c * a + s * b;
            *y = -s * a + c * b;
        }
    }
    for r in 0..m.rows() {
        let (a, b) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = c * a + s * b;
        m[(r, q)] = -s * a + c * b;
    }
}
