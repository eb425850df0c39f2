//! Eigendecomposition of real symmetric matrices.
//!
//! [`sym_eig`] reduces to tridiagonal form by Householder reflections and
//! finishes with implicit QL; [`sym_eig_jacobi`] is the slower cyclic
//! Jacobi method, kept as an independent cross-check.

use alloc::vec::Vec;

use super::Matrix;
use crate::math;
use crate::{Error, Result};

/// Relative asymmetry accepted as "symmetric".
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;
/// QL iterations allowed per eigenvalue.
const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in descending order and the matching orthonormal
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    /// Jacobi sweeps or total QL iterations.
    pub iterations: usize,
}

impl SymmetricEigen {
    /// Eigenvector `i` as a contiguous vector.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }
}

pub(crate) fn check_symmetric(m: &Matrix) -> Result<()> {
    let asymmetry = m.asymmetry();
    if asymmetry > SYMMETRY_TOLERANCE * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix.
///
/// Input asymmetry beyond [`SYMMETRY_TOLERANCE`] (relative to the largest
/// entry) is a contract violation; the symmetric part is decomposed.
pub fn sym_eig(m: &Matrix) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    // `vt` holds the transform transposed: row `j` is column `j` of the
    // accumulated orthogonal matrix, so every inner loop runs along a row.
    let mut vt: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            0.5 * (m[(i, j)] + m[(j, i)])
        })
        .collect();
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n];
    tridiagonalize(n, &mut vt, &mut d, &mut e);
    let iterations = tridiagonal_ql(n, &mut vt, &mut d, &mut e);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| vt[order[c] * n + r]);
    Ok(SymmetricEigen {
        values,
        vectors,
        iterations,
    })
}

/// Householder reduction to tridiagonal form (EISPACK `tred2`).
///
/// On entry `vt` is the symmetric matrix; on exit it holds the transposed
/// orthogonal transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    // v(k, j) of the column-oriented algorithm lives at vt[j * n + k].
    macro_rules! v {
        ($k:expr, $j:expr) => {
            vt[($j) * n + ($k)]
        };
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| math::abs(*x)).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
                v!(j, i) = 0.0;
            }
        } else {
            for x in d[..i].iter_mut() {
                *x /= scale;
                h += *x * *x;
            }
            let f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                let f = d[j];
                v!(j, i) = f;
                let col = &mut vt[j * n..j * n + i];
                let mut g = e[j] + col[j] * f;
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let (f, g) = (d[j], e[j]);
                let col = &mut vt[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = col[i - 1];
                vt[j * n + i] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v!(n - 1, i) = v!(i, i);
        v!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v!(k, i + 1) / h;
            }
            for j in 0..=i {
                let (head, tail) = vt.split_at_mut((i + 1) * n);
                let next = &tail[..=i];
                let col = &mut head[j * n..j * n + i + 1];
                let g: f64 = next.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                for (c, dk) in col.iter_mut().zip(&d[..=i]) {
                    *c -= g * dk;
                }
            }
        }
        for k in 0..=i {
            v!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
        v!(n - 1, j) = 0.0;
    }
    if n > 0 {
        v!(n - 1, n - 1) = 1.0;
        e[0] = 0.0;
    }
}

/// Implicit QL with Wilkinson-style shifts on the tridiagonal `(d, e)`,
/// accumulating rotations into `vt` (EISPACK `tql2`). Returns the number of
/// iterations.
fn tridiagonal_ql(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) -> usize {
    if n == 0 {
        return 0;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let mut total = 0;
    for l in 0..n {
        tst1 = tst1.max(math::abs(d[l]) + math::abs(e[l]));
        let mut m = l;
        while m < n - 1 && math::abs(e[m]) > f64::EPSILON * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                total += 1;
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for x in d[l + 2..].iter_mut() {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if math::abs(e[l]) <= f64::EPSILON * tst1 || iter >= MAX_QL_ITERATIONS {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    total
}

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal mass is at rounding level relative to
/// the Frobenius norm. Much slower than [`sym_eig`] beyond a few dozen rows
/// but simple enough to serve as its reference.
pub fn sym_eig_jacobi(m: &Matrix) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    // Work on the exactly symmetric part.
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    // Rows of `vt` are the eigenvectors; row updates stay contiguous.
    let mut vt = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let mut sweeps = 0;

    if scale > 0.0 {
        let target = f64::EPSILON * scale;
        while sweeps < MAX_SWEEPS {
            let off = math::sqrt(0.5 * a.off_diagonal_energy());
            if off <= target {
                break;
            }
            sweeps += 1;
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, &mut vt, p, q, sweeps);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| vt[(order[c], r)]);
    Ok(SymmetricEigen {
        values,
        vectors,
        iterations: sweeps,
    })
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut Matrix, vt: &mut Matrix, p: usize, q: usize, sweep: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let g = 100.0 * math::abs(apq);
    // Late sweeps: drop entries too small to move either diagonal entry.
    if sweep > 4 && math::abs(app) + g == math::abs(app) && math::abs(aqq) + g == math::abs(aqq) {
        a[(p, q)] = 0.0;
        a[(q, p)] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + math::sqrt(theta * theta + 1.0))
    } else {
        -1.0 / (-theta + math::sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / math::sqrt(t * t + 1.0);
    let s = t * c;

    let n = a.rows();
    {
        let (rp, rq) = a.row_pair_mut(p, q);
        for k in 0..n {
            let x = rp[k];
            let y = rq[k];
            rp[k] = c * x - s * y;
            rq[k] = s * x + c * y;
        }
    }
    for k in 0..n {
        if k != p && k != q {
            a[(k, p)] = a[(p, k)];
            a[(k, q)] = a[(q, k)];
        }
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    let (vp, vq) = vt.row_pair_mut(p, q);
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn residual(m: &Matrix, e: &SymmetricEigen) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..m.rows() {
            let v = e.vector(i);
            let mv = m.mul_vec(&v);
            for (a, b) in mv.iter().zip(&v) {
                worst = worst.max(math::abs(a - e.values[i] * b));
            }
        }
        worst
    }

    fn orthonormality_error(v: &Matrix) -> f64 {
        let g = &v.transpose() * v;
        g.sub(&Matrix::identity(v.rows())).unwrap().max_abs()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eig(&Matrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_sorts_descending_with_axis_vectors() {
        let m = Matrix::diagonal(&[1.0, 4.0]);
        let e = sym_eig(&m).unwrap();
        assert_eq!(e.values, vec![4.0, 1.0]);
        assert_eq!(math::abs(e.vectors[(1, 0)]), 1.0);
        assert_eq!(math::abs(e.vectors[(0, 1)]), 1.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        // det([[2-λ,1],[1,2-λ]]) = (λ-3)(λ-1)
        let m = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let e = sym_eig(&m).unwrap();
        assert!(math::abs(e.values[0] - 3.0) < 1e-14);
        assert!(math::abs(e.values[1] - 1.0) < 1e-14);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vector(0);
        let v1 = e.vector(1);
        assert!(math::abs(math::abs(v0[0]) - h) < 1e-14 && math::abs(v0[0] - v0[1]) < 1e-14);
        assert!(math::abs(math::abs(v1[0]) - h) < 1e-14 && math::abs(v1[0] + v1[1]) < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn random_symmetric_residuals() {
        let n = 12;
        let mut seed = 12345u64;
        let b = Matrix::from_fn(n, n, |_, _| {
            seed = crate::rng::mix64(seed);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        let m = b.add(&b.transpose()).unwrap();
        let e = sym_eig(&m).unwrap();
        assert!(residual(&m, &e) < 1e-8 * m.frobenius_norm());
        assert!(orthonormality_error(&e.vectors) < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_matrix() {
        let e = sym_eig(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.iterations, 0);
        assert_eq!(sym_eig_jacobi(&Matrix::zeros(3, 3)).unwrap().iterations, 0);
    }

    fn random_symmetric(n: usize, mut seed: u64) -> Matrix {
        let b = Matrix::from_fn(n, n, |_, _| {
            seed = crate::rng::mix64(seed);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        b.add(&b.transpose()).unwrap()
    }

    #[test]
    fn ql_matches_jacobi() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (40, 4), (97, 5)] {
            let m = random_symmetric(n, seed);
            let ql = sym_eig(&m).unwrap();
            let jac = sym_eig_jacobi(&m).unwrap();
            for (a, b) in ql.values.iter().zip(&jac.values) {
                assert!(math::abs(a - b) < 1e-11 * n as f64, "n={n}: {a} vs {b}");
            }
            assert!(residual(&m, &ql) < 1e-11 * n as f64);
            assert!(orthonormality_error(&ql.vectors) < 1e-12 * n as f64);
            assert!(residual(&m, &jac) < 1e-11 * n as f64);
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        // Rank-one update of the identity: spectrum {1 + ‖u‖², 1, 1, 1}.
        let u = [1.0, 2.0, -1.0, 0.5];
        let m = Matrix::from_fn(4, 4, |i, j| u[i] * u[j] + if i == j { 1.0 } else { 0.0 });
        let e = sym_eig(&m).unwrap();
        assert!(math::abs(e.values[0] - 7.25) < 1e-13);
        assert!(e.values[1..].iter().all(|v| math::abs(v - 1.0) < 1e-13));
        assert!(orthonormality_error(&e.vectors) < 1e-13);
    }
}
