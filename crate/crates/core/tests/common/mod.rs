#![allow(dead_code)]

use icacdma_core::numkit::Matrix;
use icacdma_core::rng::row_stream;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

fn rows(n: usize, m: usize, seed: u64, mut draw: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> f64) -> Matrix {
    let mut data = Vec::with_capacity(n * m);
    for r in 0..n {
        let mut rng = row_stream(seed, r);
        data.extend((0..m).map(|_| draw(&mut rng)));
    }
    Matrix::new(n, m, data).unwrap()
}

pub fn bpsk(n: usize, m: usize, seed: u64) -> Matrix {
    rows(n, m, seed, |r| if r.random::<bool>() { 1.0 } else { -1.0 })
}

pub fn uniform(n: usize, m: usize, seed: u64) -> Matrix {
    rows(n, m, seed, |r| r.random_range(-SQRT3..SQRT3))
}

pub fn gaussian(n: usize, m: usize, seed: u64) -> Matrix {
    rows(n, m, seed, |r| r.sample(StandardNormal))
}

/// Unit-variance Laplace rows.
pub fn laplace(n: usize, m: usize, seed: u64) -> Matrix {
    rows(n, m, seed, |r| {
        let a: f64 = r.sample(Exp1);
        let b: f64 = r.sample(Exp1);
        (a - b) / std::f64::consts::SQRT_2
    })
}

/// `n` unit-variance sources cycling through BPSK, uniform and Laplace.
pub fn mixed_sources(n: usize, m: usize, seed: u64) -> Matrix {
    let kinds = [bpsk(n, m, seed), uniform(n, m, seed ^ 1), laplace(n, m, seed ^ 2)];
    Matrix::from_fn(n, m, |i, j| kinds[i % 3][(i, j)])
}

/// Gaussian mixing matrix.
pub fn random_mixing(n: usize, seed: u64) -> Matrix {
    gaussian(n, n, seed ^ 0xA5A5)
}

pub fn rotation(theta: f64) -> Matrix {
    let (c, s) = (theta.cos(), theta.sin());
    Matrix::from_rows(&[&[c, -s], &[s, c]]).unwrap()
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Symmetric whitening `C^{-1/2}(x − mean)`: unit covariance without the
/// arbitrary rotation an eigenbasis whitener introduces.
pub fn sphere(x: &Matrix) -> Matrix {
    use icacdma_core::numkit::{center, covariance, sym_eig};
    let (centered, _) = center(x);
    let e = sym_eig(&covariance(x).unwrap()).unwrap();
    let n = x.rows();
    let root = Matrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| e.vectors[(i, k)] * e.vectors[(j, k)] / e.values[k].sqrt())
            .sum()
    });
    &root * &centered
}
