//! Deflationary fixed-point ICA.
//!
//! On whitened data the covariance term of the general update is the
//! identity, leaving `w ← E{z g(wᵀz)} − E{g'(wᵀz)} w`, then Gram–Schmidt
//! against the components already found and renormalization.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Contrast, IcaConfig, IcaResult};
use crate::math;
use crate::numkit::{dot, kurtosis, norm, Matrix};
use crate::rng::row_stream;
use crate::Result;

/// `E[log cosh ν]` for standard normal `ν`.
const LOGCOSH_GAUSSIAN: f64 = 0.374_567_207_5;

/// Extract every component of whitened `z` one at a time.
///
/// The first attempt for each component starts from a point drawn from a
/// stream seeded by `cfg.seed`; a component that has not converged after
/// `cfg.max_iterations` is retried once from a start seeded by
/// `cfg.seed + k` and is flagged if that fails too. The unmixing matrix is
/// in whitened coordinates.
pub fn fastica_deflate(z: &Matrix, cfg: &IcaConfig) -> Result<IcaResult> {
    cfg.validate()?;
    let n = z.rows();
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut iterations = Vec::with_capacity(n);
    let mut converged = Vec::with_capacity(n);
    let mut starts = row_stream(cfg.seed, 0);
    let mut scratch = Workspace::new(z.cols());

    for k in 0..n {
        let start = random_unit(&mut starts, n);
        let mut attempt = fixed_point(z, start, &found, cfg, &mut scratch);
        let mut spent = attempt.iterations;
        if !attempt.converged {
            let mut retry_rng = row_stream(cfg.seed.wrapping_add(k as u64), 1);
            let start = random_unit(&mut retry_rng, n);
            attempt = fixed_point(z, start, &found, cfg, &mut scratch);
            spent += attempt.iterations;
        }
        iterations.push(spent);
        converged.push(attempt.converged);
        found.push(attempt.w);
    }

    let unmixing = Matrix::from_fn(n, n, |i, j| found[i][j]);
    let sources = &unmixing * z;
    let contrast_value = (0..n)
        .map(|i| {
            let row = sources.row(i);
            match cfg.contrast {
                Contrast::Kurtosis => {
                    let k = kurtosis(row);
                    k * k
                }
                Contrast::Tanh => {
                    let g = row.iter().map(|&u| log_cosh(u)).sum::<f64>() / row.len() as f64;
                    let d = g - LOGCOSH_GAUSSIAN;
                    d * d
                }
            }
        })
        .sum();

    Ok(IcaResult {
        unmixing,
        sources,
        iterations,
        converged,
        contrast_value,
    })
}

struct Attempt {
    w: Vec<f64>,
    iterations: usize,
    converged: bool,
}

struct Workspace {
    projection: Vec<f64>,
    nonlinearity: Vec<f64>,
}

impl Workspace {
    fn new(samples: usize) -> Self {
        Self {
            projection: vec![0.0; samples],
            nonlinearity: vec![0.0; samples],
        }
    }
}

fn fixed_point(
    z: &Matrix,
    start: Vec<f64>,
    found: &[Vec<f64>],
    cfg: &IcaConfig,
    ws: &mut Workspace,
) -> Attempt {
    let n = z.rows();
    let m = z.cols() as f64;
    let mut w = match orthonormalize(start, found) {
        Some(w) => w,
        None => fallback_direction(n, found),
    };

    for it in 1..=cfg.max_iterations {
        ws.projection.iter_mut().for_each(|v| *v = 0.0);
        for (i, &wi) in w.iter().enumerate() {
            for (y, &zt) in ws.projection.iter_mut().zip(z.row(i)) {
                *y += wi * zt;
            }
        }
        let mut mean_derivative = 0.0;
        for (g, &y) in ws.nonlinearity.iter_mut().zip(&ws.projection) {
            let (gy, dg) = match cfg.contrast {
                Contrast::Kurtosis => (y * y * y, 3.0 * y * y),
                Contrast::Tanh => {
                    let t = math::tanh(y);
                    (t, 1.0 - t * t)
                }
            };
            *g = gy;
            mean_derivative += dg;
        }
        mean_derivative /= m;

        let updated: Vec<f64> = (0..n)
            .map(|i| dot(z.row(i), &ws.nonlinearity) / m - mean_derivative * w[i])
            .collect();
        let Some(next) = orthonormalize(updated, found) else {
            return Attempt {
                w,
                iterations: it,
                converged: false,
            };
        };
        let done = 1.0 - math::abs(dot(&next, &w)) < cfg.tolerance;
        w = next;
        if done {
            return Attempt {
                w,
                iterations: it,
                converged: true,
            };
        }
    }
    Attempt {
        w,
        iterations: cfg.max_iterations,
        converged: false,
    }
}

/// Gram–Schmidt against `found`, then normalize; `None` if nothing is left.
fn orthonormalize(mut w: Vec<f64>, found: &[Vec<f64>]) -> Option<Vec<f64>> {
    for f in found {
        let proj = dot(&w, f);
        w.iter_mut().zip(f).for_each(|(a, b)| *a -= proj * b);
    }
    let len = norm(&w);
    if !(len > 1e-12) {
        return None;
    }
    w.iter_mut().for_each(|v| *v /= len);
    Some(w)
}

/// First axis direction not spanned by `found`.
fn fallback_direction(n: usize, found: &[Vec<f64>]) -> Vec<f64> {
    (0..n)
        .find_map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            orthonormalize(e, found)
        })
        .expect("deflation found more components than dimensions")
}

fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&v);
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

fn log_cosh(u: f64) -> f64 {
    let a = math::abs(u);
    a + math::ln(1.0 + math::exp(-2.0 * a)) - core::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ica::Algorithm;
    use crate::numkit::whiten;

    #[test]
    fn single_bpsk_stream_converges_in_one_step() {
        let z = Matrix::new(1, 6, vec![1.0, -1.0, 1.0, 1.0, -1.0, -1.0]).unwrap();
        let r = fastica_deflate(&z, &IcaConfig::new(Algorithm::FastIca)).unwrap();
        assert_eq!(r.iterations, vec![1]);
        assert_eq!(r.converged, vec![true]);
        assert_eq!(math::abs(r.unmixing[(0, 0)]), 1.0);
    }

    #[test]
    fn seed_determinism() {
        let mut data = Vec::new();
        for r in 0..2 {
            let mut rng = row_stream(3, r);
            data.extend((0..2000).map(|_| rng.random_range(-1.0..1.0)));
        }
        let (z, _) = whiten(&Matrix::new(2, 2000, data).unwrap()).unwrap();
        let cfg = IcaConfig::new(Algorithm::FastIca).with_seed(5);
        assert_eq!(
            fastica_deflate(&z, &cfg).unwrap(),
            fastica_deflate(&z, &cfg).unwrap()
        );
    }

    #[test]
    fn log_cosh_is_stable() {
        assert!(math::abs(log_cosh(0.0)) < 1e-15);
        assert!(math::abs(log_cosh(800.0) - (800.0 - core::f64::consts::LN_2)) < 1e-9);
    }
}
