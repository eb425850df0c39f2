//! Blind source separation: `x = A s`, find `W` with `y = W x ≈ P D s`.
//!
//! All three algorithms run on whitened data (unit sample covariance), where
//! the remaining unknown is an orthogonal rotation, and results are mapped
//! back to the caller's coordinates by [`separate`].

mod comon;
mod fastica;
mod jade;

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use comon::{comon, MAX_SWEEPS as COMON_MAX_SWEEPS};
pub use fastica::fastica_deflate;
pub use jade::jade;

use crate::math;
use crate::numkit::{whiten, Matrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Comon,
    Jade,
    FastIca,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Comon, Algorithm::Jade, Algorithm::FastIca];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Comon => "comon",
            Algorithm::Jade => "jade",
            Algorithm::FastIca => "fastica",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "comon" => Ok(Algorithm::Comon),
            "jade" => Ok(Algorithm::Jade),
            "fastica" => Ok(Algorithm::FastIca),
            other => Err(Error::InvalidConfig(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// FastICA nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Contrast {
    /// `g(u) = u³`, `g'(u) = 3u²`.
    Kurtosis,
    /// `g(u) = tanh u`, `g'(u) = 1 − tanh² u`.
    Tanh,
}

impl Contrast {
    pub fn name(self) -> &'static str {
        match self {
            Contrast::Kurtosis => "kurtosis",
            Contrast::Tanh => "tanh",
        }
    }
}

impl FromStr for Contrast {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kurtosis" | "cubic" => Ok(Contrast::Kurtosis),
            "tanh" => Ok(Contrast::Tanh),
            other => Err(Error::InvalidConfig(format!("unknown contrast `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcaConfig {
    pub algorithm: Algorithm,
    /// Only used by FastICA.
    pub contrast: Contrast,
    /// Fixed-point iterations per FastICA component attempt.
    pub max_iterations: usize,
    /// FastICA: bound on `1 − |w_newᵀ w_old|`. Comon: bound on the largest
    /// contrast gain in a sweep.
    pub tolerance: f64,
    pub seed: u64,
}

impl IcaConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            contrast: Contrast::Kurtosis,
            max_iterations: 100,
            tolerance: 1e-4,
            seed: 0,
        }
    }

    pub fn with_contrast(mut self, contrast: Contrast) -> Self {
        self.contrast = contrast;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Outcome of one separation.
#[derive(Clone, Debug, PartialEq)]
pub struct IcaResult {
    /// `W` such that `sources = W · input`.
    pub unmixing: Matrix,
    pub sources: Matrix,
    /// Per component: FastICA fixed-point iterations (all attempts), or the
    /// sweep count for the Jacobi-type algorithms.
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    /// Final value of the algorithm's own objective: `Σ kurt²` for Comon
    /// and FastICA/kurtosis, `Σ (E log cosh y − γ)²` for FastICA/tanh, the
    /// weighted off-diagonal energy of the joint diagonalization for JADE.
    pub contrast_value: f64,
}

impl IcaResult {
    pub fn components(&self) -> usize {
        self.unmixing.rows()
    }

    pub fn converged_count(&self) -> usize {
        self.converged.iter().filter(|c| **c).count()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
    }
}

/// Center, whiten and separate `x` (one mixture per row).
///
/// The returned unmixing matrix acts on the raw input, so
/// `sources = unmixing · x` exactly; a nonzero input mean therefore shows up
/// as a constant offset per source. A run in which no component converged is
/// reported as [`Error::SeparationFailed`] with the partial result attached.
pub fn separate(x: &Matrix, cfg: &IcaConfig) -> Result<IcaResult> {
    cfg.validate()?;
    let n = x.rows();
    if x.cols() < 10 * n {
        return Err(Error::Dimension(format!(
            "separating {n} mixtures needs at least {} samples, got {}",
            10 * n,
            x.cols()
        )));
    }
    let (z, whitening) = whiten(x)?;
    let white = match cfg.algorithm {
        Algorithm::Comon => comon(&z, cfg)?,
        Algorithm::Jade => jade(&z, cfg)?,
        Algorithm::FastIca => fastica_deflate(&z, cfg)?,
    };
    let unmixing = &white.unmixing * &whitening.whitener;
    let sources = &unmixing * x;
    let result = IcaResult {
        unmixing,
        sources,
        ..white
    };
    if result.converged_count() == 0 {
        return Err(Error::SeparationFailed {
            partial: Box::new(result),
        });
    }
    Ok(result)
}

/// Amari performance index of the global system `P = W A`.
///
/// `(1 / (2n(n−1))) [Σ_i (Σ_j |p_ij| / max_j |p_ij| − 1) + Σ_j (Σ_i |p_ij| / max_i |p_ij| − 1)]`,
/// which lies in `[0, 1]` and is zero exactly for scaled permutations.
pub fn amari_index(p: &Matrix) -> f64 {
    let n = p.rows();
    assert_eq!(n, p.cols(), "Amari index needs a square matrix");
    if n < 2 {
        return 0.0;
    }
    let abs = |i: usize, j: usize| math::abs(p[(i, j)]);
    let mut total = 0.0;
    for i in 0..n {
        let max = (0..n).map(|j| abs(i, j)).fold(0.0, f64::max);
        total += (0..n).map(|j| abs(i, j)).sum::<f64>() / max - 1.0;
    }
    for j in 0..n {
        let max = (0..n).map(|i| abs(i, j)).fold(0.0, f64::max);
        total += (0..n).map(|i| abs(i, j)).sum::<f64>() / max - 1.0;
    }
    total / (2.0 * n as f64 * (n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amari_zero_for_scaled_permutation() {
        let p =
            Matrix::from_rows(&[&[0.0, -3.0, 0.0], &[0.5, 0.0, 0.0], &[0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(amari_index(&p), 0.0);
    }

    #[test]
    fn amari_one_for_uniform_mixing() {
        let p = Matrix::from_fn(4, 4, |_, _| 1.0);
        assert!(math::abs(amari_index(&p) - 1.0) < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(IcaConfig::new(Algorithm::Jade).validate().is_ok());
        assert!(IcaConfig::new(Algorithm::Jade)
            .with_max_iterations(0)
            .validate()
            .is_err());
        assert!(IcaConfig::new(Algorithm::Jade)
            .with_tolerance(0.0)
            .validate()
            .is_err());
        assert!(IcaConfig::new(Algorithm::Jade)
            .with_tolerance(f64::NAN)
            .validate()
            .is_err());
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("pca".parse::<Algorithm>().is_err());
        assert_eq!("cubic".parse::<Contrast>().unwrap(), Contrast::Kurtosis);
    }
}
