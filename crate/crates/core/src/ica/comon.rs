//! Comon's pairwise maximization of `Ψ₄ = Σ_i κ₄(y_i)²`.
//!
//! For a pair `(y_i, y_j)` rotated by `θ`, each output kurtosis is a
//! homogeneous quartic in `(cos θ, sin θ)` whose coefficients are the five
//! fourth-order cumulants of the pair. The pair contrast is therefore a
//! trigonometric polynomial in `φ = 4θ` with harmonics 0, 1 and 2. Its
//! stationary points are the roots of a degree-4 polynomial on the unit
//! circle, which are found directly; the best root is applied.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{IcaConfig, IcaResult};
use crate::math;
use crate::numkit::{kurtosis, Matrix};
use crate::Result;

pub const MAX_SWEEPS: usize = 50;

/// Rotations smaller than this are not worth applying.
const MIN_ANGLE: f64 = 1e-12;

/// Comon's algorithm on whitened `z`. Sweeps over all pairs until the
/// largest contrast gain in a sweep falls below `cfg.tolerance`, or
/// [`MAX_SWEEPS`] sweeps. `Ψ₄` never decreases: a pair is only rotated when
/// the chosen angle beats leaving it alone.
pub fn comon(z: &Matrix, cfg: &IcaConfig) -> Result<IcaResult> {
    cfg.validate()?;
    Ok(comon_traced(z, cfg, &mut |_| {}))
}

/// [`comon`] reporting the contrast after every accepted rotation.
pub(crate) fn comon_traced(z: &Matrix, cfg: &IcaConfig, trace: &mut dyn FnMut(f64)) -> IcaResult {
    let n = z.rows();
    let mut y = z.clone();
    let mut w = Matrix::identity(n);
    let mut kurt: Vec<f64> = (0..n).map(|i| kurtosis(y.row(i))).collect();
    let mut sweeps = 0;
    let mut converged = n < 2;

    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut best_gain = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let pair = PairCumulants::measure(y.row(i), y.row(j));
                let Some(turn) = pair.best_rotation() else {
                    continue;
                };
                best_gain = best_gain.max(turn.gain);
                let (c, s) = (math::cos(turn.angle), math::sin(turn.angle));
                rotate_rows(&mut y, i, j, c, s);
                rotate_rows(&mut w, i, j, c, s);
                kurt[i] = turn.kurtosis.0;
                kurt[j] = turn.kurtosis.1;
                trace(kurt.iter().map(|k| k * k).sum());
            }
        }
        if best_gain < cfg.tolerance {
            converged = true;
        }
    }

    // Recompute from the data rather than trusting the running values.
    let contrast_value = (0..n)
        .map(|i| {
            let k = kurtosis(y.row(i));
            k * k
        })
        .sum();
    IcaResult {
        unmixing: w,
        sources: y,
        iterations: vec![sweeps; n],
        converged: vec![converged; n],
        contrast_value,
    }
}

/// `(row_i, row_j) ← (c·row_i + s·row_j, −s·row_i + c·row_j)`.
fn rotate_rows(m: &mut Matrix, i: usize, j: usize, c: f64, s: f64) {
    let (a, b) = m.row_pair_mut(i, j);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (u, v) = (*x, *y);
        *x = c * u + s * v;
        *y = -s * u + c * v;
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PairCumulants {
    k40: f64,
    k31: f64,
    k22: f64,
    k13: f64,
    k04: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Turn {
    pub angle: f64,
    pub gain: f64,
    pub kurtosis: (f64, f64),
}

impl PairCumulants {
    pub(crate) fn measure(x: &[f64], y: &[f64]) -> Self {
        let mut s = [0.0f64; 8];
        for (&a, &b) in x.iter().zip(y) {
            let (a2, b2, ab) = (a * a, b * b, a * b);
            s[0] += a2;
            s[1] += ab;
            s[2] += b2;
            s[3] += a2 * a2;
            s[4] += a2 * ab;
            s[5] += a2 * b2;
            s[6] += ab * b2;
            s[7] += b2 * b2;
        }
        let m = x.len() as f64;
        let [m20, m11, m02, m40, m31, m22, m13, m04] = s.map(|v| v / m);
        Self {
            k40: m40 - 3.0 * m20 * m20,
            k31: m31 - 3.0 * m20 * m11,
            k22: m22 - m20 * m02 - 2.0 * m11 * m11,
            k13: m13 - 3.0 * m11 * m02,
            k04: m04 - 3.0 * m02 * m02,
        }
    }

    /// Output kurtoses after rotating the pair by `theta`.
    pub(crate) fn rotated(&self, theta: f64) -> (f64, f64) {
        let (c, s) = (math::cos(theta), math::sin(theta));
        let (c2, s2) = (c * c, s * s);
        let first = c2 * c2 * self.k40
            + 4.0 * c2 * c * s * self.k31
            + 6.0 * c2 * s2 * self.k22
            + 4.0 * c * s2 * s * self.k13
            + s2 * s2 * self.k04;
        let second = s2 * s2 * self.k40 - 4.0 * s2 * s * c * self.k31 + 6.0 * s2 * c2 * self.k22
            - 4.0 * s * c2 * c * self.k13
            + c2 * c2 * self.k04;
        (first, second)
    }

    pub(crate) fn contrast(&self, theta: f64) -> f64 {
        let (a, b) = self.rotated(theta);
        a * a + b * b
    }

    /// Best angle in `(−π/4, π/4]`, or `None` if no rotation improves the
    /// pair contrast.
    pub(crate) fn best_rotation(&self) -> Option<Turn> {
        let series = Harmonics::fit(self);
        let current = self.contrast(0.0);
        let (mut best_angle, mut best_value) = (0.0, current);
        for phi in series.stationary_points() {
            let theta = phi / 4.0;
            let value = self.contrast(theta);
            if value > best_value {
                best_value = value;
                best_angle = theta;
            }
        }
        if math::abs(best_angle) < MIN_ANGLE {
            return None;
        }
        Some(Turn {
            angle: best_angle,
            gain: best_value - current,
            kurtosis: self.rotated(best_angle),
        })
    }
}

/// `Ψ(φ) = a0 + a1 cos φ + b1 sin φ + a2 cos 2φ + b2 sin 2φ`, `φ = 4θ`.
#[derive(Clone, Copy, Debug)]
struct Harmonics {
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
}

impl Harmonics {
    /// Exact coefficients from eight samples over one period (no aliasing
    /// below the fourth harmonic).
    fn fit(pair: &PairCumulants) -> Self {
        let (mut a1, mut b1, mut a2, mut b2) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..8 {
            let phi = k as f64 * PI / 4.0;
            let v = pair.contrast(phi / 4.0);
            a1 += v * math::cos(phi);
            b1 += v * math::sin(phi);
            a2 += v * math::cos(2.0 * phi);
            b2 += v * math::sin(2.0 * phi);
        }
        Self {
            a1: a1 / 4.0,
            b1: b1 / 4.0,
            a2: a2 / 4.0,
            b2: b2 / 4.0,
        }
    }

    fn derivative(&self, phi: f64) -> f64 {
        -self.a1 * math::sin(phi) + self.b1 * math::cos(phi) - 2.0 * self.a2 * math::sin(2.0 * phi)
            + 2.0 * self.b2 * math::cos(2.0 * phi)
    }

    fn second_derivative(&self, phi: f64) -> f64 {
        -self.a1 * math::cos(phi)
            - self.b1 * math::sin(phi)
            - 4.0 * self.a2 * math::cos(2.0 * phi)
            - 4.0 * self.b2 * math::sin(2.0 * phi)
    }

    /// Zeros of `dΨ/dφ` in `(−π, π]`.
    ///
    /// With `ζ = e^{iφ}`, `ζ² dΨ/dφ = d₂ζ⁴ + d₁ζ³ + d̄₁ζ + d̄₂` where
    /// `d₁ = (b1 + i a1)/2` and `d₂ = b2 + i a2`.
    fn stationary_points(&self) -> Vec<f64> {
        let d1 = Complex64::new(self.b1 / 2.0, self.a1 / 2.0);
        let d2 = Complex64::new(self.b2, self.a2);
        let scale = d1.norm().max(d2.norm());
        if scale == 0.0 {
            return Vec::new();
        }
        let mut candidates: Vec<f64> = if d2.norm() < 1e-9 * scale {
            // First harmonic only: b1 cos φ = a1 sin φ.
            let phi = math::atan2(self.b1, self.a1);
            vec![phi, phi - PI]
        } else {
            let coeffs = [d2, d1, Complex64::new(0.0, 0.0), d1.conj(), d2.conj()];
            quartic_roots(&coeffs).iter().map(|r| r.arg()).collect()
        };
        for phi in candidates.iter_mut() {
            // Polish: roots come back with rounding error.
            for _ in 0..3 {
                let h = self.second_derivative(*phi);
                if h == 0.0 {
                    break;
                }
                *phi -= self.derivative(*phi) / h;
            }
            *phi = wrap_angle(*phi);
        }
        candidates
    }
}

/// Map to `(−π, π]`.
fn wrap_angle(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// All four roots of `c[0] ζ⁴ + … + c[4]` by Durand–Kerner iteration.
fn quartic_roots(c: &[Complex64; 5]) -> [Complex64; 4] {
    let lead = c[0];
    let monic: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    let eval = |x: Complex64| {
        monic
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &k| acc * x + k)
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [
        seed,
        seed * seed,
        seed * seed * seed,
        seed * seed * seed * seed,
    ];
    for _ in 0..500 {
        let mut largest_step = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            largest_step = largest_step.max(step.norm());
        }
        if largest_step < 1e-15 {
            break;
        }
    }
    roots
}
