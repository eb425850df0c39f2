//! Maximal-length sequences and Gold spreading codes.
//!
//! Feedback polynomials are bit masks over GF(2): bit `i` is the
//! coefficient of `x^i`, so `x⁵ + x² + 1` is `0b10_0101`.

use alloc::vec::Vec;

use crate::{Error, Result};

/// `x⁵ + x² + 1`.
pub const POLY_A: u32 = 0b10_0101;
/// `x⁵ + x⁴ + x³ + x² + 1`.
pub const POLY_B: u32 = 0b11_1101;

/// Chip value of bit `b`: 0 → +1, 1 → −1.
#[inline]
fn chip(bit: u8) -> i8 {
    1 - 2 * bit as i8
}

fn degree(poly: u32) -> u32 {
    31 - poly.leading_zeros()
}

/// One period of the LFSR sequence for `poly` started from `init`.
///
/// The recurrence is `a_{t+d} = Σ_{i<d} c_i a_{t+i}` with `init` bit `i`
/// giving `a_i`. Fails on an all-zero start and on polynomials whose
/// sequence period is shorter than `2^d − 1`.
pub fn m_sequence(poly: u32, init: u32) -> Result<Vec<i8>> {
    let d = degree(poly);
    if !(2..=16).contains(&d) || poly & 1 == 0 {
        return Err(Error::NotPrimitive { poly });
    }
    let mask = (1u32 << d) - 1;
    let start = init & mask;
    if start == 0 {
        return Err(Error::ZeroState);
    }
    let period = (1usize << d) - 1;
    let taps = poly & mask;
    let mut state = start;
    let mut out = Vec::with_capacity(period);
    for t in 0..period {
        if t > 0 && state == start {
            return Err(Error::NotPrimitive { poly });
        }
        out.push(chip((state & 1) as u8));
        let feedback = (state & taps).count_ones() & 1;
        state = (state >> 1) | (feedback << (d - 1));
    }
    if state != start {
        return Err(Error::NotPrimitive { poly });
    }
    Ok(out)
}

/// Unnormalized periodic correlation `Σ_t a_t b_{(t+shift) mod N}`.
pub fn periodic_correlation(a: &[i8], b: &[i8], shift: usize) -> i32 {
    let n = a.len();
    assert_eq!(n, b.len());
    (0..n)
        .map(|t| a[t] as i32 * b[(t + shift) % n] as i32)
        .sum()
}

/// `b` cyclically advanced by `shift` chips.
fn cyclic_shift(b: &[i8], shift: usize) -> impl Iterator<Item = i8> + '_ {
    let n = b.len();
    (0..n).map(move |t| b[(t + shift) % n])
}

/// Gold family built from a preferred pair of m-sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldCodeSet {
    pub length: usize,
    /// `u`, `v`, then `u ⊕ shift_k(v)` for `k = 0..length`, as ±1 chips.
    pub codes: Vec<Vec<i8>>,
    pub preferred_pair: (u32, u32),
}

impl GoldCodeSet {
    /// The length-31 family from [`POLY_A`] and [`POLY_B`].
    pub fn standard() -> Self {
        gold_family(POLY_A, POLY_B).expect("built-in preferred pair is valid")
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, index: usize) -> Result<&[i8]> {
        self.codes
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::CodeIndex {
                index,
                available: self.codes.len(),
            })
    }

    /// Allowed unnormalized cross-correlation values `{−1, −t, t − 2}`,
    /// `t = 2^⌊(d+2)/2⌋ + 1`.
    pub fn correlation_levels(&self) -> [i32; 3] {
        let d = degree(self.preferred_pair.0);
        let t = (1i32 << ((d + 2) / 2)) + 1;
        [-1, -t, t - 2]
    }
}

/// Build the Gold family and verify its three-valued cross-correlation
/// spectrum over every pair and every shift.
pub fn gold_family(first: u32, second: u32) -> Result<GoldCodeSet> {
    if degree(first) != degree(second) {
        return Err(Error::InvalidPreferredPair { first, second });
    }
    let u = m_sequence(first, 1)?;
    let v = m_sequence(second, 1)?;
    let length = u.len();
    let mut codes = Vec::with_capacity(length + 2);
    codes.push(u.clone());
    codes.push(v.clone());
    for k in 0..length {
        codes.push(
            u.iter()
                .zip(cyclic_shift(&v, k))
                .map(|(a, b)| a * b)
                .collect(),
        );
    }
    let set = GoldCodeSet {
        length,
        codes,
        preferred_pair: (first, second),
    };
    let levels = set.correlation_levels();
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            for shift in 0..length {
                let c = periodic_correlation(&set.codes[i], &set.codes[j], shift);
                if !levels.contains(&c) {
                    return Err(Error::InvalidPreferredPair { first, second });
                }
            }
        }
    }
    Ok(set)
}
