//! Synchronous single-path downlink: `R = G B + N`.
//!
//! `G` holds the users' codes as unit-norm columns (equal power), `B` the
//! BPSK symbols and `N` additive chip-level noise. There is no delay or
//! multipath parameter anywhere: every user arrives on one path with zero
//! delay.
//!
//! SNR convention: `snr_db` is the per-user SNR at chip level, the power one
//! user contributes to a chip (`1/C`) over the noise variance per chip, so
//! `σ² = 1 / (C · 10^(snr_db/10))`. Despreading gains a factor `C`; the
//! matched-filter output therefore sees `Eb/N0 = C · snr / 2` and a
//! single-user SER of `Q(√(C · snr))`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::codes::GoldCodeSet;
use crate::ica::IcaConfig;
use crate::math;
use crate::numkit::Matrix;
use crate::rng::{derive, row_stream};
use crate::{Error, Result};

const SYMBOL_STREAM: u64 = 0x5359_4D42;
const NOISE_STREAM: u64 = 0x4E4F_4953;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseKind {
    /// Noise-free channel; `snr_db` is ignored.
    Silent,
    Awgn,
    Pink,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Silent => "none",
            NoiseKind::Awgn => "awgn",
            NoiseKind::Pink => "pink",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "silent" => Ok(NoiseKind::Silent),
            "awgn" | "white" | "gaussian" => Ok(NoiseKind::Awgn),
            "pink" => Ok(NoiseKind::Pink),
            other => Err(Error::InvalidConfig(format!(
                "unknown noise kind `{other}`"
            ))),
        }
    }
}

/// One experiment point: who transmits, for how long, through what noise,
/// and which separation algorithm the ICA-based receivers use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkScenario {
    pub users: usize,
    pub chips: usize,
    pub symbols: usize,
    pub snr_db: f64,
    pub noise: NoiseKind,
    pub algorithm: IcaConfig,
    pub seed: u64,
}

impl LinkScenario {
    pub fn validate(&self) -> Result<()> {
        if self.chips < 2 {
            return Err(Error::InvalidConfig(format!(
                "chips must be at least 2, got {}",
                self.chips
            )));
        }
        if self.users == 0 || self.users >= self.chips {
            return Err(Error::InvalidConfig(format!(
                "users must be in 1..={} for {} chips, got {}",
                self.chips - 1,
                self.chips,
                self.users
            )));
        }
        if self.symbols < 100 {
            return Err(Error::InvalidConfig(format!(
                "symbols must be at least 100, got {}",
                self.symbols
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "snr_db must be finite, got {}",
                self.snr_db
            )));
        }
        self.algorithm.validate()
    }

    /// Noise variance per chip implied by `snr_db`.
    pub fn noise_variance(&self) -> f64 {
        noise_variance(signal_power_per_user(self.chips), self.snr_db)
    }
}

/// Power one unit-norm user column puts on each chip.
pub fn signal_power_per_user(chips: usize) -> f64 {
    1.0 / chips as f64
}

fn noise_variance(signal_power_per_user: f64, snr_db: f64) -> f64 {
    signal_power_per_user / math::db_to_linear(snr_db)
}

/// Matched-filter `Eb/N0` in dB for a chip-level `snr_db`.
pub fn ebn0_db(snr_db: f64, chips: usize) -> f64 {
    snr_db + 10.0 * libm::log10(chips as f64 / 2.0)
}

/// Chip-level `snr_db` giving a matched-filter `Eb/N0` of `ebn0_db`.
pub fn snr_db_for_ebn0(ebn0_db: f64, chips: usize) -> f64 {
    ebn0_db - 10.0 * libm::log10(chips as f64 / 2.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransmittedFrame {
    /// `B`, users × symbols, entries ±1.
    pub symbols: Matrix,
    /// `G`, chips × users, unit-norm columns.
    pub mixing: Matrix,
    /// `R = G B + N`.
    pub received: Matrix,
    /// `N`.
    pub noise_realization: Matrix,
}

/// Independent equiprobable ±1 symbols; row `k` comes from stream
/// `(seed, k)`.
pub fn generate_symbols(users: usize, symbols: usize, seed: u64) -> Result<Matrix> {
    if users == 0 || symbols == 0 {
        return Err(Error::Dimension(format!(
            "symbol matrix must be non-empty, got {users}x{symbols}"
        )));
    }
    let mut data = Vec::with_capacity(users * symbols);
    for k in 0..users {
        let mut rng = row_stream(seed, k);
        data.extend((0..symbols).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }));
    }
    Ok(Matrix::from_raw(users, symbols, data))
}

/// Code matrix `G` (codes `0..users` as columns scaled by `1/√C`) and the
/// noise-free chips `G B`.
pub fn spread_and_mix(symbols: &Matrix, codes: &GoldCodeSet) -> Result<(Matrix, Matrix)> {
    let users = symbols.rows();
    let chips = codes.length;
    if users > codes.len() {
        return Err(Error::CodeIndex {
            index: users - 1,
            available: codes.len(),
        });
    }
    let scale = 1.0 / math::sqrt(chips as f64);
    let mut mixing = Matrix::zeros(chips, users);
    for k in 0..users {
        for (c, &chip) in codes.code(k)?.iter().enumerate() {
            mixing[(c, k)] = chip as f64 * scale;
        }
    }
    let clean = &mixing * symbols;
    Ok((mixing, clean))
}

/// White Gaussian noise with per-chip variance
/// `signal_power_per_user / 10^(snr_db/10)`.
pub fn awgn(
    rows: usize,
    cols: usize,
    snr_db: f64,
    signal_power_per_user: f64,
    seed: u64,
) -> Result<Matrix> {
    check_noise_args(rows, cols, snr_db)?;
    let sigma = math::sqrt(noise_variance(signal_power_per_user, snr_db));
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let mut rng = row_stream(seed, r);
        data.extend((0..cols).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)));
    }
    Ok(Matrix::from_raw(rows, cols, data))
}

fn check_noise_args(rows: usize, cols: usize, snr_db: f64) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!(
            "noise shape must be non-empty, got {rows}x{cols}"
        )));
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "snr_db must be finite, got {snr_db}"
        )));
    }
    Ok(())
}

/// 1/f noise, one independent stream per row, scaled so the mean power
/// over the whole matrix equals the AWGN variance for the same SNR.
///
/// Each row is the inverse DFT of a Hermitian spectrum whose bins `f ≥ 1`
/// carry complex Gaussian values with amplitude `1/√f`; the DC bin is zero.
#[cfg(feature = "std")]
pub fn pink_noise(
    rows: usize,
    cols: usize,
    snr_db: f64,
    signal_power_per_user: f64,
    seed: u64,
) -> Result<Matrix> {
    use alloc::vec;
    use num_complex::Complex64;
    use rustfft::FftPlanner;

    check_noise_args(rows, cols, snr_db)?;
    if cols < 2 {
        return Err(Error::Dimension(
            "pink noise needs at least 2 samples per row".into(),
        ));
    }
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(cols);
    let mut data = Vec::with_capacity(rows * cols);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); cols];
    for r in 0..rows {
        let mut rng = row_stream(seed, r);
        spectrum
            .iter_mut()
            .for_each(|v| *v = Complex64::new(0.0, 0.0));
        let half = cols / 2;
        for f in 1..=half {
            let amp = 1.0 / math::sqrt(f as f64);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if 2 * f == cols {
                // Nyquist bin of an even length is real.
                spectrum[f] = Complex64::new(amp * re, 0.0);
            } else {
                spectrum[f] = Complex64::new(amp * re, amp * im);
                spectrum[cols - f] = spectrum[f].conj();
            }
        }
        ifft.process(&mut spectrum);
        data.extend(spectrum.iter().map(|v| v.re));
    }
    let power = data.iter().map(|v| v * v).sum::<f64>() / data.len() as f64;
    let gain = math::sqrt(noise_variance(signal_power_per_user, snr_db) / power);
    data.iter_mut().for_each(|v| *v *= gain);
    Ok(Matrix::from_raw(rows, cols, data))
}

#[cfg(not(feature = "std"))]
pub fn pink_noise(
    rows: usize,
    cols: usize,
    snr_db: f64,
    _signal_power_per_user: f64,
    _seed: u64,
) -> Result<Matrix> {
    check_noise_args(rows, cols, snr_db)?;
    Err(Error::Unsupported("pink noise requires the `std` feature"))
}

/// Build one frame: symbols, spreading and noise, all derived from
/// `scenario.seed`.
pub fn synthesize(scenario: &LinkScenario, codes: &GoldCodeSet) -> Result<TransmittedFrame> {
    scenario.validate()?;
    if codes.length != scenario.chips {
        return Err(Error::InvalidConfig(format!(
            "scenario has {} chips but codes have length {}",
            scenario.chips, codes.length
        )));
    }
    let symbols = generate_symbols(
        scenario.users,
        scenario.symbols,
        derive(scenario.seed, SYMBOL_STREAM),
    )?;
    let (mixing, clean) = spread_and_mix(&symbols, codes)?;
    let noise_seed = derive(scenario.seed, NOISE_STREAM);
    let power = signal_power_per_user(scenario.chips);
    let (rows, cols) = clean.shape();
    let noise_realization = match scenario.noise {
        NoiseKind::Silent => Matrix::zeros(rows, cols),
        NoiseKind::Awgn => awgn(rows, cols, scenario.snr_db, power, noise_seed)?,
        NoiseKind::Pink => pink_noise(rows, cols, scenario.snr_db, power, noise_seed)?,
    };
    let received = clean.add(&noise_realization)?;
    Ok(TransmittedFrame {
        symbols,
        mixing,
        received,
        noise_realization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ica::Algorithm;

    fn scenario(noise: NoiseKind, users: usize) -> LinkScenario {
        LinkScenario {
            users,
            chips: 31,
            symbols: 1000,
            snr_db: 0.0,
            noise,
            algorithm: IcaConfig::new(Algorithm::Jade),
            seed: 42,
        }
    }

    #[test]
    fn scenario_validation() {
        assert!(scenario(NoiseKind::Awgn, 30).validate().is_ok());
        assert!(scenario(NoiseKind::Awgn, 31).validate().is_err());
        assert!(scenario(NoiseKind::Awgn, 0).validate().is_err());
        let mut s = scenario(NoiseKind::Awgn, 3);
        s.symbols = 99;
        assert!(s.validate().is_err());
        s.symbols = 100;
        s.snr_db = f64::INFINITY;
        assert!(s.validate().is_err());
    }

    #[test]
    fn frame_bookkeeping() {
        let codes = GoldCodeSet::standard();
        let f = synthesize(&scenario(NoiseKind::Awgn, 5), &codes).unwrap();
        let rebuilt = (&f.mixing * &f.symbols).add(&f.noise_realization).unwrap();
        assert!(rebuilt.sub(&f.received).unwrap().max_abs() < 1e-12);
        for k in 0..5 {
            let col = f.mixing.column(k);
            assert!(math::abs(crate::numkit::norm(&col) - 1.0) < 1e-12);
        }
    }

    #[test]
    fn silent_channel_is_clean() {
        let codes = GoldCodeSet::standard();
        let f = synthesize(&scenario(NoiseKind::Silent, 2), &codes).unwrap();
        assert_eq!(f.noise_realization.max_abs(), 0.0);
    }

    #[test]
    fn seeds_change_noise_not_mixing() {
        let codes = GoldCodeSet::standard();
        let a = synthesize(&scenario(NoiseKind::Awgn, 4), &codes).unwrap();
        let mut other = scenario(NoiseKind::Awgn, 4);
        other.seed = 43;
        let b = synthesize(&other, &codes).unwrap();
        assert_eq!(a.mixing, b.mixing);
        assert_ne!(a.noise_realization, b.noise_realization);
    }

    #[test]
    fn ebn0_mapping_inverts() {
        assert!(math::abs(ebn0_db(snr_db_for_ebn0(4.0, 31), 31) - 4.0) < 1e-12);
        // 31/2 ≈ 11.9 dB
        assert!(math::abs(ebn0_db(0.0, 31) - 11.903_316_981_702_915) < 1e-9);
    }

    #[test]
    fn noise_rejects_bad_args() {
        assert!(awgn(0, 3, 0.0, 1.0, 1).is_err());
        assert!(awgn(2, 3, f64::NAN, 1.0, 1).is_err());
        assert!(pink_noise(2, 3, f64::INFINITY, 1.0, 1).is_err());
    }
}
