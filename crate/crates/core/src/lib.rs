//! Blind source separation for DS-CDMA downlink detection.
//!
//! The crate is `no_std` (with `alloc`) at its core. It provides:
//!
//! - [`numkit`]: dense matrices, covariance, symmetric eigendecomposition,
//!   whitening, fourth-order cumulant eigen-matrices and orthogonal joint
//!   diagonalization.
//! - [`ica`]: Comon's pairwise kurtosis contrast, JADE and deflationary
//!   FastICA behind one [`ica::separate`] entry point.
//! - [`codes`]: m-sequences and the length-31 Gold family.
//! - [`channel`]: synchronous single-path downlink synthesis `R = GB + N`
//!   with white or 1/f noise.
//! - [`detectors`]: the matched-filter receiver, the pilot-resolved ICA
//!   receiver and their soft-confidence combination.
//!
//! The `std` feature (on by default) pulls in an FFT for the pink noise
//! generator. Without it, [`channel::NoiseKind::Pink`] reports
//! [`Error::Unsupported`].

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod codes;
pub mod detectors;
mod error;
pub mod ica;
mod math;
pub mod numkit;
pub mod rng;

pub use error::{Error, Result};
pub use numkit::{Matrix, SignalMatrix};
