//! Wavelet compression of sensor time series and its effect on forecasting.
//!
//! The crate covers the whole pipeline: ingestion and preparation of
//! multivariate series ([`data`]), biorthogonal wavelet transforms
//! ([`wavelet`]), rate-exact coefficient thresholding and serialization
//! ([`compression`]), kNN mutual information ([`infometrics`]), lagged
//! forecasters ([`forecasting`]), curve fitting ([`analysis`]) and the
//! compression-by-forecaster experiment grid ([`experiment`]).

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod compression;
pub mod data;
pub mod error;
pub mod experiment;
pub mod forecasting;
pub mod fsutil;
pub mod infometrics;
pub mod wavelet;

pub use error::{Error, Result};

/// Seed used when neither `--seed` nor `WAVECAST_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_229;
