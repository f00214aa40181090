//! Normalized mutual information between a signal and its compressed versions.

use serde::{Deserialize, Serialize};

use super::ksg::{ksg_mi_jittered, mix_seed};
use crate::compression::reconstruct;
use crate::error::{Error, Result};
use crate::wavelet::Wavelet;

/// NMI at one compression rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmiPoint {
    pub rate: f64,
    pub nmi: f64,
}

/// Seed for the jitter applied when measuring at `rate`.
pub fn rate_seed(seed: u64, rate: f64) -> u64 {
    mix_seed(seed, rate.to_bits())
}

/// `NMI(r) = I(Y_r; Y) / I(Y_0; Y)` for each rate, clipped to `[0, 1]`.
///
/// `Y_r` is the reconstruction at rate `r`. The normalizer uses the rate-0
/// reconstruction; both estimates use tie-breaking jitter seeded from
/// `(jitter_seed, rate)`. Rate 0 maps to exactly 1.
pub fn nmi_curve(
    original: &[f64],
    wavelet: Wavelet,
    rates: &[f64],
    k: usize,
    jitter_seed: u64,
) -> Result<Vec<NmiPoint>> {
    if rates.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("NMI rates must be strictly ascending".into()));
    }
    let base = reconstruct(original, wavelet, 0.0)?;
    let norm = ksg_mi_jittered(&base, original, k, rate_seed(jitter_seed, 0.0))?.value;
    if !(norm > 0.0) {
        return Err(Error::Data(
            "zero mutual information between a signal and its lossless reconstruction".into(),
        ));
    }
    rates
        .iter()
        .map(|&rate| {
            if rate == 0.0 {
                return Ok(NmiPoint { rate, nmi: 1.0 });
            }
            let approx = reconstruct(original, wavelet, rate)?;
            let mi = ksg_mi_jittered(&approx, original, k, rate_seed(jitter_seed, rate))?.value;
            Ok(NmiPoint {
                rate,
                nmi: (mi / norm).clamp(0.0, 1.0),
            })
        })
        .collect()
}
