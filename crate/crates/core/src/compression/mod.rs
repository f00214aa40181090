//! Rate-exact wavelet thresholding, sparse storage and reconstruction.
//!
//! A signal is decomposed, the `K` largest-magnitude coefficients across all
//! levels (approximation included) are kept and the rest are zeroed, with
//! `K = total - round(rate * N)` for `N` input samples. Equal magnitudes are
//! ranked by flat index, so the kept set at a higher rate is always a subset
//! of the kept set at a lower one.

mod bundle;
mod format;
mod lossless;

use std::cmp::Ordering;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::{level_lengths, wavedec, waverec, BoundaryMode, Levels, Wavelet, WaveletCoefficients};

pub use bundle::{
    compress_frame, decompress_frame, deserialize_bundle, reconstruct_frame, serialize_bundle, CompressedFrame,
    CompressedVariable,
};
pub use format::{deserialize, read_varint, serialize, write_varint, FORMAT_VERSION};
pub use lossless::{
    compression_report, measure_lossless, raw_bytes, Brotli, ByteCounts, CompressionReport, LosslessCodec,
    LosslessEntry,
};

/// Sparse thresholded coefficients plus what is needed to reconstruct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedSignal {
    pub wavelet: Wavelet,
    pub boundary_mode: BoundaryMode,
    pub levels: usize,
    pub original_length: usize,
    /// `(flat_index, value)` with strictly increasing indices into the
    /// `[a_L, d_L, ..., d_1]` coefficient order.
    pub kept: Vec<(u64, f64)>,
}

impl CompressedSignal {
    /// Number of coefficients in the full decomposition.
    pub fn total_coefficients(&self) -> usize {
        total_coefficients(self.wavelet, self.boundary_mode, self.levels, self.original_length)
    }

    /// Zeroed coefficients.
    pub fn zero_count(&self) -> usize {
        self.total_coefficients().saturating_sub(self.kept.len())
    }

    /// Achieved rate: zero count over the number of samples.
    pub fn achieved_rate(&self) -> f64 {
        if self.original_length == 0 {
            return 0.0;
        }
        self.zero_count() as f64 / self.original_length as f64
    }
}

pub(crate) fn total_coefficients(wavelet: Wavelet, mode: BoundaryMode, levels: usize, n: usize) -> usize {
    let lengths = level_lengths(n, wavelet.bank().filter_len(), mode, levels);
    lengths[levels] + lengths[1..].iter().sum::<usize>()
}

/// Number of kept coefficients for a rate, clamped to `[1, total]`.
pub fn keep_count(total: usize, original_length: usize, rate: f64) -> usize {
    let zeros = (rate * original_length as f64).round() as usize;
    total.saturating_sub(zeros).clamp(1, total.max(1))
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::InvalidRate(rate))
    }
}

/// Indices of the `k` largest magnitudes, lower index first on ties, sorted ascending.
pub fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let rank =
        |a: &usize, b: &usize| -> Ordering { values[*b].abs().total_cmp(&values[*a].abs()).then_with(|| a.cmp(b)) };
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let k = k.min(idx.len());
    if k < idx.len() && k > 0 {
        idx.select_nth_unstable_by(k - 1, rank);
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Compresses with automatic depth and symmetric extension.
pub fn compress(signal: &[f64], wavelet: Wavelet, rate: f64) -> Result<CompressedSignal> {
    compress_with(signal, wavelet, rate, Levels::Auto, BoundaryMode::Symmetric)
}

/// Compresses with explicit depth and boundary mode.
pub fn compress_with(
    signal: &[f64],
    wavelet: Wavelet,
    rate: f64,
    levels: Levels,
    mode: BoundaryMode,
) -> Result<CompressedSignal> {
    check_rate(rate)?;
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("signal contains non-finite values".into()));
    }
    let coeffs = wavedec(signal, &wavelet.bank(), levels, mode)?;
    let flat = coeffs.flatten();
    let total = flat.len();
    let zeros = (rate * signal.len() as f64).round() as usize;
    if zeros >= total {
        warn!(
            "rate {rate} on {} samples asks for {zeros} zeros out of {total} coefficients; keeping one",
            signal.len()
        );
    }
    let k = keep_count(total, signal.len(), rate);
    let kept = top_k_indices(&flat, k)
        .into_iter()
        .map(|i| (i as u64, flat[i]))
        .collect();
    Ok(CompressedSignal {
        wavelet,
        boundary_mode: mode,
        levels: coeffs.levels(),
        original_length: signal.len(),
        kept,
    })
}

/// Scatters the kept coefficients into a zero vector and inverts the transform.
pub fn decompress(cs: &CompressedSignal) -> Result<Vec<f64>> {
    if cs.levels == 0 {
        return Err(Error::Corruption("zero decomposition levels".into()));
    }
    let total = cs.total_coefficients();
    let mut flat = vec![0.0; total];
    let mut prev: Option<u64> = None;
    for &(idx, value) in &cs.kept {
        if prev.is_some_and(|p| idx <= p) {
            return Err(Error::Corruption(format!("index {idx} is not increasing")));
        }
        let slot = flat
            .get_mut(idx as usize)
            .ok_or_else(|| Error::Corruption(format!("index {idx} out of range for {total} coefficients")))?;
        *slot = value;
        prev = Some(idx);
    }
    let coeffs = WaveletCoefficients::from_flat(&flat, cs.wavelet, cs.boundary_mode, cs.levels, cs.original_length)?;
    waverec(&coeffs)
}

/// `decompress(compress(signal, wavelet, rate))`.
pub fn reconstruct(signal: &[f64], wavelet: Wavelet, rate: f64) -> Result<Vec<f64>> {
    decompress(&compress(signal, wavelet, rate)?)
}
