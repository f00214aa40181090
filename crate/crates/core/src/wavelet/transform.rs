//! Single-level and multilevel discrete wavelet transforms.
//!
//! Analysis computes, for output index `o`,
//!
//! ```text
//! out[o] = sum_j f[j] * x_ext[2o + 1 - j]
//! ```
//!
//! where `x_ext` is the boundary-extended input. Synthesis upsamples the
//! coefficients and keeps the fully overlapped part of the convolution with
//! the synthesis filters, then trims to the requested length.
//!
//! Level lengths: `n_{j+1} = floor((n_j + F - 1) / 2)` for symmetric extension
//! and `ceil(n_j / 2)` for periodization (odd inputs are padded by repeating
//! the last sample).

use serde::{Deserialize, Serialize};

use super::filters::{FilterBank, Wavelet};
use crate::error::{Error, Result};

/// Signal extension used at the boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Half-sample symmetric extension: `... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...`
    #[default]
    Symmetric,
    /// Periodic extension with critically sampled output.
    Periodization,
}

impl BoundaryMode {
    pub fn id(self) -> u8 {
        match self {
            BoundaryMode::Symmetric => 0,
            BoundaryMode::Periodization => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(BoundaryMode::Symmetric),
            1 => Some(BoundaryMode::Periodization),
            _ => None,
        }
    }
}

/// Number of coefficients per band produced from `n` input samples.
pub fn coeff_len(n: usize, filter_len: usize, mode: BoundaryMode) -> usize {
    match mode {
        BoundaryMode::Symmetric => (n + filter_len - 1) / 2,
        BoundaryMode::Periodization => n.div_ceil(2),
    }
}

/// Deepest useful level: the largest `L` with `(F - 1) * 2^L <= n`.
pub fn max_level(n: usize, filter_len: usize) -> usize {
    let base = filter_len.saturating_sub(1).max(1);
    let mut level = 0;
    while base.checked_shl(level as u32 + 1).is_some_and(|v| v <= n) {
        level += 1;
    }
    if base > n {
        0
    } else {
        level
    }
}

#[inline]
fn mirror(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let r = i.rem_euclid(period);
    if r < n as isize {
        r as usize
    } else {
        (period - 1 - r) as usize
    }
}

fn analysis_symmetric(x: &[f64], f: &[f64], out: &mut [f64]) {
    let n = x.len();
    let flen = f.len();
    for (o, slot) in out.iter_mut().enumerate() {
        let i = 2 * o + 1;
        let mut acc = 0.0;
        if i + 1 > flen && i < n {
            let window = &x[i + 1 - flen..=i];
            for (fj, xv) in f.iter().zip(window.iter().rev()) {
                acc += fj * xv;
            }
        } else {
            for (j, fj) in f.iter().enumerate() {
                acc += fj * x[mirror(i as isize - j as isize, n)];
            }
        }
        *slot = acc;
    }
}

fn analysis_periodic(x: &[f64], f: &[f64], out: &mut [f64]) {
    let n = x.len();
    let padded = n + n % 2;
    let at = |k: isize| {
        let idx = k.rem_euclid(padded as isize) as usize;
        x[idx.min(n - 1)]
    };
    for (o, slot) in out.iter_mut().enumerate() {
        let i = (2 * o + 1) as isize;
        *slot = f.iter().enumerate().map(|(j, fj)| fj * at(i - j as isize)).sum();
    }
}

/// One analysis step: returns `(approx, detail)`.
pub fn dwt_single(signal: &[f64], bank: &FilterBank, mode: BoundaryMode) -> Result<(Vec<f64>, Vec<f64>)> {
    if signal.len() < 2 {
        return Err(Error::InputTooShort {
            need: 2,
            got: signal.len(),
        });
    }
    let m = coeff_len(signal.len(), bank.filter_len(), mode);
    let mut approx = vec![0.0; m];
    let mut detail = vec![0.0; m];
    match mode {
        BoundaryMode::Symmetric => {
            analysis_symmetric(signal, bank.dec_lo, &mut approx);
            analysis_symmetric(signal, bank.dec_hi, &mut detail);
        }
        BoundaryMode::Periodization => {
            analysis_periodic(signal, bank.dec_lo, &mut approx);
            analysis_periodic(signal, bank.dec_hi, &mut detail);
        }
    }
    Ok((approx, detail))
}

/// One synthesis step producing exactly `out_len` samples.
pub fn idwt_single(
    approx: &[f64],
    detail: &[f64],
    bank: &FilterBank,
    mode: BoundaryMode,
    out_len: usize,
) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(Error::Shape(format!(
            "approximation has {} coefficients but detail has {}",
            approx.len(),
            detail.len()
        )));
    }
    let flen = bank.filter_len();
    if out_len == 0 || coeff_len(out_len, flen, mode) != approx.len() {
        return Err(Error::Shape(format!(
            "{} coefficients per band cannot reconstruct {} samples",
            approx.len(),
            out_len
        )));
    }
    let half = flen / 2;
    let m = approx.len();
    let mut out = match mode {
        BoundaryMode::Symmetric => {
            let mut out = vec![0.0; 2 * m + 2 - flen];
            for k in 0..=(m - half) {
                let i = k + half - 1;
                let (mut even, mut odd) = (0.0, 0.0);
                for j in 0..half {
                    even += bank.rec_lo[2 * j] * approx[i - j] + bank.rec_hi[2 * j] * detail[i - j];
                    odd += bank.rec_lo[2 * j + 1] * approx[i - j] + bank.rec_hi[2 * j + 1] * detail[i - j];
                }
                out[2 * k] = even;
                out[2 * k + 1] = odd;
            }
            out
        }
        BoundaryMode::Periodization => {
            let mut out = vec![0.0; 2 * m];
            for k in 0..m {
                let i = (k + half - 1) as isize;
                let (mut even, mut odd) = (0.0, 0.0);
                for j in 0..half {
                    let c = (i - j as isize).rem_euclid(m as isize) as usize;
                    even += bank.rec_lo[2 * j] * approx[c] + bank.rec_hi[2 * j] * detail[c];
                    odd += bank.rec_lo[2 * j + 1] * approx[c] + bank.rec_hi[2 * j + 1] * detail[c];
                }
                out[2 * k] = even;
                out[2 * k + 1] = odd;
            }
            out
        }
    };
    out.truncate(out_len);
    Ok(out)
}

/// Requested decomposition depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Levels {
    #[default]
    Auto,
    Fixed(usize),
}

/// Multilevel decomposition of one signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletCoefficients {
    /// Approximation at the deepest level.
    pub approx: Vec<f64>,
    /// Detail bands, finest first: `details[0]` is `d_1`.
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    pub wavelet: Wavelet,
    pub boundary_mode: BoundaryMode,
}

impl WaveletCoefficients {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Total number of stored coefficients.
    pub fn total_len(&self) -> usize {
        self.approx.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    /// Coefficients in flat order `[a_L, d_L, d_{L-1}, ..., d_1]`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.total_len());
        flat.extend_from_slice(&self.approx);
        for d in self.details.iter().rev() {
            flat.extend_from_slice(d);
        }
        flat
    }

    /// Inverse of [`flatten`](Self::flatten) given the decomposition geometry.
    pub fn from_flat(
        flat: &[f64],
        wavelet: Wavelet,
        boundary_mode: BoundaryMode,
        levels: usize,
        original_length: usize,
    ) -> Result<Self> {
        let lengths = level_lengths(original_length, wavelet.bank().filter_len(), boundary_mode, levels);
        let band_lens: Vec<usize> = lengths[1..].to_vec();
        let expected = lengths[levels] + band_lens.iter().sum::<usize>();
        if flat.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} flattened coefficients, got {}",
                flat.len()
            )));
        }
        let approx = flat[..lengths[levels]].to_vec();
        let mut offset = lengths[levels];
        let mut details = vec![Vec::new(); levels];
        for level in (1..=levels).rev() {
            let len = lengths[level];
            details[level - 1] = flat[offset..offset + len].to_vec();
            offset += len;
        }
        Ok(WaveletCoefficients {
            approx,
            details,
            original_length,
            wavelet,
            boundary_mode,
        })
    }
}

/// Lengths `n_0, n_1, ..., n_L` of the approximation at each level.
pub fn level_lengths(n0: usize, filter_len: usize, mode: BoundaryMode, levels: usize) -> Vec<usize> {
    let mut lengths = Vec::with_capacity(levels + 1);
    lengths.push(n0);
    for j in 0..levels {
        lengths.push(coeff_len(lengths[j], filter_len, mode));
    }
    lengths
}

/// Multilevel decomposition down to `levels` (or the deepest useful level).
pub fn wavedec(signal: &[f64], bank: &FilterBank, levels: Levels, mode: BoundaryMode) -> Result<WaveletCoefficients> {
    if signal.len() < 2 {
        return Err(Error::InputTooShort {
            need: 2,
            got: signal.len(),
        });
    }
    let allowed = max_level(signal.len(), bank.filter_len()).max(1);
    let depth = match levels {
        Levels::Auto => allowed,
        Levels::Fixed(0) => return Err(Error::Config("decomposition needs at least one level".into())),
        Levels::Fixed(l) if l > allowed => {
            return Err(Error::ExcessLevel {
                requested: l,
                max: allowed,
            })
        }
        Levels::Fixed(l) => l,
    };
    let mut approx = signal.to_vec();
    let mut details = Vec::with_capacity(depth);
    for _ in 0..depth {
        let (a, d) = dwt_single(&approx, bank, mode)?;
        details.push(d);
        approx = a;
    }
    Ok(WaveletCoefficients {
        approx,
        details,
        original_length: signal.len(),
        wavelet: bank.wavelet,
        boundary_mode: mode,
    })
}

/// Multilevel reconstruction; returns exactly `original_length` samples.
pub fn waverec(coeffs: &WaveletCoefficients) -> Result<Vec<f64>> {
    let bank = coeffs.wavelet.bank();
    let levels = coeffs.levels();
    if levels == 0 {
        return Err(Error::Shape("no detail levels".into()));
    }
    let lengths = level_lengths(coeffs.original_length, bank.filter_len(), coeffs.boundary_mode, levels);
    if coeffs.approx.len() != lengths[levels] {
        return Err(Error::Shape(format!(
            "approximation has {} coefficients, expected {}",
            coeffs.approx.len(),
            lengths[levels]
        )));
    }
    for (j, d) in coeffs.details.iter().enumerate() {
        if d.len() != lengths[j + 1] {
            return Err(Error::Shape(format!(
                "detail level {} has {} coefficients, expected {}",
                j + 1,
                d.len(),
                lengths[j + 1]
            )));
        }
    }
    let mut current = coeffs.approx.clone();
    for level in (1..=levels).rev() {
        current = idwt_single(
            &current,
            &coeffs.details[level - 1],
            &bank,
            coeffs.boundary_mode,
            lengths[level - 1],
        )?;
    }
    Ok(current)
}
