//! Biorthogonal spline wavelets and the discrete wavelet transform.

mod filters;
mod transform;

pub use filters::{filter_bank, FilterBank, Wavelet};
pub use transform::{
    coeff_len, dwt_single, idwt_single, level_lengths, max_level, wavedec, waverec, BoundaryMode, Levels,
    WaveletCoefficients,
};
