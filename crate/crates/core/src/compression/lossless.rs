//! Lossless baseline through an external byte codec.

use std::io::{Read, Write};

use log::warn;
use serde::{Deserialize, Serialize};

use super::{bundle::compress_frame, bundle::serialize_bundle};
use crate::data::TimeSeriesFrame;
use crate::error::Result;
use crate::wavelet::Wavelet;

/// A general-purpose lossless byte compressor, used as a black box.
pub trait LosslessCodec {
    fn name(&self) -> &str;
    fn compress(&self, bytes: &[u8]) -> std::io::Result<Vec<u8>>;
    fn decompress(&self, bytes: &[u8]) -> std::io::Result<Vec<u8>>;
}

/// Brotli (RFC 7932) stream codec.
#[derive(Debug, Clone, Copy)]
pub struct Brotli {
    pub quality: u32,
    pub lgwin: u32,
}

impl Default for Brotli {
    fn default() -> Self {
        Brotli { quality: 9, lgwin: 22 }
    }
}

impl LosslessCodec for Brotli {
    fn name(&self) -> &str {
        "brotli"
    }

    fn compress(&self, bytes: &[u8]) -> std::io::Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut writer = brotli::CompressorWriter::new(&mut out, 4096, self.quality, self.lgwin);
            writer.write_all(bytes)?;
            writer.flush()?;
        }
        Ok(out)
    }

    fn decompress(&self, bytes: &[u8]) -> std::io::Result<Vec<u8>> {
        let mut out = Vec::new();
        brotli::Decompressor::new(bytes, 4096).read_to_end(&mut out)?;
        Ok(out)
    }
}

/// Outcome of running the codec over one byte buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosslessEntry {
    pub codec: String,
    pub bytes_raw: usize,
    /// `None` when the codec failed.
    pub bytes_compressed: Option<usize>,
}

impl LosslessEntry {
    /// `1 - compressed / raw`, or `None` if unavailable.
    pub fn rate(&self) -> Option<f64> {
        let c = self.bytes_compressed?;
        (self.bytes_raw > 0).then(|| 1.0 - c as f64 / self.bytes_raw as f64)
    }
}

/// Compresses `bytes` and records the sizes; codec failures are logged and
/// reported as unavailable rather than propagated.
pub fn measure_lossless(bytes: &[u8], codec: &dyn LosslessCodec) -> LosslessEntry {
    let bytes_compressed = match codec.compress(bytes) {
        Ok(out) => Some(out.len()),
        Err(e) => {
            warn!("lossless codec {} unavailable: {e}", codec.name());
            None
        }
    };
    if let Some(c) = bytes_compressed.filter(|&c| c > bytes.len()) {
        warn!("{} grew the input from {} to {c} bytes", codec.name(), bytes.len());
    }
    LosslessEntry {
        codec: codec.name().to_string(),
        bytes_raw: bytes.len(),
        bytes_compressed,
    }
}

/// Little-endian `f64` bytes of every variable, variable after variable.
pub fn raw_bytes(frame: &TimeSeriesFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(frame.len() * frame.variable_count() * 8);
    for (_, _, values) in frame.variables() {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Sizes for one lossy configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByteCounts {
    pub wavelet: Wavelet,
    pub rate: f64,
    pub achieved_rate: f64,
    pub bytes_raw: usize,
    pub bytes_lossless: Option<usize>,
    /// Serialized bundle size.
    pub bytes_lossy: usize,
    /// Bundle size after the lossless codec.
    pub bytes_lossy_coded: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub lossless_rate: Option<f64>,
    pub lossy_rates: Vec<f64>,
    pub entries: Vec<ByteCounts>,
}

/// Byte accounting for a frame over the given wavelets and rates.
pub fn compression_report(
    frame: &TimeSeriesFrame,
    wavelets: &[Wavelet],
    rates: &[f64],
    codec: &dyn LosslessCodec,
) -> Result<CompressionReport> {
    let raw = raw_bytes(frame);
    let baseline = measure_lossless(&raw, codec);
    let mut entries = Vec::new();
    for &wavelet in wavelets {
        for &rate in rates {
            let bundle = compress_frame(frame, wavelet, rate)?;
            let bytes = serialize_bundle(&bundle)?;
            let achieved = bundle.variables.iter().map(|v| v.signal.achieved_rate()).sum::<f64>()
                / bundle.variables.len().max(1) as f64;
            entries.push(ByteCounts {
                wavelet,
                rate,
                achieved_rate: achieved,
                bytes_raw: raw.len(),
                bytes_lossless: baseline.bytes_compressed,
                bytes_lossy: bytes.len(),
                bytes_lossy_coded: measure_lossless(&bytes, codec).bytes_compressed,
            });
        }
    }
    Ok(CompressionReport {
        lossless_rate: baseline.rate(),
        lossy_rates: rates.to_vec(),
        entries,
    })
}
