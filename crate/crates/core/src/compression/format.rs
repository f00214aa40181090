//! `WVC1` binary layout for one compressed signal (little-endian):
//!
//! ```text
//! magic "WVC1" | version u8 | wavelet id u8 | boundary mode u8 | levels u8
//! | original_length u64 | kept_count u64
//! | kept_count LEB128 index deltas (first delta from 0)
//! | kept_count f64 values
//! ```

use super::{total_coefficients, CompressedSignal};
use crate::error::{Error, Result};
use crate::wavelet::{BoundaryMode, Wavelet};

pub const MAGIC: &[u8; 4] = b"WVC1";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

/// Appends `value` as unsigned LEB128.
pub fn write_varint(out: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Reads one unsigned LEB128 value starting at `*pos`, advancing it.
pub fn read_varint(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let start = *pos;
    let mut value: u64 = 0;
    for shift in (0..64).step_by(7) {
        let byte = *bytes.get(*pos).ok_or_else(|| Error::Format {
            offset: *pos,
            msg: "truncated varint".into(),
        })?;
        *pos += 1;
        let bits = u64::from(byte & 0x7f);
        if shift == 63 && bits > 1 {
            break;
        }
        value |= bits << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
    }
    Err(Error::Format {
        offset: start,
        msg: "varint overflows 64 bits".into(),
    })
}

/// Encodes a compressed signal.
pub fn serialize(cs: &CompressedSignal) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + cs.kept.len() * 10);
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.push(cs.wavelet.id());
    out.push(cs.boundary_mode.id());
    out.push(u8::try_from(cs.levels).unwrap_or(u8::MAX));
    out.extend_from_slice(&(cs.original_length as u64).to_le_bytes());
    out.extend_from_slice(&(cs.kept.len() as u64).to_le_bytes());
    let mut prev = 0;
    for &(idx, _) in &cs.kept {
        write_varint(&mut out, idx - prev);
        prev = idx;
    }
    for &(_, value) in &cs.kept {
        out.extend_from_slice(&value.to_le_bytes());
    }
    out
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&bytes[at..at + 8]);
    u64::from_le_bytes(buf)
}

/// Decodes a compressed signal, validating every field.
pub fn deserialize(bytes: &[u8]) -> Result<CompressedSignal> {
    let fail = |offset: usize, msg: &str| Error::Format {
        offset,
        msg: msg.to_string(),
    };
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(fail(0, "bad magic"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(fail(bytes.len(), "truncated header"));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(fail(4, &format!("unsupported version {}", bytes[4])));
    }
    let wavelet = Wavelet::from_id(bytes[5]).ok_or_else(|| fail(5, &format!("unknown wavelet id {}", bytes[5])))?;
    let boundary_mode =
        BoundaryMode::from_id(bytes[6]).ok_or_else(|| fail(6, &format!("unknown boundary mode {}", bytes[6])))?;
    let levels = bytes[7] as usize;
    if levels == 0 {
        return Err(fail(7, "zero decomposition levels"));
    }
    let original_length = usize::try_from(read_u64(bytes, 8)).map_err(|_| fail(8, "length overflows usize"))?;
    if original_length < 2 {
        return Err(fail(8, "original length below 2"));
    }
    let kept_count = read_u64(bytes, 16);
    let total = total_coefficients(wavelet, boundary_mode, levels, original_length) as u64;
    if kept_count > total {
        return Err(fail(16, "more kept coefficients than the decomposition holds"));
    }
    // Each entry needs at least one index byte and eight value bytes.
    if kept_count > ((bytes.len() - HEADER_LEN) / 9) as u64 {
        return Err(fail(bytes.len(), "truncated coefficient data"));
    }
    let kept_count = kept_count as usize;
    let mut pos = HEADER_LEN;
    let mut indices = Vec::with_capacity(kept_count);
    let mut prev: u64 = 0;
    for i in 0..kept_count {
        let at = pos;
        let delta = read_varint(bytes, &mut pos)?;
        if i > 0 && delta == 0 {
            return Err(fail(at, "repeated coefficient index"));
        }
        let idx = prev
            .checked_add(delta)
            .filter(|&v| v < total)
            .ok_or_else(|| fail(at, "coefficient index out of range"))?;
        indices.push(idx);
        prev = idx;
    }
    let need = pos + 8 * kept_count;
    if bytes.len() < need {
        return Err(fail(bytes.len(), "truncated value stream"));
    }
    if bytes.len() > need {
        return Err(fail(need, "trailing bytes after value stream"));
    }
    let kept = indices
        .into_iter()
        .enumerate()
        .map(|(i, idx)| (idx, f64::from_bits(read_u64(bytes, pos + 8 * i))))
        .collect();
    Ok(CompressedSignal {
        wavelet,
        boundary_mode,
        levels,
        original_length,
        kept,
    })
}
