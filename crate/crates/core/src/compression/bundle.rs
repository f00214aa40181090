//! Per-variable compression of whole frames and the `WVB1` container:
//!
//! ```text
//! magic "WVB1" | variable count u8
//! | per variable: role u8 | name length u8 | name (UTF-8) | block length u64 | WVC1 block
//! ```
//!
//! Roles are 0 = target, 1 = past covariate, 2 = future covariate.

use serde::{Deserialize, Serialize};

use super::{compress, decompress, deserialize, serialize, CompressedSignal};
use crate::data::{Role, TimeSeriesFrame, Variable};
use crate::error::{Error, Result};
use crate::wavelet::Wavelet;

pub const BUNDLE_MAGIC: &[u8; 4] = b"WVB1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedVariable {
    pub role: Role,
    pub name: String,
    pub signal: CompressedSignal,
}

/// One compressed signal per frame variable, in canonical variable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedFrame {
    pub variables: Vec<CompressedVariable>,
}

/// Compresses every variable independently with the same wavelet and rate.
pub fn compress_frame(frame: &TimeSeriesFrame, wavelet: Wavelet, rate: f64) -> Result<CompressedFrame> {
    let variables = frame
        .variables()
        .map(|(name, role, values)| {
            Ok(CompressedVariable {
                role,
                name: name.to_string(),
                signal: compress(values, wavelet, rate)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CompressedFrame { variables })
}

/// Rebuilds a frame on the grid `start_unix + k * step_seconds`.
pub fn decompress_frame(bundle: &CompressedFrame, start_unix: i64, step_seconds: i64) -> Result<TimeSeriesFrame> {
    let mut target = None;
    let mut past = Vec::new();
    let mut future = Vec::new();
    let mut length = None;
    for var in &bundle.variables {
        let values = decompress(&var.signal)?;
        if *length.get_or_insert(values.len()) != values.len() {
            return Err(Error::Shape("bundle variables have different lengths".into()));
        }
        let v = Variable::new(var.name.clone(), values);
        match var.role {
            Role::Target if target.is_none() => target = Some(v),
            Role::Target => return Err(Error::Corruption("bundle holds two target variables".into())),
            Role::Past => past.push(v),
            Role::Future => future.push(v),
        }
    }
    let target = target.ok_or_else(|| Error::Corruption("bundle has no target variable".into()))?;
    let n = target.values.len() as i64;
    TimeSeriesFrame::new(
        (0..n).map(|k| start_unix + k * step_seconds).collect(),
        step_seconds,
        target,
        past,
        future,
    )
}

/// Compresses and immediately reconstructs a frame, keeping its timestamps.
pub fn reconstruct_frame(frame: &TimeSeriesFrame, wavelet: Wavelet, rate: f64) -> Result<TimeSeriesFrame> {
    frame.map_variables(|_, _, v| super::reconstruct(&v.values, wavelet, rate))
}

fn role_id(role: Role) -> u8 {
    match role {
        Role::Target => 0,
        Role::Past => 1,
        Role::Future => 2,
    }
}

/// Encodes a bundle.
pub fn serialize_bundle(bundle: &CompressedFrame) -> Result<Vec<u8>> {
    let count = u8::try_from(bundle.variables.len())
        .map_err(|_| Error::Config("a bundle holds at most 255 variables".into()))?;
    let mut out = Vec::new();
    out.extend_from_slice(BUNDLE_MAGIC);
    out.push(count);
    for var in &bundle.variables {
        let name = var.name.as_bytes();
        let name_len = u8::try_from(name.len())
            .map_err(|_| Error::Config(format!("variable name `{}` exceeds 255 bytes", var.name)))?;
        let block = serialize(&var.signal);
        out.push(role_id(var.role));
        out.push(name_len);
        out.extend_from_slice(name);
        out.extend_from_slice(&(block.len() as u64).to_le_bytes());
        out.extend_from_slice(&block);
    }
    Ok(out)
}

/// Decodes a bundle; errors carry the byte offset within the container.
pub fn deserialize_bundle(bytes: &[u8]) -> Result<CompressedFrame> {
    let fail = |offset: usize, msg: &str| Error::Format {
        offset,
        msg: msg.to_string(),
    };
    if bytes.len() < 5 || &bytes[..4] != BUNDLE_MAGIC {
        return Err(fail(0, "bad bundle magic"));
    }
    let count = bytes[4] as usize;
    let mut pos = 5;
    let mut variables = Vec::with_capacity(count);
    for _ in 0..count {
        if bytes.len() < pos + 2 {
            return Err(fail(pos, "truncated variable header"));
        }
        let role = match bytes[pos] {
            0 => Role::Target,
            1 => Role::Past,
            2 => Role::Future,
            other => return Err(fail(pos, &format!("unknown role {other}"))),
        };
        let name_len = bytes[pos + 1] as usize;
        pos += 2;
        let name = bytes
            .get(pos..pos + name_len)
            .ok_or_else(|| fail(pos, "truncated variable name"))?;
        let name = std::str::from_utf8(name).map_err(|_| fail(pos, "variable name is not UTF-8"))?;
        pos += name_len;
        let len_bytes = bytes
            .get(pos..pos + 8)
            .ok_or_else(|| fail(pos, "truncated block length"))?;
        let block_len = u64::from_le_bytes(len_bytes.try_into().expect("slice of 8 bytes"));
        pos += 8;
        let end = usize::try_from(block_len)
            .ok()
            .and_then(|l| pos.checked_add(l))
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| fail(pos, "truncated signal block"))?;
        let signal = deserialize(&bytes[pos..end]).map_err(|e| match e {
            Error::Format { offset, msg } => Error::Format {
                offset: pos + offset,
                msg,
            },
            other => other,
        })?;
        variables.push(CompressedVariable {
            role,
            name: name.to_string(),
            signal,
        });
        pos = end;
    }
    if pos != bytes.len() {
        return Err(fail(pos, "trailing bytes after last block"));
    }
    Ok(CompressedFrame { variables })
}
