//! Raw frames to normalized train/validation/test splits.

use log::info;
use serde::{Deserialize, Serialize};

use crate::data::{
    apply_normalization, fit_normalization, interpolate_gaps, segment, split_datasets, DatasetSplit,
    NormalizationParams, TimeSeriesFrame, DEFAULT_MAX_GAP_MINUTES,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepareConfig {
    pub max_gap_minutes: i64,
    pub min_days: f64,
    pub max_days: f64,
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            max_gap_minutes: DEFAULT_MAX_GAP_MINUTES,
            min_days: 5.0,
            max_days: 10.0,
            fractions: [0.6, 0.2, 0.2],
            seed: crate::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    /// Normalized splits.
    pub split: DatasetSplit,
    pub normalization: NormalizationParams,
    /// Values clamped into `[0, 1]` in the validation and test splits.
    pub clamped: usize,
    /// Segments shorter than `min_days` that were dropped.
    pub dropped_short: usize,
}

/// Interpolates, segments, splits and normalizes (fitting on training only).
/// Segments shorter than `min_days` are dropped.
pub fn prepare_splits(frames: &[TimeSeriesFrame], config: &PrepareConfig) -> Result<Prepared> {
    let mut segments = Vec::new();
    let mut dropped_short = 0;
    let min_seconds = config.min_days * 86_400.0;
    for frame in frames {
        for piece in interpolate_gaps(frame, config.max_gap_minutes)? {
            for seg in segment(&piece, config.min_days, config.max_days)? {
                if (seg.duration_seconds() as f64) < min_seconds {
                    dropped_short += 1;
                } else {
                    segments.push(seg);
                }
            }
        }
    }
    if dropped_short > 0 {
        info!("dropped {dropped_short} segments shorter than {} days", config.min_days);
    }
    let raw = split_datasets(&segments, config.fractions, config.seed)?;
    let normalization = fit_normalization(&raw.train)?;
    let mut clamped = 0;
    let mut scale = |frames: &[TimeSeriesFrame]| -> Result<Vec<TimeSeriesFrame>> {
        frames
            .iter()
            .map(|f| {
                let (scaled, c) = apply_normalization(f, &normalization)?;
                clamped += c;
                Ok(scaled)
            })
            .collect()
    };
    let train = scale(&raw.train)?;
    let validation = scale(&raw.validation)?;
    let test = scale(&raw.test)?;
    Ok(Prepared {
        split: DatasetSplit {
            train,
            validation,
            test,
            seed: config.seed,
        },
        normalization,
        clamped,
        dropped_short,
    })
}
