//! Gap repair, segmentation and dataset splitting.

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TimeSeriesFrame;
use crate::error::{Error, Result};

const SECONDS_PER_DAY: f64 = 86_400.0;

/// Splits a frame at runs of missing rows lasting `max_gap_minutes` or more
/// and drops missing rows at either end (they have no bounding observation).
pub(crate) fn split_missing_runs(frame: &TimeSeriesFrame, max_gap_minutes: i64) -> Vec<TimeSeriesFrame> {
    let n = frame.len();
    let missing: Vec<bool> = (0..n).map(|r| frame.row_missing(r)).collect();
    let max_gap_seconds = max_gap_minutes * 60;
    let mut pieces = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < n {
        if !missing[i] {
            start.get_or_insert(i);
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && missing[i] {
            i += 1;
        }
        let run_seconds = (i - run_start) as i64 * frame.step_seconds;
        match start {
            None => warn!(
                "dropping {} missing rows at the start of a frame beginning at {}",
                i - run_start,
                frame.timestamps[run_start]
            ),
            Some(_) if i == n => warn!(
                "dropping {} missing rows at the end of a frame ending at {}",
                i - run_start,
                frame.timestamps[n - 1]
            ),
            Some(s) if run_seconds >= max_gap_seconds => {
                pieces.push(frame.slice(s, run_start));
                start = None;
            }
            Some(_) => {}
        }
    }
    if let Some(s) = start {
        let end = (0..n).rev().find(|&r| !missing[r]).map_or(s, |r| r + 1);
        pieces.push(frame.slice(s, end));
    }
    pieces
}

/// Fills missing values by linear interpolation between the bounding
/// observations; gaps of `max_gap_minutes` or longer split the frame instead.
pub fn interpolate_gaps(frame: &TimeSeriesFrame, max_gap_minutes: i64) -> Result<Vec<TimeSeriesFrame>> {
    frame.validate()?;
    split_missing_runs(frame, max_gap_minutes)
        .into_iter()
        .map(|piece| piece.map_variables(|_, _, v| Ok(fill_linear(&v.values))))
        .collect()
}

/// Linear interpolation of interior `NaN` runs; observed values are copied unchanged.
fn fill_linear(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    let mut last: Option<usize> = None;
    for i in 0..values.len() {
        if values[i].is_nan() {
            continue;
        }
        if let Some(l) = last.filter(|&l| i > l + 1) {
            let (a, b) = (values[l], values[i]);
            let span = (i - l) as f64;
            for (k, slot) in out.iter_mut().enumerate().take(i).skip(l + 1) {
                let w = (k - l) as f64 / span;
                *slot = a + (b - a) * w;
            }
        }
        last = Some(i);
    }
    out
}

/// Cuts frames longer than `max_days` into `k = ceil(duration / max_days)`
/// segments whose lengths differ by at most one sample.
///
/// Every segment lies in `[min_days, max_days]` whenever the input is at least
/// `min_days` long and `max_days >= 2 * min_days`; with a narrower band no
/// equal cut may exist.
pub fn segment(frame: &TimeSeriesFrame, min_days: f64, max_days: f64) -> Result<Vec<TimeSeriesFrame>> {
    if !(min_days > 0.0 && min_days < max_days) {
        return Err(Error::Config(format!(
            "segment bounds must satisfy 0 < min_days < max_days, got {min_days} and {max_days}"
        )));
    }
    let duration_days = frame.duration_seconds() as f64 / SECONDS_PER_DAY;
    if duration_days <= max_days {
        return Ok(vec![frame.clone()]);
    }
    let n = frame.len();
    let k = ((duration_days / max_days).ceil() as usize).min(n);
    let (base, extra) = (n / k, n % k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        out.push(frame.slice(start, start + len));
        start += len;
    }
    Ok(out)
}

/// Train/validation/test partition of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<TimeSeriesFrame>,
    pub validation: Vec<TimeSeriesFrame>,
    pub test: Vec<TimeSeriesFrame>,
    pub seed: u64,
}

/// Split sizes for `n` items by cumulative rounding of the fractions. A split
/// with a positive fraction that rounds to zero borrows one item from the
/// largest split.
pub fn split_counts(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let c1 = (fractions[0] * n as f64).round() as usize;
    let c2 = (((fractions[0] + fractions[1]) * n as f64).round() as usize).max(c1);
    let mut counts = [c1.min(n), c2.min(n) - c1.min(n), n - c2.min(n)];
    for i in 0..3 {
        if counts[i] == 0 && fractions[i] > 0.0 {
            let donor = (0..3).max_by_key(|&j| (counts[j], std::cmp::Reverse(j))).unwrap_or(0);
            if counts[donor] > 1 {
                counts[donor] -= 1;
                counts[i] += 1;
            }
        }
    }
    counts
}

/// Seeded shuffle followed by assignment in cumulative-fraction order.
pub fn split_datasets(frames: &[TimeSeriesFrame], fractions: [f64; 3], seed: u64) -> Result<DatasetSplit> {
    if frames.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 segments to split, got {}",
            frames.len()
        )));
    }
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions {fractions:?} must be in [0,1] and sum to 1"
        )));
    }
    let mut order: Vec<usize> = (0..frames.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let [n_train, n_val, _] = split_counts(frames.len(), fractions);
    let pick = |idx: &[usize]| idx.iter().map(|&i| frames[i].clone()).collect::<Vec<_>>();
    Ok(DatasetSplit {
        train: pick(&order[..n_train]),
        validation: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
        seed,
    })
}
