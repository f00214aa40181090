//! Min-max scaling to the unit interval.

use serde::{Deserialize, Serialize};

use super::TimeSeriesFrame;
use crate::error::{Error, Result};

/// Observed range of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Per-variable ranges in canonical variable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ranges: Vec<VarRange>,
}

impl NormalizationParams {
    pub fn get(&self, name: &str) -> Option<&VarRange> {
        self.ranges.iter().find(|r| r.name == name)
    }

    fn check_frame(&self, frame: &TimeSeriesFrame) -> Result<()> {
        let names: Vec<&str> = frame.variables().map(|(n, _, _)| n).collect();
        if names.len() != self.ranges.len() || names.iter().zip(&self.ranges).any(|(n, r)| *n != r.name) {
            return Err(Error::Shape(format!(
                "frame variables {names:?} do not match normalization parameters"
            )));
        }
        for r in &self.ranges {
            if !(r.max > r.min) {
                return Err(Error::DegenerateRange(r.name.clone()));
            }
        }
        Ok(())
    }
}

/// Per-variable minimum and maximum over all training frames (missing values ignored).
pub fn fit_normalization(train: &[TimeSeriesFrame]) -> Result<NormalizationParams> {
    let first = train
        .first()
        .ok_or_else(|| Error::Config("cannot fit normalization on zero frames".into()))?;
    let mut ranges: Vec<VarRange> = first
        .variables()
        .map(|(name, _, _)| VarRange {
            name: name.to_string(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        })
        .collect();
    for frame in train {
        if frame.variable_count() != ranges.len() {
            return Err(Error::Shape("training frames have different variables".into()));
        }
        for (range, (name, _, values)) in ranges.iter_mut().zip(frame.variables()) {
            if name != range.name {
                return Err(Error::Shape(format!(
                    "variable `{name}` where `{}` was expected",
                    range.name
                )));
            }
            for &v in values.iter().filter(|v| !v.is_nan()) {
                range.min = range.min.min(v);
                range.max = range.max.max(v);
            }
        }
    }
    for r in &ranges {
        if !(r.max > r.min) {
            return Err(Error::DegenerateRange(r.name.clone()));
        }
    }
    Ok(NormalizationParams { ranges })
}

/// Maps every value to `(v - min) / (max - min)`, clamping to `[0, 1]`.
/// Returns the scaled frame and the number of clamped values.
pub fn apply_normalization(frame: &TimeSeriesFrame, params: &NormalizationParams) -> Result<(TimeSeriesFrame, usize)> {
    params.check_frame(frame)?;
    let mut clamped = 0;
    let mut ranges = params.ranges.iter();
    let scaled = frame.map_variables(|_, _, var| {
        let r = ranges.next().ok_or_else(|| Error::Shape("missing range".into()))?;
        let span = r.max - r.min;
        Ok(var
            .values
            .iter()
            .map(|&v| {
                let s = (v - r.min) / span;
                if !(0.0..=1.0).contains(&s) {
                    clamped += 1;
                }
                s.clamp(0.0, 1.0)
            })
            .collect())
    })?;
    Ok((scaled, clamped))
}

/// Maps scaled values back to original units.
pub fn invert_normalization(frame: &TimeSeriesFrame, params: &NormalizationParams) -> Result<TimeSeriesFrame> {
    params.check_frame(frame)?;
    let mut ranges = params.ranges.iter();
    frame.map_variables(|_, _, var| {
        let r = ranges.next().ok_or_else(|| Error::Shape("missing range".into()))?;
        Ok(var.values.iter().map(|&s| r.min + s * (r.max - r.min)).collect())
    })
}
