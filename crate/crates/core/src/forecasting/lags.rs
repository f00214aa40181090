//! Lag specification and design-matrix construction.
//!
//! The origin `t` of a row is the index of the first predicted sample. Target
//! and past-covariate lag `l` reads index `t - l`; future-covariate lead `h`
//! reads index `t + h`; targets are `y[t..t + H]`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::TimeSeriesFrame;
use crate::error::{Error, Result};

/// Which lags and leads become features, and how far to forecast.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagSpec {
    /// Context length `P` in samples.
    pub input_window: usize,
    /// Direct forecast chunk `H` in samples.
    pub horizon: usize,
    /// Total autoregressive forecast length; a positive multiple of `H`.
    pub rollout_horizon: usize,
    pub target_lags: Vec<usize>,
    pub past_cov_lags: Vec<usize>,
    pub future_cov_leads: Vec<usize>,
}

impl Default for LagSpec {
    /// Six hours of context, one-hour chunks and a six-hour rollout at one-minute sampling.
    fn default() -> Self {
        LagSpec::new(360, 60, 360)
    }
}

impl LagSpec {
    /// Full lag set `1..=P` for target and past covariates, leads `0..H`.
    pub fn new(input_window: usize, horizon: usize, rollout_horizon: usize) -> LagSpec {
        LagSpec {
            input_window,
            horizon,
            rollout_horizon,
            target_lags: (1..=input_window).collect(),
            past_cov_lags: (1..=input_window).collect(),
            future_cov_leads: (0..horizon).collect(),
        }
    }

    /// Keeps every `every`-th lag (always including lag 1); leads are untouched.
    pub fn thinned(mut self, every: usize) -> LagSpec {
        if every > 1 {
            let keep = |l: &usize| (l - 1).is_multiple_of(every);
            self.target_lags.retain(keep);
            self.past_cov_lags.retain(keep);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_window == 0 || self.horizon == 0 {
            return Err(Error::Config("input window and horizon must be positive".into()));
        }
        if self.rollout_horizon == 0 || !self.rollout_horizon.is_multiple_of(self.horizon) {
            return Err(Error::Config(format!(
                "rollout horizon {} is not a positive multiple of the horizon {}",
                self.rollout_horizon, self.horizon
            )));
        }
        let lag_ok = |l: &usize| (1..=self.input_window).contains(l);
        if !self.target_lags.iter().all(lag_ok) || !self.past_cov_lags.iter().all(lag_ok) {
            return Err(Error::Config(format!("lags must lie in 1..={}", self.input_window)));
        }
        if self.future_cov_leads.iter().any(|&h| h >= self.horizon) {
            return Err(Error::Config(format!(
                "leads must be below the horizon {}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Feature count for the given numbers of past and future covariates.
    pub fn width(&self, n_past: usize, n_future: usize) -> usize {
        self.target_lags.len() + n_past * self.past_cov_lags.len() + n_future * self.future_cov_leads.len()
    }

    /// Number of valid origins in a frame of `n` samples at `stride`.
    pub fn origin_count(&self, n: usize, stride: usize) -> usize {
        let span = self.input_window + self.horizon;
        if n < span || stride == 0 {
            0
        } else {
            (n - span) / stride + 1
        }
    }

    /// Writes the feature row for origin `t`. Callers guarantee the indices are in range.
    pub(crate) fn write_features(
        &self,
        target: &[f64],
        past: &[&[f64]],
        future: &[&[f64]],
        t: usize,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        out.extend(self.target_lags.iter().map(|&l| target[t - l]));
        for series in past {
            out.extend(self.past_cov_lags.iter().map(|&l| series[t - l]));
        }
        for series in future {
            out.extend(self.future_cov_leads.iter().map(|&h| series[t + h]));
        }
    }
}

/// Feature rows and multi-step targets, both row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub n_rows: usize,
    pub width: usize,
    pub horizon: usize,
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
    /// Timestamp of the first predicted sample of each row.
    pub row_origins: Vec<i64>,
}

impl DesignMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    pub fn target_row(&self, i: usize) -> &[f64] {
        &self.targets[i * self.horizon..(i + 1) * self.horizon]
    }

    /// Target column `h` as a vector.
    pub fn target_column(&self, h: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.targets[i * self.horizon + h]).collect()
    }
}

pub(crate) fn frame_series(frame: &TimeSeriesFrame) -> (Vec<&[f64]>, Vec<&[f64]>) {
    (
        frame.past_covariates.iter().map(|v| v.values.as_slice()).collect(),
        frame.future_covariates.iter().map(|v| v.values.as_slice()).collect(),
    )
}

/// One row per origin at `stride`; rows never cross frame boundaries. Frames
/// shorter than `P + H` are skipped with a warning.
pub fn build_design(frames: &[TimeSeriesFrame], spec: &LagSpec, stride: usize) -> Result<DesignMatrix> {
    spec.validate()?;
    if stride == 0 {
        return Err(Error::Config("stride must be positive".into()));
    }
    let first = frames
        .first()
        .ok_or_else(|| Error::Config("no frames to build a design matrix from".into()))?;
    let (n_past, n_future) = (first.past_covariates.len(), first.future_covariates.len());
    let width = spec.width(n_past, n_future);
    let h = spec.horizon;
    let rows: usize = frames.iter().map(|f| spec.origin_count(f.len(), stride)).sum();
    let mut design = DesignMatrix {
        n_rows: 0,
        width,
        horizon: h,
        features: Vec::with_capacity(rows * width),
        targets: Vec::with_capacity(rows * h),
        row_origins: Vec::with_capacity(rows),
    };
    let mut buf = Vec::with_capacity(width);
    for frame in frames {
        if frame.past_covariates.len() != n_past || frame.future_covariates.len() != n_future {
            return Err(Error::Shape("frames have different covariate sets".into()));
        }
        if frame.len() < spec.input_window + h {
            warn!(
                "skipping frame of {} samples; at least {} are needed",
                frame.len(),
                spec.input_window + h
            );
            continue;
        }
        let y = &frame.target.values;
        let (past, future) = frame_series(frame);
        let mut t = spec.input_window;
        while t + h <= frame.len() {
            spec.write_features(y, &past, &future, t, &mut buf);
            design.features.extend_from_slice(&buf);
            design.targets.extend_from_slice(&y[t..t + h]);
            design.row_origins.push(frame.timestamps[t]);
            design.n_rows += 1;
            t += stride;
        }
    }
    Ok(design)
}
