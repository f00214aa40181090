//! Autoregressive rollout and windowed evaluation.

use serde::{Deserialize, Serialize};

use super::lags::{frame_series, LagSpec};
use super::Forecaster;
use crate::data::TimeSeriesFrame;
use crate::error::{Error, Result};

/// How past-covariate lags beyond the forecast origin are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PastFill {
    /// Repeat the last value observed before the origin.
    #[default]
    Persistence,
    /// Use the true values (hindsight; for sensitivity checks only).
    Oracle,
}

/// Forecast of `rollout_horizon` steps from one origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub origin: i64,
    pub predictions: Vec<f64>,
    pub actuals: Vec<f64>,
    pub rmse: f64,
    pub mae: f64,
}

/// Root mean squared and mean absolute error.
pub fn rmse_mae(predictions: &[f64], actuals: &[f64]) -> (f64, f64) {
    let n = predictions.len().max(1) as f64;
    let (sq, abs) = predictions
        .iter()
        .zip(actuals)
        .fold((0.0, 0.0), |(s, a), (p, y)| (s + (p - y) * (p - y), a + (p - y).abs()));
    ((sq / n).sqrt(), abs / n)
}

/// Rolls a model forward from sample index `origin` (the first predicted
/// sample). Each chunk of `H` predictions is fed back as target lags for the
/// next chunk; future covariates use their true values throughout.
pub fn rollout<M: Forecaster + ?Sized>(
    model: &M,
    frame: &TimeSeriesFrame,
    origin: usize,
    spec: &LagSpec,
    fill: PastFill,
) -> Result<Window> {
    spec.validate()?;
    let (p, h, total) = (spec.input_window, spec.horizon, spec.rollout_horizon);
    if origin < p {
        return Err(Error::Contract(format!(
            "origin {origin} leaves fewer than {p} samples of history"
        )));
    }
    if origin + total > frame.len() {
        return Err(Error::Contract(format!(
            "future covariates end at sample {} but the rollout needs {}",
            frame.len(),
            origin + total
        )));
    }
    let start = origin - p;
    let end = origin + total;
    let mut target: Vec<f64> = frame.target.values[start..end].to_vec();
    target[p..].iter_mut().for_each(|v| *v = f64::NAN);
    let past: Vec<Vec<f64>> = frame
        .past_covariates
        .iter()
        .map(|v| {
            let mut s = v.values[start..end].to_vec();
            if fill == PastFill::Persistence {
                let last = s[p - 1];
                s[p..].iter_mut().for_each(|x| *x = last);
            }
            s
        })
        .collect();
    let (_, future_full) = frame_series(frame);
    let future: Vec<&[f64]> = future_full.iter().map(|s| &s[start..end]).collect();
    let past_refs: Vec<&[f64]> = past.iter().map(Vec::as_slice).collect();

    let mut buf = Vec::new();
    for chunk in 0..total / h {
        let t = p + chunk * h;
        spec.write_features(&target, &past_refs, &future, t, &mut buf);
        let pred = model.predict(&buf)?;
        if pred.len() != h {
            return Err(Error::Shape(format!(
                "model predicts {} steps, spec needs {h}",
                pred.len()
            )));
        }
        target[t..t + h].copy_from_slice(&pred);
    }
    let predictions = target[p..].to_vec();
    let actuals = frame.target.values[origin..end].to_vec();
    let (rmse, mae) = rmse_mae(&predictions, &actuals);
    Ok(Window {
        origin: frame.timestamps[origin],
        predictions,
        actuals,
        rmse,
        mae,
    })
}

/// Metrics of one test segment over all its windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub segment: usize,
    pub windows: usize,
    pub rmse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub windows: Vec<Window>,
    pub segments: Vec<SegmentMetrics>,
    /// Mean of the per-segment RMSE values.
    pub rmse: f64,
    /// Mean of the per-segment MAE values.
    pub mae: f64,
}

/// Evaluates rollouts from origins `P, P + stride, ...` in every test frame.
/// Segment metrics pool all window errors of the segment; overall metrics
/// average the segments.
pub fn evaluate<M: Forecaster + ?Sized>(
    model: &M,
    test: &[TimeSeriesFrame],
    spec: &LagSpec,
    stride: usize,
    fill: PastFill,
) -> Result<ForecastResult> {
    if stride == 0 {
        return Err(Error::Config("evaluation stride must be positive".into()));
    }
    let mut windows = Vec::new();
    let mut segments = Vec::new();
    for (s, frame) in test.iter().enumerate() {
        let mut origin = spec.input_window;
        let (mut sq, mut abs, mut count, mut n_windows) = (0.0, 0.0, 0usize, 0usize);
        while origin + spec.rollout_horizon <= frame.len() {
            let w = rollout(model, frame, origin, spec, fill)?;
            for (p, y) in w.predictions.iter().zip(&w.actuals) {
                sq += (p - y) * (p - y);
                abs += (p - y).abs();
            }
            count += w.predictions.len();
            n_windows += 1;
            windows.push(w);
            origin += stride;
        }
        if n_windows > 0 {
            segments.push(SegmentMetrics {
                segment: s,
                windows: n_windows,
                rmse: (sq / count as f64).sqrt(),
                mae: abs / count as f64,
            });
        }
    }
    if segments.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let k = segments.len() as f64;
    let rmse = segments.iter().map(|s| s.rmse).sum::<f64>() / k;
    let mae = segments.iter().map(|s| s.mae).sum::<f64>() / k;
    Ok(ForecastResult {
        windows,
        segments,
        rmse,
        mae,
    })
}
