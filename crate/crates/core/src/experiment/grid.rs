//! The compression-by-forecaster grid.
//!
//! Every cell compresses the training and validation segments with one
//! wavelet and rate, fits each model on the reconstructions and evaluates on
//! the untouched test segments. Baseline cells fit on uncompressed data.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::compression::{compress, decompress};
use crate::data::{DatasetSplit, TimeSeriesFrame};
use crate::error::{Error, Result};
use crate::forecasting::{
    build_design, evaluate, fit_gbt, fit_ols, DesignMatrix, ForecastResult, GbtParams, LagSpec, Model, ModelKind,
    PastFill,
};
use crate::infometrics::{ksg_mi_jittered, mix_seed, rate_seed};
use crate::wavelet::Wavelet;

/// Rates swept by default.
pub const DEFAULT_RATES: [f64; 7] = [0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub wavelets: Vec<Wavelet>,
    pub rates: Vec<f64>,
    pub models: Vec<ModelKind>,
    pub seed: u64,
    pub lag_spec: LagSpec,
    /// Origin stride for training (and validation) rows.
    pub train_stride: usize,
    /// Additional row subsampling applied to the boosted-tree training design.
    pub gbt_row_stride: usize,
    /// Origin stride for test windows.
    pub eval_stride: usize,
    pub gbt: GbtParams,
    pub ridge: f64,
    pub past_fill: PastFill,
    /// Use the validation split for early stopping of the boosted trees.
    pub early_stop: bool,
    /// Neighbour count for the NMI estimates.
    pub k: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            wavelets: Wavelet::ALL.to_vec(),
            rates: DEFAULT_RATES.to_vec(),
            models: vec![ModelKind::Ols, ModelKind::Gbt],
            seed: crate::DEFAULT_SEED,
            lag_spec: LagSpec::default(),
            train_stride: 1,
            gbt_row_stride: 1,
            eval_stride: 60,
            gbt: GbtParams::default(),
            ridge: 0.0,
            past_fill: PastFill::Persistence,
            early_stop: false,
            k: 10,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        self.lag_spec.validate()?;
        if self.rates.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::InvalidRate(
                self.rates
                    .iter()
                    .copied()
                    .find(|r| !(0.0..1.0).contains(r))
                    .unwrap_or(f64::NAN),
            ));
        }
        if self.rates.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("rates must be strictly ascending".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        if self.train_stride == 0 || self.gbt_row_stride == 0 || self.eval_stride == 0 {
            return Err(Error::Config("strides must be positive".into()));
        }
        if self.early_stop && self.gbt.early_stopping_rounds.is_none() {
            return Err(Error::Config("early stopping needs gbt.early_stopping_rounds".into()));
        }
        Ok(())
    }

    /// Number of records a run produces.
    pub fn record_count(&self) -> usize {
        self.models.len() * (1 + self.wavelets.len() * self.rates.len())
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    /// `None` for the uncompressed baseline.
    pub wavelet: Option<Wavelet>,
    pub rate: f64,
    pub model: ModelKind,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub segment_rmse: Vec<f64>,
    /// Mean over training segments of the per-segment target NMI.
    pub nmi: Option<f64>,
    /// Target NMI with all training segments pooled.
    pub nmi_pooled: Option<f64>,
    /// Mean achieved compression rate over training-target signals.
    pub achieved_rate: Option<f64>,
    pub error: Option<String>,
}

impl EvaluationRecord {
    /// Sort key: baseline first, then wavelet, rate and model.
    pub fn key(&self) -> (u8, u8, u64, ModelKind) {
        (
            u8::from(self.wavelet.is_some()),
            self.wavelet.map_or(0, |w| w.id()),
            self.rate.to_bits(),
            self.model,
        )
    }

    fn failed(wavelet: Option<Wavelet>, rate: f64, model: ModelKind, err: &Error) -> Self {
        EvaluationRecord {
            wavelet,
            rate,
            model,
            mae: None,
            rmse: None,
            segment_rmse: Vec::new(),
            nmi: None,
            nmi_pooled: None,
            achieved_rate: None,
            error: Some(err.to_string()),
        }
    }
}

/// Compression applied to the training side of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub wavelet: Option<Wavelet>,
    pub rate: f64,
}

impl Cell {
    pub fn all(config: &GridConfig) -> Vec<Cell> {
        let mut cells = vec![Cell {
            wavelet: None,
            rate: 0.0,
        }];
        for &w in &config.wavelets {
            for &r in &config.rates {
                cells.push(Cell {
                    wavelet: Some(w),
                    rate: r,
                });
            }
        }
        cells
    }
}

struct Compressed {
    frames: Vec<TimeSeriesFrame>,
    achieved: Vec<f64>,
}

/// Reconstructs every frame after compression. Only training and validation
/// frames ever reach this function.
fn compress_frames(frames: &[TimeSeriesFrame], wavelet: Wavelet, rate: f64) -> Result<Compressed> {
    let mut achieved = Vec::new();
    let frames = frames
        .iter()
        .map(|f| {
            f.map_variables(|role, _, v| {
                let cs = compress(&v.values, wavelet, rate)?;
                if role == crate::data::Role::Target {
                    achieved.push(cs.achieved_rate());
                }
                decompress(&cs)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Compressed { frames, achieved })
}

/// `(mean per-segment NMI, pooled NMI)` of the target under compression.
pub fn target_nmi(train: &[TimeSeriesFrame], wavelet: Wavelet, rate: f64, k: usize, seed: u64) -> Result<(f64, f64)> {
    if rate == 0.0 {
        return Ok((1.0, 1.0));
    }
    let mut per_segment = Vec::new();
    let (mut orig_all, mut base_all, mut comp_all) = (Vec::new(), Vec::new(), Vec::new());
    for (s, frame) in train.iter().enumerate() {
        let y = &frame.target.values;
        let base = decompress(&compress(y, wavelet, 0.0)?)?;
        let comp = decompress(&compress(y, wavelet, rate)?)?;
        let seg_seed = mix_seed(seed, s as u64);
        let norm = ksg_mi_jittered(&base, y, k, rate_seed(seg_seed, 0.0))?.value;
        let mi = ksg_mi_jittered(&comp, y, k, rate_seed(seg_seed, rate))?.value;
        if norm > 0.0 {
            per_segment.push((mi / norm).clamp(0.0, 1.0));
        }
        orig_all.extend_from_slice(y);
        base_all.extend(base);
        comp_all.extend(comp);
    }
    if per_segment.is_empty() {
        return Err(Error::Data("no training segment carries measurable information".into()));
    }
    let pooled_seed = mix_seed(seed, u64::MAX);
    let norm = ksg_mi_jittered(&base_all, &orig_all, k, rate_seed(pooled_seed, 0.0))?.value;
    let mi = ksg_mi_jittered(&comp_all, &orig_all, k, rate_seed(pooled_seed, rate))?.value;
    let pooled = if norm > 0.0 { (mi / norm).clamp(0.0, 1.0) } else { 0.0 };
    Ok((per_segment.iter().sum::<f64>() / per_segment.len() as f64, pooled))
}

fn subsample(design: &DesignMatrix, stride: usize) -> DesignMatrix {
    if stride <= 1 {
        return design.clone();
    }
    let rows: Vec<usize> = (0..design.n_rows).step_by(stride).collect();
    DesignMatrix {
        n_rows: rows.len(),
        width: design.width,
        horizon: design.horizon,
        features: rows.iter().flat_map(|&i| design.row(i).iter().copied()).collect(),
        targets: rows
            .iter()
            .flat_map(|&i| design.target_row(i).iter().copied())
            .collect(),
        row_origins: rows.iter().map(|&i| design.row_origins[i]).collect(),
    }
}

/// Fits one model family on prepared designs.
pub fn fit_model(
    kind: ModelKind,
    config: &GridConfig,
    train: &DesignMatrix,
    validation: Option<&DesignMatrix>,
) -> Result<Model> {
    match kind {
        ModelKind::Ols => Ok(Model::Linear(fit_ols(train, config.ridge)?)),
        ModelKind::Gbt => {
            let rows = subsample(train, config.gbt_row_stride);
            let val = if config.early_stop { validation } else { None };
            Ok(Model::Gbt(fit_gbt(&rows, &config.gbt, val)?))
        }
    }
}

fn run_cell(config: &GridConfig, split: &DatasetSplit, cell: Cell) -> Vec<EvaluationRecord> {
    let fail_all = |e: &Error| {
        warn!("cell {:?} at rate {} failed: {e}", cell.wavelet, cell.rate);
        config
            .models
            .iter()
            .map(|&m| EvaluationRecord::failed(cell.wavelet, cell.rate, m, e))
            .collect::<Vec<_>>()
    };
    let prepared = (|| -> Result<_> {
        let (train, validation, achieved, nmi) = match cell.wavelet {
            None => (
                split.train.clone(),
                split.validation.clone(),
                None,
                (Some(1.0), Some(1.0)),
            ),
            Some(w) => {
                let t = compress_frames(&split.train, w, cell.rate)?;
                let v = compress_frames(&split.validation, w, cell.rate)?;
                let achieved = t.achieved.iter().sum::<f64>() / t.achieved.len().max(1) as f64;
                let nmi = match target_nmi(&split.train, w, cell.rate, config.k, config.seed) {
                    Ok((a, b)) => (Some(a), Some(b)),
                    Err(e) => {
                        warn!("NMI for {w} at {} failed: {e}", cell.rate);
                        (None, None)
                    }
                };
                (t.frames, v.frames, Some(achieved), nmi)
            }
        };
        let train_design = build_design(&train, &config.lag_spec, config.train_stride)?;
        let val_design = if config.early_stop && !validation.is_empty() {
            Some(build_design(&validation, &config.lag_spec, config.train_stride)?)
        } else {
            None
        };
        Ok((train_design, val_design, achieved, nmi))
    })();
    let (train_design, val_design, achieved, (nmi, nmi_pooled)) = match prepared {
        Ok(p) => p,
        Err(e) => return fail_all(&e),
    };
    config
        .models
        .iter()
        .map(|&kind| {
            let outcome = fit_model(kind, config, &train_design, val_design.as_ref()).and_then(|model| {
                // Actuals always come from the uncompressed test split.
                evaluate(
                    &model,
                    &split.test,
                    &config.lag_spec,
                    config.eval_stride,
                    config.past_fill,
                )
            });
            match outcome {
                Ok(ForecastResult {
                    segments, rmse, mae, ..
                }) => EvaluationRecord {
                    wavelet: cell.wavelet,
                    rate: cell.rate,
                    model: kind,
                    mae: Some(mae),
                    rmse: Some(rmse),
                    segment_rmse: segments.iter().map(|s| s.rmse).collect(),
                    nmi,
                    nmi_pooled,
                    achieved_rate: achieved,
                    error: None,
                },
                Err(e) => {
                    warn!("{kind} for {:?} at rate {} failed: {e}", cell.wavelet, cell.rate);
                    EvaluationRecord {
                        nmi,
                        nmi_pooled,
                        achieved_rate: achieved,
                        ..EvaluationRecord::failed(cell.wavelet, cell.rate, kind, &e)
                    }
                }
            }
        })
        .collect()
}

/// Runs every cell on a pool of `jobs` workers. Records come back sorted by
/// [`EvaluationRecord::key`]; `on_record` sees them in completion order.
pub fn run_grid_with<F>(
    config: &GridConfig,
    split: &DatasetSplit,
    jobs: usize,
    on_record: F,
) -> Result<Vec<EvaluationRecord>>
where
    F: Fn(&EvaluationRecord) + Sync,
{
    config.validate()?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::Config("grid needs training and test segments".into()));
    }
    let cells = Cell::all(config);
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(config.record_count()));
    let workers = jobs.clamp(1, cells.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&cell) = cells.get(i) else { break };
                info!("cell {}/{}: {:?} rate {}", i + 1, cells.len(), cell.wavelet, cell.rate);
                let records = run_cell(config, split, cell);
                let mut guard = results.lock().unwrap_or_else(|p| p.into_inner());
                for r in &records {
                    on_record(r);
                }
                guard.extend(records);
            });
        }
    });
    let mut records = results.into_inner().unwrap_or_else(|p| p.into_inner());
    records.sort_by_key(|a| a.key());
    Ok(records)
}

/// [`run_grid_with`] on a single worker without a progress callback.
pub fn run_grid(config: &GridConfig, split: &DatasetSplit) -> Result<Vec<EvaluationRecord>> {
    run_grid_with(config, split, 1, |_| {})
}
