//! Result files of a grid run.
//!
//! | file | contents |
//! |------|----------|
//! | `records.csv` | one row per record, per-segment RMSE joined by `;` |
//! | `table.csv` | wavelet, rate, then MAE and RMSE per model |
//! | `report.json` | `{config, records, nmi, beta_fits, elbows}` |
//! | `rmse_by_rate.csv` | long format: wavelet, model, rate, mae, rmse |
//! | `rmse_by_nmi.csv` | long format: wavelet, model, rate, nmi, rmse |
//! | `segment_rmse.csv` | wavelet, rate, model, segment, rmse |
//! | `nmi.csv` | wavelet, rate, nmi, nmi_pooled |
//! | `beta_fits.csv` | wavelet, alpha, beta, sse, converged |
//! | `elbows.csv` | wavelet, model, recommended_rate, flat |

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{EvaluationRecord, GridConfig};
use crate::analysis::{elbow, fit_beta_curve, BetaFit, ElbowResult};
use crate::error::Result;
use crate::forecasting::ModelKind;
use crate::fsutil::write_atomic;
use crate::infometrics::NmiPoint;
use crate::wavelet::Wavelet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmiSeries {
    pub wavelet: Wavelet,
    pub points: Vec<NmiPoint>,
    pub pooled: Vec<NmiPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletFit {
    pub wavelet: Wavelet,
    pub fit: Option<BetaFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowEntry {
    pub wavelet: Wavelet,
    pub model: ModelKind,
    pub result: Option<ElbowResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: GridConfig,
    pub records: Vec<EvaluationRecord>,
    pub nmi: Vec<NmiSeries>,
    pub beta_fits: Vec<WaveletFit>,
    pub elbows: Vec<ElbowEntry>,
}

fn wavelets_in(records: &[EvaluationRecord]) -> Vec<Wavelet> {
    let mut w: Vec<Wavelet> = records.iter().filter_map(|r| r.wavelet).collect();
    w.sort();
    w.dedup();
    w
}

impl Report {
    /// Derives NMI curves, beta fits and elbows from grid records.
    pub fn build(config: &GridConfig, records: Vec<EvaluationRecord>) -> Report {
        let mut nmi = Vec::new();
        let mut beta_fits = Vec::new();
        let mut elbows = Vec::new();
        for wavelet in wavelets_in(&records) {
            let mut points = vec![NmiPoint { rate: 0.0, nmi: 1.0 }];
            let mut pooled = points.clone();
            for r in records.iter().filter(|r| r.wavelet == Some(wavelet)) {
                if points.iter().any(|p| p.rate == r.rate) {
                    continue;
                }
                if let (Some(a), Some(b)) = (r.nmi, r.nmi_pooled) {
                    points.push(NmiPoint { rate: r.rate, nmi: a });
                    pooled.push(NmiPoint { rate: r.rate, nmi: b });
                }
            }
            points.sort_by(|a, b| a.rate.total_cmp(&b.rate));
            pooled.sort_by(|a, b| a.rate.total_cmp(&b.rate));
            let fit = fit_beta_curve(&points);
            beta_fits.push(WaveletFit {
                wavelet,
                error: fit.as_ref().err().map(|e| e.to_string()),
                fit: fit.ok(),
            });
            nmi.push(NmiSeries {
                wavelet,
                points,
                pooled,
            });

            for &model in &config.models {
                let mut curve: Vec<(f64, f64)> = records
                    .iter()
                    .filter(|r| r.wavelet == Some(wavelet) && r.model == model)
                    .filter_map(|r| Some((r.rate, r.rmse?)))
                    .collect();
                curve.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (rates, rmse): (Vec<f64>, Vec<f64>) = curve.into_iter().unzip();
                let result = elbow(&rates, &rmse);
                elbows.push(ElbowEntry {
                    wavelet,
                    model,
                    error: result.as_ref().err().map(|e| e.to_string()),
                    result: result.ok(),
                });
            }
        }
        Report {
            config: config.clone(),
            records,
            nmi,
            beta_fits,
            elbows,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn wavelet_name(w: Option<Wavelet>) -> &'static str {
    w.map_or("none", Wavelet::name)
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| crate::Error::Io {
        path: "<memory>".into(),
        source: std::io::Error::other(e.to_string()),
    })
}

/// One `records.csv` line; also used for the streaming `.partial` file.
pub fn record_row(r: &EvaluationRecord) -> Vec<String> {
    vec![
        wavelet_name(r.wavelet).to_string(),
        r.rate.to_string(),
        r.model.to_string(),
        opt(r.mae),
        opt(r.rmse),
        opt(r.nmi),
        opt(r.nmi_pooled),
        opt(r.achieved_rate),
        r.segment_rmse.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
        r.error.clone().unwrap_or_default(),
    ]
}

pub const RECORD_HEADER: [&str; 10] = [
    "wavelet",
    "rate",
    "model",
    "mae",
    "rmse",
    "nmi",
    "nmi_pooled",
    "achieved_rate",
    "segment_rmse",
    "error",
];

/// Writes every report file into `dir`, each atomically.
pub fn write_report(dir: &Path, report: &Report) -> Result<()> {
    let records = &report.records;
    write_atomic(
        &dir.join("records.csv"),
        &csv_bytes(&RECORD_HEADER, records.iter().map(record_row))?,
    )?;

    let models = &report.config.models;
    let mut header = vec!["Wavelet".to_string(), "r_lossy".to_string()];
    for m in models {
        header.push(format!("{m}_MAE"));
        header.push(format!("{m}_RMSE"));
    }
    let mut keys: Vec<(Option<Wavelet>, f64)> = records.iter().map(|r| (r.wavelet, r.rate)).collect();
    keys.dedup();
    let table_rows = keys.iter().map(|&(w, rate)| {
        let mut row = vec![wavelet_name(w).to_string(), rate.to_string()];
        for &m in models {
            let rec = records
                .iter()
                .find(|r| r.wavelet == w && r.rate == rate && r.model == m);
            row.push(opt(rec.and_then(|r| r.mae)));
            row.push(opt(rec.and_then(|r| r.rmse)));
        }
        row
    });
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_atomic(&dir.join("table.csv"), &csv_bytes(&header_refs, table_rows)?)?;

    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    write_atomic(&dir.join("report.json"), &json)?;

    write_atomic(
        &dir.join("rmse_by_rate.csv"),
        &csv_bytes(
            &["wavelet", "model", "rate", "mae", "rmse"],
            records.iter().map(|r| {
                vec![
                    wavelet_name(r.wavelet).to_string(),
                    r.model.to_string(),
                    r.rate.to_string(),
                    opt(r.mae),
                    opt(r.rmse),
                ]
            }),
        )?,
    )?;
    write_atomic(
        &dir.join("rmse_by_nmi.csv"),
        &csv_bytes(
            &["wavelet", "model", "rate", "nmi", "rmse"],
            records.iter().map(|r| {
                vec![
                    wavelet_name(r.wavelet).to_string(),
                    r.model.to_string(),
                    r.rate.to_string(),
                    opt(r.nmi),
                    opt(r.rmse),
                ]
            }),
        )?,
    )?;
    write_atomic(
        &dir.join("segment_rmse.csv"),
        &csv_bytes(
            &["wavelet", "rate", "model", "segment", "rmse"],
            records.iter().flat_map(|r| {
                r.segment_rmse.iter().enumerate().map(move |(s, v)| {
                    vec![
                        wavelet_name(r.wavelet).to_string(),
                        r.rate.to_string(),
                        r.model.to_string(),
                        s.to_string(),
                        v.to_string(),
                    ]
                })
            }),
        )?,
    )?;
    write_atomic(
        &dir.join("nmi.csv"),
        &csv_bytes(
            &["wavelet", "rate", "nmi", "nmi_pooled"],
            report.nmi.iter().flat_map(|s| {
                s.points.iter().zip(&s.pooled).map(move |(p, q)| {
                    vec![
                        s.wavelet.to_string(),
                        p.rate.to_string(),
                        p.nmi.to_string(),
                        q.nmi.to_string(),
                    ]
                })
            }),
        )?,
    )?;
    write_atomic(
        &dir.join("beta_fits.csv"),
        &csv_bytes(
            &["wavelet", "alpha", "beta", "sse", "converged"],
            report.beta_fits.iter().map(|f| {
                vec![
                    f.wavelet.to_string(),
                    opt(f.fit.as_ref().map(|x| x.alpha)),
                    opt(f.fit.as_ref().map(|x| x.beta)),
                    opt(f.fit.as_ref().map(|x| x.sse)),
                    f.fit.as_ref().map(|x| x.converged.to_string()).unwrap_or_default(),
                ]
            }),
        )?,
    )?;
    write_atomic(
        &dir.join("elbows.csv"),
        &csv_bytes(
            &["wavelet", "model", "recommended_rate", "flat"],
            report.elbows.iter().map(|e| {
                vec![
                    e.wavelet.to_string(),
                    e.model.to_string(),
                    opt(e.result.as_ref().map(|x| x.recommended_rate)),
                    e.result.as_ref().map(|x| x.flat.to_string()).unwrap_or_default(),
                ]
            }),
        )?,
    )?;
    Ok(())
}
