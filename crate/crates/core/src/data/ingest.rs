//! CSV ingestion and export.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{prepare::split_missing_runs, TimeSeriesFrame, Variable};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

/// Holes at least this long (in minutes) split a series into separate frames.
pub const DEFAULT_MAX_GAP_MINUTES: i64 = 60;

/// Maps CSV columns to forecasting roles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub timestamp: String,
    pub target: String,
    pub past: Vec<String>,
    pub future: Vec<String>,
}

impl Schema {
    /// Parses `role=column` pairs. Roles: `timestamp`, `target`, `past`, `future`.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Schema> {
        let mut timestamp = None;
        let mut target = None;
        let mut past = Vec::new();
        let mut future = Vec::new();
        for pair in pairs {
            let pair = pair.as_ref();
            let (role, column) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("schema entry `{pair}` is not role=column")))?;
            let column = column.trim().to_string();
            if column.is_empty() {
                return Err(Error::Config(format!("schema entry `{pair}` has no column")));
            }
            match role.trim() {
                "timestamp" => timestamp = Some(column),
                "target" => {
                    if target.replace(column).is_some() {
                        return Err(Error::Config("schema names more than one target".into()));
                    }
                }
                "past" => past.push(column),
                "future" => future.push(column),
                other => return Err(Error::Config(format!("unknown schema role `{other}`"))),
            }
        }
        Ok(Schema {
            timestamp: timestamp.unwrap_or_else(|| "timestamp".into()),
            target: target.ok_or_else(|| Error::Config("schema has no target column".into()))?,
            past,
            future,
        })
    }

    /// Column names used by the synthetic generator.
    pub fn synthetic() -> Schema {
        Schema {
            timestamp: "timestamp".into(),
            target: "intake_level".into(),
            past: vec!["sea_level".into(), "temperature".into()],
            future: vec!["pump_effect".into()],
        }
    }

    fn columns(&self) -> impl Iterator<Item = &String> {
        std::iter::once(&self.target).chain(&self.past).chain(&self.future)
    }
}

/// Reads a CSV file into frames, splitting at holes of
/// [`DEFAULT_MAX_GAP_MINUTES`] or more. Shorter holes stay in the frame as
/// missing rows for [`interpolate_gaps`](super::interpolate_gaps).
pub fn ingest_csv(path: &Path, schema: &Schema) -> Result<Vec<TimeSeriesFrame>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, DEFAULT_MAX_GAP_MINUTES)
}

fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(secs) = raw.parse::<f64>() {
        return secs.is_finite().then(|| secs.round() as i64);
    }
    DateTime::parse_from_rfc3339(raw).ok().map(|t| t.timestamp())
}

fn parse_value(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    if raw.is_empty() || raw.eq_ignore_ascii_case("nan") || raw.eq_ignore_ascii_case("na") {
        return Some(f64::NAN);
    }
    raw.parse::<f64>().ok()
}

/// Most frequent positive difference between consecutive timestamps; ties go
/// to the smaller step.
fn nominal_step(times: &[i64]) -> i64 {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for w in times.windows(2) {
        *counts.entry(w[1] - w[0]).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(step, _)| step)
        .unwrap_or(60)
}

/// Reads CSV data from any reader; see [`ingest_csv`].
pub fn read_csv<R: Read>(reader: R, schema: &Schema, max_gap_minutes: i64) -> Result<Vec<TimeSeriesFrame>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("column `{name}` not found in header")))
    };
    let ts_col = find(&schema.timestamp)?;
    let value_cols: Vec<usize> = schema.columns().map(|c| find(c)).collect::<Result<_>>()?;

    let mut times: Vec<i64> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse {
                line,
                msg: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");
        let t = parse_timestamp(field(ts_col)).ok_or_else(|| Error::Parse {
            line,
            msg: format!("bad timestamp `{}`", field(ts_col)),
        })?;
        if times.last().is_some_and(|&prev| t <= prev) {
            return Err(Error::Ordering { line });
        }
        let values = value_cols
            .iter()
            .map(|&c| {
                parse_value(field(c)).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("bad number `{}` in column `{}`", field(c), &headers[c]),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        times.push(t);
        rows.push(values);
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }

    let step = nominal_step(&times);
    let max_gap_seconds = max_gap_minutes * 60;
    let mut frames = Vec::new();
    let mut chunk_start = 0;
    for i in 1..=times.len() {
        let split = if i == times.len() {
            true
        } else {
            let diff = times[i] - times[i - 1];
            if diff % step != 0 {
                return Err(Error::Data(format!(
                    "timestamp {} is off the {step} s sampling grid",
                    times[i]
                )));
            }
            (diff / step - 1) * step >= max_gap_seconds
        };
        if split {
            let grid = build_grid(&times[chunk_start..i], &rows[chunk_start..i], step, schema);
            frames.extend(split_missing_runs(&grid, max_gap_minutes));
            chunk_start = i;
        }
    }
    Ok(frames)
}

/// Lays rows onto the regular grid; absent rows and partially observed rows
/// become all-missing rows.
fn build_grid(times: &[i64], rows: &[Vec<f64>], step: i64, schema: &Schema) -> TimeSeriesFrame {
    let n = ((times[times.len() - 1] - times[0]) / step + 1) as usize;
    let width = rows[0].len();
    let mut columns = vec![vec![f64::NAN; n]; width];
    for (t, row) in times.iter().zip(rows) {
        if row.iter().any(|v| v.is_nan()) {
            continue;
        }
        let idx = ((t - times[0]) / step) as usize;
        for (c, v) in row.iter().enumerate() {
            columns[c][idx] = *v;
        }
    }
    let mut columns = columns.into_iter();
    let mut take = |name: &String| Variable::new(name.clone(), columns.next().unwrap_or_default());
    TimeSeriesFrame {
        timestamps: (0..n as i64).map(|k| times[0] + k * step).collect(),
        step_seconds: step,
        target: take(&schema.target),
        past_covariates: schema.past.iter().map(&mut take).collect(),
        future_covariates: schema.future.iter().map(&mut take).collect(),
    }
}

/// Writes a frame as CSV with RFC 3339 timestamps. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv(frame: &TimeSeriesFrame, path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["timestamp".to_string()];
    header.extend(frame.variables().map(|(name, _, _)| name.to_string()));
    wtr.write_record(&header)?;
    for (row, &t) in frame.timestamps.iter().enumerate() {
        let stamp = DateTime::<Utc>::from_timestamp(t, 0)
            .map(|d| d.to_rfc3339_opts(SecondsFormat::Secs, true))
            .unwrap_or_else(|| t.to_string());
        let mut record = vec![stamp];
        record.extend(frame.variables().map(|(_, _, v)| {
            if v[row].is_nan() {
                String::new()
            } else {
                format!("{}", v[row])
            }
        }));
        wtr.write_record(&record)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    write_atomic(path, &bytes)
}
