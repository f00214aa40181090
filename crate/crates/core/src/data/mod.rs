//! Time-series frames and the preparation pipeline: ingestion, gap repair,
//! segmentation, splitting and min-max normalization.

mod ingest;
mod normalize;
mod prepare;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ingest::{ingest_csv, read_csv, write_csv, Schema, DEFAULT_MAX_GAP_MINUTES};
pub use normalize::{apply_normalization, fit_normalization, invert_normalization, NormalizationParams, VarRange};
pub use prepare::{interpolate_gaps, segment, split_counts, split_datasets, DatasetSplit};
pub use synthetic::{generate_synthetic, Outage, SyntheticConfig};

/// Role a variable plays in the forecasting problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target,
    Past,
    Future,
}

/// A named real sequence. `NaN` marks a missing observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub values: Vec<f64>,
}

impl Variable {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Variable {
            name: name.into(),
            values,
        }
    }
}

/// Multivariate record set on a regular time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesFrame {
    /// Unix seconds, strictly increasing by `step_seconds`.
    pub timestamps: Vec<i64>,
    pub step_seconds: i64,
    pub target: Variable,
    pub past_covariates: Vec<Variable>,
    pub future_covariates: Vec<Variable>,
}

impl TimeSeriesFrame {
    /// Builds a frame, checking lengths and the regular time grid.
    pub fn new(
        timestamps: Vec<i64>,
        step_seconds: i64,
        target: Variable,
        past_covariates: Vec<Variable>,
        future_covariates: Vec<Variable>,
    ) -> Result<Self> {
        let frame = TimeSeriesFrame {
            timestamps,
            step_seconds,
            target,
            past_covariates,
            future_covariates,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.timestamps.len();
        if n == 0 {
            return Err(Error::Shape("frame has no samples".into()));
        }
        if self.step_seconds <= 0 {
            return Err(Error::Config(format!("non-positive step of {} s", self.step_seconds)));
        }
        for (name, _, values) in self.variables() {
            if values.len() != n {
                return Err(Error::Shape(format!(
                    "variable `{name}` has {} samples, timestamps have {n}",
                    values.len()
                )));
            }
        }
        for w in self.timestamps.windows(2) {
            if w[1] - w[0] != self.step_seconds {
                return Err(Error::Data(format!(
                    "timestamps {} and {} are not one step of {} s apart",
                    w[0], w[1], self.step_seconds
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Covered time span in seconds (`len * step`).
    pub fn duration_seconds(&self) -> i64 {
        self.len() as i64 * self.step_seconds
    }

    /// All variables in canonical order: target, past covariates, future covariates.
    pub fn variables(&self) -> impl Iterator<Item = (&str, Role, &[f64])> {
        std::iter::once((self.target.name.as_str(), Role::Target, self.target.values.as_slice()))
            .chain(
                self.past_covariates
                    .iter()
                    .map(|v| (v.name.as_str(), Role::Past, v.values.as_slice())),
            )
            .chain(
                self.future_covariates
                    .iter()
                    .map(|v| (v.name.as_str(), Role::Future, v.values.as_slice())),
            )
    }

    /// Mutable access to every variable in canonical order.
    pub fn variables_mut(&mut self) -> impl Iterator<Item = &mut Variable> {
        std::iter::once(&mut self.target)
            .chain(self.past_covariates.iter_mut())
            .chain(self.future_covariates.iter_mut())
    }

    pub fn variable_count(&self) -> usize {
        1 + self.past_covariates.len() + self.future_covariates.len()
    }

    /// Copy of the rows in `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> TimeSeriesFrame {
        let cut = |v: &Variable| Variable::new(v.name.clone(), v.values[start..end].to_vec());
        TimeSeriesFrame {
            timestamps: self.timestamps[start..end].to_vec(),
            step_seconds: self.step_seconds,
            target: cut(&self.target),
            past_covariates: self.past_covariates.iter().map(cut).collect(),
            future_covariates: self.future_covariates.iter().map(cut).collect(),
        }
    }

    /// Same shape and metadata with every variable replaced by `f(role, index, values)`.
    pub fn map_variables<F>(&self, mut f: F) -> Result<TimeSeriesFrame>
    where
        F: FnMut(Role, usize, &Variable) -> Result<Vec<f64>>,
    {
        let mut apply = |role, i, v: &Variable| -> Result<Variable> {
            let values = f(role, i, v)?;
            if values.len() != v.values.len() {
                return Err(Error::Shape(format!(
                    "variable `{}` changed length from {} to {}",
                    v.name,
                    v.values.len(),
                    values.len()
                )));
            }
            Ok(Variable::new(v.name.clone(), values))
        };
        Ok(TimeSeriesFrame {
            timestamps: self.timestamps.clone(),
            step_seconds: self.step_seconds,
            target: apply(Role::Target, 0, &self.target)?,
            past_covariates: self
                .past_covariates
                .iter()
                .enumerate()
                .map(|(i, v)| apply(Role::Past, i, v))
                .collect::<Result<_>>()?,
            future_covariates: self
                .future_covariates
                .iter()
                .enumerate()
                .map(|(i, v)| apply(Role::Future, i, v))
                .collect::<Result<_>>()?,
        })
    }

    /// True when a row has at least one missing value.
    pub fn row_missing(&self, row: usize) -> bool {
        self.variables().any(|(_, _, v)| v[row].is_nan())
    }
}
