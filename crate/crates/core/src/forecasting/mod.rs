//! Lagged-dependent-variable forecasters: multi-output least squares and
//! boosted trees, with direct chunk prediction and autoregressive rollout.

mod evaluate;
mod gbt;
mod lags;
mod linear;
mod model_file;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use evaluate::{evaluate, rmse_mae, rollout, ForecastResult, PastFill, SegmentMetrics, Window};
pub use gbt::{fit_gbt, Ensemble, GbtModel, GbtParams, Node, Tree};
pub use lags::{build_design, DesignMatrix, LagSpec};
pub use linear::{fit_ols, LinearModel};
pub use model_file::{load_model, save_model, ModelHeader};

/// Anything that maps one feature row to an `H`-step forecast.
pub trait Forecaster {
    fn predict(&self, features: &[f64]) -> Result<Vec<f64>>;
}

impl Forecaster for LinearModel {
    fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        LinearModel::predict(self, features)
    }
}

impl Forecaster for GbtModel {
    fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        GbtModel::predict(self, features)
    }
}

impl<F: Fn(&[f64]) -> Result<Vec<f64>>> Forecaster for F {
    fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        self(features)
    }
}

/// Model families of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ols,
    Gbt,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ols => "ols",
            ModelKind::Gbt => "gbt",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ols" | "linear" => Ok(ModelKind::Ols),
            "gbt" | "xgboost" | "trees" => Ok(ModelKind::Gbt),
            other => Err(crate::Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// A fitted forecaster of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Linear(LinearModel),
    Gbt(GbtModel),
}

impl Forecaster for Model {
    fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Linear(m) => m.predict(features),
            Model::Gbt(m) => m.predict(features),
        }
    }
}

/// One direct `H`-step prediction.
pub fn predict_direct<M: Forecaster + ?Sized>(model: &M, features: &[f64]) -> Result<Vec<f64>> {
    model.predict(features)
}
