//! `WFM1` model container (little-endian):
//!
//! ```text
//! magic "WFM1" | version u8 | kind u8 (0 linear, 1 boosted trees)
//! | header length u32 | JSON header {lag_spec, normalization, covariates}
//! | payload
//! ```
//!
//! Linear payload: `width u32 | horizon u32 | rank u32 | width*horizon f64
//! weights (row-major) | horizon f64 intercepts`.
//!
//! Tree payload: `width u32 | n_rounds u32 | max_depth u32 | learning_rate
//! f64 | min_samples_leaf u32 | horizon u32`, then per step `base_score f64 |
//! tree count u32`, then per tree `node count u32` and per node either
//! `0 u8 | value f64` (leaf) or `1 u8 | feature u32 | threshold f64 | left
//! u32 | right u32` (split). Training-loss traces are not stored.

use serde::{Deserialize, Serialize};

use super::gbt::{Ensemble, GbtModel, GbtParams, Node, Tree};
use super::lags::LagSpec;
use super::linear::LinearModel;
use super::Model;
use crate::data::NormalizationParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WFM1";
const VERSION: u8 = 1;

/// Everything needed to apply a fitted model to new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub lag_spec: LagSpec,
    pub normalization: Option<NormalizationParams>,
    pub past_covariates: Vec<String>,
    pub future_covariates: Vec<String>,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| Error::Config(format!("{v} does not fit the model format")))?;
        self.0.extend_from_slice(&v.to_le_bytes());
        Ok(())
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(Error::Format {
                offset: self.pos,
                msg: "truncated model file".into(),
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn fail(&self, msg: &str) -> Error {
        Error::Format {
            offset: self.pos,
            msg: msg.into(),
        }
    }
}

/// Encodes a model and its header.
pub fn save_model(model: &Model, header: &ModelHeader) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u8(VERSION);
    let json = serde_json::to_vec(header)?;
    match model {
        Model::Linear(m) => {
            w.u8(0);
            w.u32(json.len())?;
            w.0.extend_from_slice(&json);
            w.u32(m.width)?;
            w.u32(m.horizon)?;
            w.u32(m.rank)?;
            m.weights.iter().for_each(|&v| w.f64(v));
            m.intercept.iter().for_each(|&v| w.f64(v));
        }
        Model::Gbt(m) => {
            w.u8(1);
            w.u32(json.len())?;
            w.0.extend_from_slice(&json);
            w.u32(m.width)?;
            w.u32(m.params.n_rounds)?;
            w.u32(m.params.max_depth)?;
            w.f64(m.params.learning_rate);
            w.u32(m.params.min_samples_leaf)?;
            w.u32(m.ensembles.len())?;
            for e in &m.ensembles {
                w.f64(e.base_score);
                w.u32(e.trees.len())?;
                for t in &e.trees {
                    w.u32(t.nodes.len())?;
                    for node in &t.nodes {
                        match *node {
                            Node::Leaf { value } => {
                                w.u8(0);
                                w.f64(value);
                            }
                            Node::Split {
                                feature,
                                threshold,
                                left,
                                right,
                            } => {
                                w.u8(1);
                                w.u32(feature)?;
                                w.f64(threshold);
                                w.u32(left)?;
                                w.u32(right)?;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(w.0)
}

/// Decodes a model file, checking structure and index bounds.
pub fn load_model(bytes: &[u8]) -> Result<(Model, ModelHeader)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: "bad model magic".into(),
        });
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            msg: format!("unsupported model version {version}"),
        });
    }
    let kind = r.u8()?;
    let json_len = r.u32()?;
    let header: ModelHeader = serde_json::from_slice(r.take(json_len)?)?;
    let model = match kind {
        0 => {
            let (width, horizon, rank) = (r.u32()?, r.u32()?, r.u32()?);
            let count = width
                .checked_mul(horizon)
                .ok_or_else(|| r.fail("weight count overflows"))?;
            if count.saturating_mul(8) > bytes.len() {
                return Err(r.fail("weight block larger than the file"));
            }
            let weights = (0..count).map(|_| r.f64()).collect::<Result<_>>()?;
            let intercept = (0..horizon).map(|_| r.f64()).collect::<Result<_>>()?;
            Model::Linear(LinearModel {
                width,
                horizon,
                weights,
                intercept,
                rank,
            })
        }
        1 => {
            let width = r.u32()?;
            let params = GbtParams {
                n_rounds: r.u32()?,
                max_depth: r.u32()?,
                learning_rate: r.f64()?,
                min_samples_leaf: r.u32()?,
                early_stopping_rounds: None,
            };
            let horizon = r.u32()?;
            let mut ensembles = Vec::new();
            for _ in 0..horizon {
                let base_score = r.f64()?;
                let n_trees = r.u32()?;
                let mut trees = Vec::new();
                for _ in 0..n_trees {
                    let n_nodes = r.u32()?;
                    if n_nodes == 0 || n_nodes > bytes.len() {
                        return Err(r.fail("implausible node count"));
                    }
                    let mut nodes = Vec::with_capacity(n_nodes);
                    for _ in 0..n_nodes {
                        nodes.push(match r.u8()? {
                            0 => Node::Leaf { value: r.f64()? },
                            1 => {
                                let (feature, threshold, left, right) = (r.u32()?, r.f64()?, r.u32()?, r.u32()?);
                                if feature >= width
                                    || left >= n_nodes
                                    || right >= n_nodes
                                    || left <= nodes.len()
                                    || right <= nodes.len()
                                {
                                    return Err(r.fail("split node references out of range"));
                                }
                                Node::Split {
                                    feature,
                                    threshold,
                                    left,
                                    right,
                                }
                            }
                            _ => return Err(r.fail("unknown node tag")),
                        });
                    }
                    trees.push(Tree { nodes });
                }
                ensembles.push(Ensemble {
                    base_score,
                    trees,
                    train_loss: Vec::new(),
                });
            }
            Model::Gbt(GbtModel {
                width,
                params,
                ensembles,
            })
        }
        other => {
            return Err(Error::Format {
                offset: 5,
                msg: format!("unknown model kind {other}"),
            })
        }
    };
    if r.pos != bytes.len() {
        return Err(r.fail("trailing bytes in model file"));
    }
    Ok((model, header))
}
