//! Multi-output least squares.
//!
//! Column `h` of the weight matrix is the direct model for step `h`; one joint
//! solve gives the same answer as `H` separate fits. Columns are centred, the
//! augmented matrix `[X | Y]` is reduced block by block with Householder QR,
//! and the triangular factor is solved through an SVD so rank-deficient
//! problems get the minimum-norm solution.

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lags::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub width: usize,
    pub horizon: usize,
    /// Row-major `width x horizon`.
    pub weights: Vec<f64>,
    pub intercept: Vec<f64>,
    /// Numerical rank of the centred design (including any ridge rows).
    pub rank: usize,
}

impl LinearModel {
    pub fn weight(&self, feature: usize, h: usize) -> f64 {
        self.weights[feature * self.horizon + h]
    }

    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.width {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.width,
                features.len()
            )));
        }
        let mut out = self.intercept.clone();
        for (f, &x) in features.iter().enumerate() {
            let row = &self.weights[f * self.horizon..(f + 1) * self.horizon];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * x;
            }
        }
        Ok(out)
    }
}

/// Fits `Y ~ X W + b` minimizing squared error plus `ridge * |W|^2`.
pub fn fit_ols(design: &DesignMatrix, ridge: f64) -> Result<LinearModel> {
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::Config(format!(
            "ridge must be a finite non-negative number, got {ridge}"
        )));
    }
    let (n, p, h) = (design.n_rows, design.width, design.horizon);
    if n == 0 {
        return Err(Error::Data("design matrix has no rows".into()));
    }
    if design.features.iter().chain(&design.targets).any(|v| !v.is_finite()) {
        return Err(Error::Data("design matrix contains non-finite values".into()));
    }
    let x_mean = column_means(&design.features, n, p);
    let y_mean = column_means(&design.targets, n, h);
    let cols = p + h;

    // Tall-skinny QR: fold row blocks into a running triangular factor.
    let block = (4 * cols).max(256);
    let mut r: Option<DMatrix<f64>> = None;
    let mut start = 0;
    let extra = if ridge > 0.0 { p } else { 0 };
    while start < n + extra {
        let end = (start + block).min(n + extra);
        let prev = r.as_ref().map_or(0, |m| m.nrows());
        let mut m = DMatrix::<f64>::zeros(prev + end - start, cols);
        if let Some(rp) = &r {
            m.view_mut((0, 0), (prev, cols)).copy_from(rp);
        }
        for (k, i) in (start..end).enumerate() {
            if i < n {
                for j in 0..p {
                    m[(prev + k, j)] = design.features[i * p + j] - x_mean[j];
                }
                for j in 0..h {
                    m[(prev + k, p + j)] = design.targets[i * h + j] - y_mean[j];
                }
            } else {
                m[(prev + k, i - n)] = ridge.sqrt();
            }
        }
        let qr = m.qr();
        let mut rr = qr.r();
        if rr.nrows() > cols {
            rr = rr.rows(0, cols).into_owned();
        }
        r = Some(rr);
        start = end;
    }
    let r = r.expect("at least one block");
    let rows = r.nrows().min(p);
    let rxx = r.view((0, 0), (rows, p)).into_owned();
    let rxy = r.view((0, p), (rows, h)).into_owned();

    let svd = rxx.svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = s_max * (n.max(p) as f64) * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < p && ridge == 0.0 {
        warn!("design has rank {rank} < {p} features; returning the minimum-norm solution");
    }
    let w = svd
        .solve(&rxy, tol)
        .map_err(|e| Error::Data(format!("least-squares solve failed: {e}")))?;

    let mut weights = vec![0.0; p * h];
    for f in 0..p {
        for k in 0..h {
            weights[f * h + k] = w[(f, k)];
        }
    }
    let intercept = (0..h)
        .map(|k| y_mean[k] - (0..p).map(|f| x_mean[f] * w[(f, k)]).sum::<f64>())
        .collect();
    Ok(LinearModel {
        width: p,
        horizon: h,
        weights,
        intercept,
        rank,
    })
}

fn column_means(data: &[f64], n: usize, p: usize) -> Vec<f64> {
    let mut mean = vec![0.0; p];
    for row in data.chunks_exact(p) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    mean
}
