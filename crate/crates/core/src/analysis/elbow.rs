//! Knee selection on an error-versus-rate curve by maximum chord distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowResult {
    pub recommended_rate: f64,
    pub index: usize,
    /// Distance of each normalized point from the end-to-end chord.
    pub chord_distances: Vec<f64>,
    /// Set when every distance is below `1e-12`; the highest rate is returned.
    pub flat: bool,
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if hi > lo {
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Both axes are min-max normalized; the point farthest from the chord joining
/// the first and last points wins, the lower rate on ties.
pub fn elbow(rates: &[f64], errors: &[f64]) -> Result<ElbowResult> {
    if rates.len() != errors.len() {
        return Err(Error::Shape(format!(
            "{} rates but {} errors",
            rates.len(),
            errors.len()
        )));
    }
    if rates.len() < 3 {
        return Err(Error::Config(format!(
            "elbow needs at least 3 points, got {}",
            rates.len()
        )));
    }
    if rates.windows(2).any(|w| !(w[0] < w[1])) || rates.iter().chain(errors).any(|v| !v.is_finite()) {
        return Err(Error::Config(
            "elbow rates must be finite and strictly ascending".into(),
        ));
    }
    let (x, y) = (normalize(rates), normalize(errors));
    let last = x.len() - 1;
    let (dx, dy) = (x[last] - x[0], y[last] - y[0]);
    let len = (dx * dx + dy * dy).sqrt();
    let chord_distances: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(&xi, &yi)| ((xi - x[0]) * dy - (yi - y[0]) * dx).abs() / len)
        .collect();
    let mut index = 0;
    for (i, &d) in chord_distances.iter().enumerate() {
        if d > chord_distances[index] {
            index = i;
        }
    }
    let flat = chord_distances.iter().all(|&d| d < 1e-12);
    if flat {
        index = last;
    }
    Ok(ElbowResult {
        recommended_rate: rates[index],
        index,
        chord_distances,
        flat,
    })
}
