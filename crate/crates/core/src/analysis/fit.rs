//! Least-squares fit of `NMI(r) = 1 - I_r(alpha, beta)`.

use serde::{Deserialize, Serialize};

use super::betainc::reg_inc_beta;
use crate::error::{Error, Result};
use crate::infometrics::NmiPoint;

const LN_MIN: f64 = -6.907_755_278_982_137; // ln(1e-3)
const LN_MAX: f64 = 6.907_755_278_982_137; // ln(1e3)
const MAX_ITER: usize = 2000;
const DIAMETER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub alpha: f64,
    pub beta: f64,
    /// Sum of squared residuals at the returned parameters.
    pub sse: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before the simplex collapsed.
    pub converged: bool,
}

/// Model curve `1 - I_r(alpha, beta)`.
pub fn beta_curve(rate: f64, alpha: f64, beta: f64) -> Result<f64> {
    Ok(1.0 - reg_inc_beta(rate, alpha, beta)?)
}

fn objective(points: &[NmiPoint], v: [f64; 2]) -> f64 {
    let (a, b) = (v[0].exp(), v[1].exp());
    points
        .iter()
        .map(|p| {
            let model = 1.0 - reg_inc_beta(p.rate, a, b).unwrap_or(f64::NAN);
            (p.nmi - model).powi(2)
        })
        .sum::<f64>()
}

fn clamp(v: [f64; 2]) -> [f64; 2] {
    [v[0].clamp(LN_MIN, LN_MAX), v[1].clamp(LN_MIN, LN_MAX)]
}

/// Nelder-Mead in `(ln alpha, ln beta)` from `(1, 1)`, with vertices projected
/// onto the box `[1e-3, 1e3]^2`. Stops when the simplex diameter falls below
/// `1e-8` or after 2000 iterations.
pub fn fit_beta_curve(points: &[NmiPoint]) -> Result<BetaFit> {
    let mut interior: Vec<f64> = points.iter().map(|p| p.rate).filter(|r| *r > 0.0 && *r < 1.0).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    if interior.len() < 3 {
        return Err(Error::Config(format!(
            "beta fit needs at least 3 distinct rates in (0,1), got {}",
            interior.len()
        )));
    }
    if points
        .iter()
        .any(|p| !(0.0..=1.0).contains(&p.rate) || !p.nmi.is_finite())
    {
        return Err(Error::Data(
            "NMI points must have rates in [0,1] and finite values".into(),
        ));
    }
    let f = |v: [f64; 2]| {
        let val = objective(points, v);
        if val.is_nan() {
            f64::INFINITY
        } else {
            val
        }
    };
    let mut simplex = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]];
    let mut values = simplex.map(f);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let diameter = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .map(|(i, j)| ((simplex[i][0] - simplex[j][0]).powi(2) + (simplex[i][1] - simplex[j][1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        if diameter < DIAMETER_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid = [
            (simplex[0][0] + simplex[1][0]) / 2.0,
            (simplex[0][1] + simplex[1][1]) / 2.0,
        ];
        let along = |t: f64| {
            clamp([
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ])
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = clamp([
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ]);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)))
        .unwrap_or(0);
    Ok(BetaFit {
        alpha: simplex[best][0].exp(),
        beta: simplex[best][1].exp(),
        sse: values[best],
        iterations,
        converged,
    })
}
