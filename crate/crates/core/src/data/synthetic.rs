//! Seeded synthetic data resembling a coastal water-intake station.
//!
//! Sea level is an M2 + S2 tide, the pump is a duty-cycled on/off signal with
//! jittered switch times, temperature follows a slow seasonal cycle, and the
//! intake level relaxes towards a saturating function of sea level and pump
//! state, with occasional random shocks.

use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ingest::{Schema, DEFAULT_MAX_GAP_MINUTES};
use super::prepare::split_missing_runs;
use super::{TimeSeriesFrame, Variable};
use crate::error::{Error, Result};

/// A stretch of time with no recorded data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outage {
    pub start_day: f64,
    pub hours: f64,
}

/// Generator parameters. Defaults give a 30-day, one-minute record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub duration_days: f64,
    pub step_minutes: i64,
    pub start_unix: i64,
    pub m2_amplitude: f64,
    pub s2_amplitude: f64,
    pub m2_period_hours: f64,
    pub s2_period_hours: f64,
    pub sea_noise: f64,
    pub pump_period_hours: f64,
    pub pump_duty: f64,
    pub pump_jitter_minutes: f64,
    pub pump_power: f64,
    pub temp_mean: f64,
    pub temp_amplitude: f64,
    pub temp_period_days: f64,
    pub temp_noise: f64,
    pub level_low: f64,
    pub level_high: f64,
    pub level_bias: f64,
    pub sea_gain: f64,
    pub pump_gain: f64,
    pub temp_gain: f64,
    pub response_minutes: f64,
    pub initial_level: Option<f64>,
    pub shocks_per_day: f64,
    pub shock_size: f64,
    pub noise: f64,
    pub outages: Vec<Outage>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            duration_days: 30.0,
            step_minutes: 1,
            start_unix: 1_672_531_200,
            m2_amplitude: 0.8,
            s2_amplitude: 0.3,
            m2_period_hours: 12.42,
            s2_period_hours: 12.0,
            sea_noise: 0.02,
            pump_period_hours: 7.0,
            pump_duty: 0.4,
            pump_jitter_minutes: 60.0,
            pump_power: 1.0,
            temp_mean: 8.0,
            temp_amplitude: 5.0,
            temp_period_days: 365.0,
            temp_noise: 0.05,
            level_low: 60.0,
            level_high: 410.0,
            level_bias: 0.3,
            sea_gain: 1.2,
            pump_gain: 1.8,
            temp_gain: 0.02,
            response_minutes: 45.0,
            initial_level: None,
            shocks_per_day: 1.0,
            shock_size: 25.0,
            noise: 1.0,
            outages: Vec::new(),
        }
    }
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

impl SyntheticConfig {
    /// Equilibrium level for a given drive.
    pub fn equilibrium(&self, sea: f64, pump: f64, temp: f64) -> f64 {
        let u =
            self.level_bias + self.sea_gain * sea - self.pump_gain * pump + self.temp_gain * (temp - self.temp_mean);
        self.level_low + (self.level_high - self.level_low) * sigmoid(u)
    }
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd.max(0.0)).unwrap_or_else(|_| Normal::new(0.0, 0.0).expect("zero sd is valid"))
}

/// Generates frames under `seed`. Outages shorter than the default gap
/// threshold stay in the frame as missing rows; longer ones split it.
pub fn generate_synthetic(config: &SyntheticConfig, seed: u64) -> Result<Vec<TimeSeriesFrame>> {
    if !(config.duration_days > 0.0) {
        return Err(Error::Config(format!(
            "synthetic duration must be positive, got {} days",
            config.duration_days
        )));
    }
    if config.step_minutes <= 0 {
        return Err(Error::Config(format!(
            "synthetic step must be positive, got {} min",
            config.step_minutes
        )));
    }
    if !(0.0..=1.0).contains(&config.pump_duty) || !(config.pump_period_hours > 0.0) {
        return Err(Error::Config(
            "pump duty must lie in [0,1] with a positive period".into(),
        ));
    }
    let step_s = config.step_minutes * 60;
    let n = ((config.duration_days * 86_400.0) / step_s as f64).round().max(1.0) as usize;
    let dt_h = config.step_minutes as f64 / 60.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sea_noise = normal(config.sea_noise);
    let temp_noise = normal(config.temp_noise);
    let meas_noise = normal(config.noise);
    let shock = normal(config.shock_size);
    let jitter_h = config.pump_jitter_minutes / 60.0;

    // Pump switch schedule: one on-interval per cycle with jittered edges.
    let total_h = n as f64 * dt_h;
    let period = config.pump_period_hours;
    let phase = rng.gen_range(0.0..period);
    let mut on_intervals = Vec::new();
    let mut cycle = -1.0;
    while (cycle * period + phase) < total_h + period {
        let base = cycle * period + phase;
        let j1 = if jitter_h > 0.0 {
            rng.gen_range(-jitter_h..jitter_h)
        } else {
            0.0
        };
        let j2 = if jitter_h > 0.0 {
            rng.gen_range(-jitter_h..jitter_h)
        } else {
            0.0
        };
        let on = base + j1;
        let off = (base + config.pump_duty * period + j2).max(on);
        on_intervals.push((on, off));
        cycle += 1.0;
    }

    let m2_phase = rng.gen_range(0.0..TAU);
    let s2_phase = rng.gen_range(0.0..TAU);
    let season_phase = rng.gen_range(0.0..TAU);
    let alpha = 1.0 - (-(config.step_minutes as f64) / config.response_minutes.max(1e-9)).exp();
    let shock_p = (config.shocks_per_day * config.step_minutes as f64 / 1440.0).clamp(0.0, 1.0);

    let mut sea = Vec::with_capacity(n);
    let mut temp = Vec::with_capacity(n);
    let mut pump = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    let mut level = f64::NAN;
    let mut interval = 0;
    for i in 0..n {
        let t_h = i as f64 * dt_h;
        let s = config.m2_amplitude * (TAU * t_h / config.m2_period_hours + m2_phase).sin()
            + config.s2_amplitude * (TAU * t_h / config.s2_period_hours + s2_phase).sin()
            + sea_noise.sample(&mut rng);
        let tc = config.temp_mean
            + config.temp_amplitude * (TAU * t_h / (24.0 * config.temp_period_days) + season_phase).sin()
            + temp_noise.sample(&mut rng);
        while interval + 1 < on_intervals.len() && on_intervals[interval].1 <= t_h {
            interval += 1;
        }
        let (on, off) = on_intervals[interval];
        let p = if t_h >= on && t_h < off { config.pump_power } else { 0.0 };
        let eq = config.equilibrium(s, p, tc);
        if level.is_nan() {
            level = config.initial_level.unwrap_or(eq);
        }
        level += alpha * (eq - level);
        if shock_p > 0.0 && rng.gen_bool(shock_p) {
            level += shock.sample(&mut rng);
        }
        sea.push(s);
        temp.push(tc);
        pump.push(p);
        target.push(level + meas_noise.sample(&mut rng));
    }

    for outage in &config.outages {
        let a = ((outage.start_day * 1440.0) / config.step_minutes as f64)
            .round()
            .max(0.0) as usize;
        let len = ((outage.hours * 60.0) / config.step_minutes as f64).round() as usize;
        for series in [&mut sea, &mut temp, &mut pump, &mut target] {
            for v in series.iter_mut().skip(a).take(len) {
                *v = f64::NAN;
            }
        }
    }

    let schema = Schema::synthetic();
    let frame = TimeSeriesFrame {
        timestamps: (0..n as i64).map(|k| config.start_unix + k * step_s).collect(),
        step_seconds: step_s,
        target: Variable::new(schema.target, target),
        past_covariates: vec![
            Variable::new(&schema.past[0], sea),
            Variable::new(&schema.past[1], temp),
        ],
        future_covariates: vec![Variable::new(&schema.future[0], pump)],
    };
    Ok(split_missing_runs(&frame, DEFAULT_MAX_GAP_MINUTES))
}
