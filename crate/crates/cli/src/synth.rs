//! Synthetic series used by the examples and the acceptance suite.

use std::f64::consts::PI;

use chronocycle::TimeSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{SynthConfig, SynthKind};

/// `sin t` plus Gaussian noise on `[0, 2 pi periods]`.
pub fn noisy_sine(samples: usize, sigma: f64, periods: f64, seed: u64) -> chronocycle::Result<TimeSeries> {
    with_noise(TimeSeries::sample(0.0, 2.0 * PI * periods, samples, f64::sin)?, sigma, seed)
}

/// `2 sin t + 1.8 sin(sqrt(3) t)` on `[0, 60 pi]`, optionally with noise.
pub fn double_sine(samples: usize, sigma: f64, seed: u64) -> chronocycle::Result<TimeSeries> {
    let f = |t: f64| 2.0 * t.sin() + 1.8 * (3f64.sqrt() * t).sin();
    with_noise(TimeSeries::sample(0.0, 60.0 * PI, samples, f)?, sigma, seed)
}

pub fn generate(cfg: &SynthConfig, seed: u64) -> chronocycle::Result<TimeSeries> {
    match cfg.kind {
        SynthKind::NoisySine => noisy_sine(cfg.samples(), cfg.sigma, cfg.periods, seed),
        SynthKind::DoubleSine => double_sine(cfg.samples(), cfg.sigma, seed),
    }
}

fn with_noise(ts: TimeSeries, sigma: f64, seed: u64) -> chronocycle::Result<TimeSeries> {
    if sigma == 0.0 {
        return Ok(ts);
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| chronocycle::Error::InvalidParameter(format!("noise level {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = ts.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
    TimeSeries::new(ts.t0(), ts.dt(), values)
}
