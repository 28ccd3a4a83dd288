//! Generators for sinusoidal toy domains used in transfer experiments.

use std::f64::consts::PI;

use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Sum of two sinusoids plus white noise, one column per variable.
///
/// Each variable draws its own phases and a mild amplitude jitter from the
/// seed, so variables share the spectrum but not the waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SineDomain {
    pub name: String,
    pub periods: [f64; 2],
    pub amplitudes: [f64; 2],
    pub noise: f64,
    pub variables: usize,
    pub len: usize,
    pub seed: u64,
}

impl SineDomain {
    /// Periods 24 and 8.
    pub fn domain_a(len: usize, seed: u64) -> Self {
        SineDomain {
            name: "sine-a".into(),
            periods: [24.0, 8.0],
            amplitudes: [1.0, 0.5],
            noise: 0.1,
            variables: 3,
            len,
            seed,
        }
    }

    /// Periods 12 and 6.
    pub fn domain_b(len: usize, seed: u64) -> Self {
        SineDomain {
            name: "sine-b".into(),
            periods: [12.0, 6.0],
            ..SineDomain::domain_a(len, seed)
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        if self.variables == 0 || self.len == 0 {
            return Err(Error::InvalidArgument("synthetic domain needs variables and rows".into()));
        }
        if !(self.noise >= 0.0) || self.periods.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::InvalidArgument("periods must be positive and noise non-negative".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.noise).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let columns = (0..self.variables)
            .map(|v| {
                let phases: [f64; 2] = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
                let gain: f64 = rng.random_range(0.8..1.2);
                let values = (0..self.len)
                    .map(|t| {
                        let t = t as f64;
                        let clean: f64 = (0..2)
                            .map(|i| self.amplitudes[i] * (2.0 * PI * t / self.periods[i] + phases[i]).sin())
                            .sum();
                        gain * clean + noise.sample(&mut rng)
                    })
                    .collect();
                (format!("{}_v{v}", self.name), values)
            })
            .collect();
        Dataset::from_columns(self.name.clone(), Duration::hours(1), columns)
    }
}
