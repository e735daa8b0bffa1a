//! Synthetic paired forecasts with a tail-dependent error for system A.
//!
//! `Y ~ N(μ, σ²)`, `x_A = Y + e_A` with `sd(e_A | Y = y) = arctan(y - c) + 2`
//! (radians), `x_B = Y + e_B` with `sd(e_B) = 2`. A is sharper below the
//! cutpoint `c` and less accurate above it.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::scoring::ForecastCase;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n: usize,
    pub seed: u64,
    pub obs_mean: f64,
    pub obs_sd: f64,
    /// Centre of the arctan ramp in A's error sd.
    pub cutpoint: f64,
    /// Constant added to `arctan(y - cutpoint)` for A's error sd.
    pub error_a_offset: f64,
    pub error_b_sd: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: 10_000,
            seed: 1,
            obs_mean: 4.0,
            obs_sd: 15.0,
            cutpoint: 10.0,
            error_a_offset: 2.0,
            error_b_sd: 2.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::validation("synthetic experiment needs n >= 1"));
        }
        if !(self.obs_sd > 0.0 && self.error_b_sd > 0.0) {
            return Err(Error::validation("standard deviations must be > 0"));
        }
        // arctan ranges over (-π/2, π/2), so the offset must keep sd(e_A) > 0.
        if !(self.error_a_offset >= std::f64::consts::FRAC_PI_2) {
            return Err(Error::validation(
                "error_a_offset must be at least pi/2 so that sd(e_A) > 0",
            ));
        }
        Ok(())
    }

    pub fn error_a_sd(&self, y: f64) -> f64 {
        (y - self.cutpoint).atan() + self.error_a_offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub a: Vec<ForecastCase>,
    pub b: Vec<ForecastCase>,
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let mut obs_rng = stream_rng(cfg.seed, Stream::Observations);
    let mut ea_rng = stream_rng(cfg.seed, Stream::ErrorsA);
    let mut eb_rng = stream_rng(cfg.seed, Stream::ErrorsB);
    let mut a = Vec::with_capacity(cfg.n);
    let mut b = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let z: f64 = StandardNormal.sample(&mut obs_rng);
        let y = cfg.obs_mean + cfg.obs_sd * z;
        let za: f64 = StandardNormal.sample(&mut ea_rng);
        let zb: f64 = StandardNormal.sample(&mut eb_rng);
        let id = (i + 1).to_string();
        a.push(ForecastCase::new(id.clone(), y + cfg.error_a_sd(y) * za, y));
        b.push(ForecastCase::new(id, y + cfg.error_b_sd * zb, y));
    }
    Ok(SyntheticData { a, b })
}
