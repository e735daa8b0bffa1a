//! Simulation of a calibrated forecaster gaming conditional evaluation
//! protocols for extreme events.
//!
//! Each case draws a location `μ ~ N(m, s²)`. System B's predictive
//! distribution is `LogNormal(μ, σ²)` and the observation is drawn from it, so
//! B is calibrated. System A issues the mean of `LogNormal(μ + ε, σ²)` with
//! `ε ~ N(0, τ²)`. Honest B issues the mean of its predictive distribution.
//!
//! Protocols restrict assessment to:
//!
//! 1. cases with `y >= c`;
//! 2. cases with `x_A >= c` or `x_B >= c`;
//! 3. cases with `x_A >= c`, `x_B >= c` or `y >= c`;
//! 4. cases with `x_A >= c`;
//! 5. all cases, scored with the upper component of squared error split at `c`.
//!
//! Options 1 to 4 use squared error on the assessed cases.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::decomposition::{DecomposedGenerator, DecompositionOptions};
use crate::error::{Error, Result};
use crate::numeric::{mean, pairwise_sum, sample_sd, std_normal_pdf, std_normal_sf};
use crate::partition::{IntervalDomain, WeightFunction};
use crate::rng::{stream_rng, Stream};
use crate::scoring::{Functional, GeneratorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HedgingConfig {
    pub n: usize,
    pub seed: u64,
    pub threshold: f64,
    pub location_mean: f64,
    pub location_sd: f64,
    /// Log-scale sd of both predictive distributions.
    pub sigma: f64,
    /// sd of A's location error.
    pub a_location_sd: f64,
    /// Forecast used by the Option 3 strategy to stay just below the threshold.
    pub below_threshold: f64,
}

impl Default for HedgingConfig {
    fn default() -> Self {
        HedgingConfig {
            n: 20_000,
            seed: 1,
            threshold: 20.0,
            location_mean: 3f64.ln(),
            location_sd: 0.8,
            sigma: 0.5,
            a_location_sd: 0.25,
            below_threshold: 19.9,
        }
    }
}

impl HedgingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::validation("hedging simulation needs n >= 1"));
        }
        if !(self.location_sd >= 0.0 && self.sigma > 0.0 && self.a_location_sd >= 0.0) {
            return Err(Error::validation(
                "hedging model scales must be nonnegative (sigma > 0)",
            ));
        }
        if !(self.threshold > 0.0) || !(self.below_threshold < self.threshold) {
            return Err(Error::validation(
                "threshold must be > 0 and below_threshold below it",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HedgingOption {
    ObservedAbove,
    EitherForecastAbove,
    AnyAbove,
    ForecastAAbove,
    Decomposed,
}

impl HedgingOption {
    pub const ALL: [HedgingOption; 5] = [
        HedgingOption::ObservedAbove,
        HedgingOption::EitherForecastAbove,
        HedgingOption::AnyAbove,
        HedgingOption::ForecastAAbove,
        HedgingOption::Decomposed,
    ];

    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1..=5 => Ok(Self::ALL[(k - 1) as usize]),
            _ => Err(Error::validation(format!(
                "hedging option must be 1-5, got {k}"
            ))),
        }
    }

    pub fn number(&self) -> u8 {
        Self::ALL.iter().position(|o| o == self).expect("listed") as u8 + 1
    }
}

/// Moments of `LogNormal(μ, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormal {
    pub mu: f64,
    pub sigma: f64,
}

impl LogNormal {
    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }

    pub fn variance(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        s2.exp_m1() * (2.0 * self.mu + s2).exp()
    }

    /// `E[(c - Y)²]`.
    pub fn expected_squared_error(&self, c: f64) -> f64 {
        let d = c - self.mean();
        self.variance() + d * d
    }

    /// `E[Y | Y >= c]`, or `None` when `P(Y >= c)` underflows.
    pub fn mean_above(&self, c: f64) -> Option<f64> {
        let z = (c.ln() - self.mu) / self.sigma;
        let tail = std_normal_sf(z);
        let shifted = std_normal_sf(z - self.sigma);
        (tail > 0.0 && shifted > 0.0).then(|| self.mean() * shifted / tail)
    }
}

/// `E[Y | Y >= c]` for `Y ~ N(μ, sd²)`.
pub fn normal_mean_above(mu: f64, sd: f64, c: f64) -> f64 {
    let a = (c - mu) / sd;
    mu + sd * std_normal_pdf(a) / std_normal_sf(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Case {
    y: f64,
    x_a: f64,
    f_b: LogNormal,
}

fn draw_cases(cfg: &HedgingConfig) -> Vec<Case> {
    let mut loc = stream_rng(cfg.seed, Stream::HedgingLocation);
    let mut obs = stream_rng(cfg.seed, Stream::HedgingObservation);
    let mut noise = stream_rng(cfg.seed, Stream::HedgingNoiseA);
    (0..cfg.n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut loc);
            let z2: f64 = StandardNormal.sample(&mut obs);
            let z3: f64 = StandardNormal.sample(&mut noise);
            let mu = cfg.location_mean + cfg.location_sd * z1;
            let f_b = LogNormal {
                mu,
                sigma: cfg.sigma,
            };
            let f_a = LogNormal {
                mu: mu + cfg.a_location_sd * z3,
                sigma: cfg.sigma,
            };
            Case {
                y: (mu + cfg.sigma * z2).exp(),
                x_a: f_a.mean(),
                f_b,
            }
        })
        .collect()
}

/// B's strategic forecast under protocols 1 to 3 (honest for 4).
fn strategic_forecast(option: HedgingOption, case: &Case, cfg: &HedgingConfig) -> f64 {
    let c = cfg.threshold;
    let honest = case.f_b.mean();
    let prefer_threshold =
        || case.f_b.expected_squared_error(c) < case.f_b.expected_squared_error(case.x_a);
    match option {
        HedgingOption::ObservedAbove => case.f_b.mean_above(c).unwrap_or(c),
        HedgingOption::EitherForecastAbove | HedgingOption::AnyAbove => {
            if case.x_a.max(honest) >= c {
                honest
            } else if prefer_threshold() {
                c
            } else if option == HedgingOption::AnyAbove {
                cfg.below_threshold
            } else {
                honest
            }
        }
        HedgingOption::ForecastAAbove | HedgingOption::Decomposed => honest,
    }
}

fn assessed(option: HedgingOption, x_a: f64, x_b: f64, y: f64, c: f64) -> bool {
    match option {
        HedgingOption::ObservedAbove => y >= c,
        HedgingOption::EitherForecastAbove => x_a >= c || x_b >= c,
        HedgingOption::AnyAbove => x_a >= c || x_b >= c || y >= c,
        HedgingOption::ForecastAAbove => x_a >= c,
        HedgingOption::Decomposed => true,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyOutcome {
    pub strategy: String,
    pub assessed: usize,
    /// Mean score of B over assessed cases; `None` if none were assessed.
    pub mean_b: Option<f64>,
    pub mean_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgingReport {
    pub option: u8,
    pub seed: u64,
    pub events: usize,
    pub honest: StrategyOutcome,
    pub strategic: Vec<StrategyOutcome>,
}

impl HedgingReport {
    /// `strategic - honest` mean score of B for strategy `k`, when both exist.
    pub fn gain(&self, k: usize) -> Option<f64> {
        Some(self.strategic.get(k)?.mean_b? - self.honest.mean_b?)
    }
}

fn outcome(
    name: &str,
    cases: &[Case],
    forecasts: &[f64],
    option: HedgingOption,
    cfg: &HedgingConfig,
    score: &dyn Fn(f64, f64) -> f64,
) -> StrategyOutcome {
    let mut sb = Vec::new();
    let mut sa = Vec::new();
    for (case, x_b) in cases.iter().zip(forecasts) {
        if assessed(option, case.x_a, *x_b, case.y, cfg.threshold) {
            sb.push(score(*x_b, case.y));
            sa.push(score(case.x_a, case.y));
        }
    }
    let avg = |v: &[f64]| (!v.is_empty()).then(|| pairwise_sum(v) / v.len() as f64);
    StrategyOutcome {
        strategy: name.to_string(),
        assessed: sb.len(),
        mean_b: avg(&sb),
        mean_a: avg(&sa),
    }
}

pub fn simulate_hedging(option: HedgingOption, cfg: &HedgingConfig) -> Result<HedgingReport> {
    cfg.validate()?;
    let cases = draw_cases(cfg);
    let honest: Vec<f64> = cases.iter().map(|c| c.f_b.mean()).collect();

    let upper = DecomposedGenerator::new(
        GeneratorSpec::ScaledQuadraticPhi,
        WeightFunction::rectangular(cfg.threshold, f64::INFINITY)?,
        IntervalDomain::real_line(),
        DecompositionOptions::default(),
    )?;
    let squared = |x: f64, y: f64| (x - y) * (x - y);
    let tail = |x: f64, y: f64| {
        upper
            .component_score(&Functional::Expectile { alpha: 0.5 }, x, y)
            .unwrap_or(f64::NAN)
    };
    let score: &dyn Fn(f64, f64) -> f64 = if option == HedgingOption::Decomposed {
        &tail
    } else {
        &squared
    };

    let strategies: Vec<HedgingOption> = match option {
        HedgingOption::Decomposed => vec![
            HedgingOption::ObservedAbove,
            HedgingOption::EitherForecastAbove,
            HedgingOption::AnyAbove,
        ],
        o => vec![o],
    };
    let strategic = strategies
        .iter()
        .map(|s| {
            let fc: Vec<f64> = cases
                .iter()
                .map(|c| strategic_forecast(*s, c, cfg))
                .collect();
            outcome(
                &format!("strategy_{}", s.number()),
                &cases,
                &fc,
                option,
                cfg,
                score,
            )
        })
        .collect();
    Ok(HedgingReport {
        option: option.number(),
        seed: cfg.seed,
        events: cases.len(),
        honest: outcome("honest", &cases, &honest, option, cfg, score),
        strategic,
    })
}

/// Strategic-minus-honest differences of B's mean score across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgingStudy {
    pub option: u8,
    pub strategy: String,
    pub seeds: usize,
    pub differences: Vec<f64>,
    pub mean_difference: f64,
    pub standard_error: f64,
}

pub fn hedging_study(
    option: HedgingOption,
    cfg: &HedgingConfig,
    seeds: &[u64],
) -> Result<Vec<HedgingStudy>> {
    let reports: Vec<HedgingReport> = seeds
        .iter()
        .map(|s| {
            simulate_hedging(
                option,
                &HedgingConfig {
                    seed: *s,
                    ..cfg.clone()
                },
            )
        })
        .collect::<Result<_>>()?;
    let k = reports.first().map_or(0, |r| r.strategic.len());
    Ok((0..k)
        .map(|j| {
            let differences: Vec<f64> = reports.iter().filter_map(|r| r.gain(j)).collect();
            let se = if differences.len() > 1 {
                sample_sd(&differences) / (differences.len() as f64).sqrt()
            } else {
                f64::NAN
            };
            HedgingStudy {
                option: option.number(),
                strategy: reports[0].strategic[j].strategy.clone(),
                seeds: differences.len(),
                mean_difference: mean(&differences),
                standard_error: se,
                differences,
            }
        })
        .collect())
}
