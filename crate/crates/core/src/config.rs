//! TOML run configuration.
//!
//! ```toml
//! seed = 42
//!
//! [partition]
//! domain = { lower = "-inf", upper = "inf" }
//! cutpoints = [10.0]          # or: ramps = [[35.8, 42.2]], arctan = 10.0,
//!                             # or an explicit list of weights:
//! # weights = [
//! #   { kind = "rectangular", params = { a = "-inf", b = 10.0 } },
//! #   { kind = "rectangular", params = { a = 10.0, b = "inf" } },
//! # ]
//!
//! [scoring]
//! functional = "expectile"    # quantile | expectile | huber_mean
//! alpha = 0.5                 # quantile / expectile
//! # nu = 1.0                  # huber_mean
//! generator = "scaled_quadratic_phi"
//!
//! [grid]
//! points = 501
//! pad = 0.05
//!
//! [ci]
//! method = "normal"           # or "bootstrap"
//! resamples = 10000
//! ```
//!
//! A partition file on its own has the layout of the `[partition]` table at
//! top level.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elementary::ThetaGrid;
use crate::error::{Error, Result};
use crate::evaluation::{CiMethod, HedgingConfig, SyntheticConfig};
use crate::partition::{
    make_arctan_partition, make_rectangular_partition, make_trapezoidal_partition,
    validate_partition, IntervalDomain, PartitionOfUnity, ProbeGrid, WeightFunction,
};
use crate::scoring::{Functional, GeneratorSpec, ScoringSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub partition: Option<PartitionConfig>,
    pub scoring: Option<ScoringConfig>,
    pub grid: Option<GridConfig>,
    pub ci: Option<CiConfig>,
    pub synthetic: Option<SyntheticConfig>,
    pub hedging: Option<HedgingConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default)]
    pub domain: IntervalDomain,
    pub cutpoints: Option<Vec<f64>>,
    pub ramps: Option<Vec<(f64, f64)>>,
    pub arctan: Option<f64>,
    pub weights: Option<Vec<WeightFunction>>,
    pub probe_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringConfig {
    pub functional: Option<String>,
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub generator: Option<String>,
    /// Slope for `generator = "linear_g"`.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: Option<usize>,
    pub pad: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiConfig {
    pub method: Option<String>,
    pub resamples: Option<usize>,
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, source: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::parse(source, e.to_string()))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

impl RunConfig {
    pub fn from_toml(text: &str, source: &str) -> Result<Self> {
        parse_toml(text, source)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?, &path.display().to_string())
    }
}

impl PartitionConfig {
    pub fn from_toml(text: &str, source: &str) -> Result<Self> {
        parse_toml(text, source)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?, &path.display().to_string())
    }

    pub fn probe_grid(&self) -> ProbeGrid {
        self.probe_points
            .map_or_else(ProbeGrid::default, |points| ProbeGrid { points })
    }

    /// Builds and validates the partition. At most one of `cutpoints`,
    /// `ramps`, `arctan` and `weights` may be given; none means the trivial
    /// one-weight partition.
    pub fn build(&self) -> Result<PartitionOfUnity> {
        let p = self.build_unchecked()?;
        let report = validate_partition(&p, &self.probe_grid());
        if !report.passed {
            return Err(Error::validation(report.summary()));
        }
        Ok(p)
    }

    /// Like [`PartitionConfig::build`] but without the sum-to-one check on
    /// explicit weights.
    pub fn build_unchecked(&self) -> Result<PartitionOfUnity> {
        self.domain.validate()?;
        let given = [
            self.cutpoints.is_some(),
            self.ramps.is_some(),
            self.arctan.is_some(),
            self.weights.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if given > 1 {
            return Err(Error::validation(
                "partition: give only one of cutpoints, ramps, arctan, weights",
            ));
        }
        let p = if let Some(c) = &self.cutpoints {
            make_rectangular_partition(self.domain, c)?
        } else if let Some(r) = &self.ramps {
            make_trapezoidal_partition(self.domain, r)?
        } else if let Some(a) = self.arctan {
            make_arctan_partition(self.domain, a)?
        } else if let Some(w) = &self.weights {
            for (j, wj) in w.iter().enumerate() {
                wj.validate()
                    .map_err(|e| Error::validation(format!("partition.weights[{j}]: {e}")))?;
            }
            PartitionOfUnity::unchecked(self.domain, w.clone())
        } else {
            PartitionOfUnity::trivial(self.domain)
        };
        Ok(p)
    }
}

pub fn parse_functional(name: &str, alpha: Option<f64>, nu: Option<f64>) -> Result<Functional> {
    let need = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| Error::validation(format!("functional {name} needs {what}")))
    };
    let f = match name {
        "quantile" => Functional::Quantile {
            alpha: need(alpha, "alpha")?,
        },
        "expectile" => Functional::Expectile {
            alpha: need(alpha, "alpha")?,
        },
        "huber_mean" | "huber" => Functional::HuberMean {
            nu: need(nu, "nu")?,
        },
        other => {
            return Err(Error::validation(format!(
                "unknown functional '{other}' (quantile, expectile, huber_mean)"
            )))
        }
    };
    f.validate()?;
    Ok(f)
}

pub fn parse_generator(name: &str, slope: Option<f64>) -> Result<GeneratorSpec> {
    match name {
        "identity_g" | "identity" => Ok(GeneratorSpec::IdentityG),
        "linear_g" => Ok(GeneratorSpec::LinearG {
            slope: slope.ok_or_else(|| Error::validation("linear_g needs slope"))?,
        }),
        "quadratic_phi" => Ok(GeneratorSpec::QuadraticPhi),
        "scaled_quadratic_phi" => Ok(GeneratorSpec::ScaledQuadraticPhi),
        other => Err(Error::validation(format!(
            "unknown generator '{other}' (identity_g, linear_g, quadratic_phi, scaled_quadratic_phi)"
        ))),
    }
}

/// The conventional generator for each functional.
pub fn default_generator(f: &Functional) -> GeneratorSpec {
    match f {
        Functional::Quantile { .. } => GeneratorSpec::IdentityG,
        Functional::Expectile { .. } => GeneratorSpec::ScaledQuadraticPhi,
        Functional::HuberMean { .. } => GeneratorSpec::QuadraticPhi,
    }
}

impl ScoringConfig {
    /// Defaults to squared error when no functional is given.
    pub fn build(&self) -> Result<ScoringSpec> {
        let Some(name) = &self.functional else {
            if self.generator.is_some() || self.alpha.is_some() || self.nu.is_some() {
                return Err(Error::validation("scoring: functional is required"));
            }
            return Ok(ScoringSpec::squared_error());
        };
        let f = parse_functional(name, self.alpha, self.nu)?;
        let g = match &self.generator {
            Some(g) => parse_generator(g, self.slope)?,
            None => default_generator(&f),
        };
        ScoringSpec::new(f, g)
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<ThetaGrid> {
        if let Some(t) = &self.thresholds {
            return Ok(ThetaGrid::Explicit {
                thresholds: t.clone(),
            });
        }
        let points = self.points.unwrap_or(501);
        if points < 2 {
            return Err(Error::validation("grid needs at least two points"));
        }
        match (self.lower, self.upper) {
            (Some(lower), Some(upper)) => Ok(ThetaGrid::Range {
                lower,
                upper,
                points,
            }),
            (None, None) => Ok(ThetaGrid::Data {
                points,
                pad: self.pad.unwrap_or(0.05),
            }),
            _ => Err(Error::validation(
                "grid: give both lower and upper, or neither",
            )),
        }
    }
}

impl CiConfig {
    pub fn build(&self, seed: u64) -> Result<CiMethod> {
        match self.method.as_deref().unwrap_or("normal") {
            "normal" => Ok(CiMethod::Normal),
            "bootstrap" => Ok(CiMethod::Bootstrap {
                resamples: self.resamples.unwrap_or(10_000),
                seed,
            }),
            other => Err(Error::validation(format!(
                "unknown CI method '{other}' (normal, bootstrap)"
            ))),
        }
    }
}
