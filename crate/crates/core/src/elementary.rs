//! Elementary scores, mixing measures and Murphy curves.
//!
//! Every score of the three families is a mixture `S(x, y) = ∫ S_θ(x, y) dM(θ)`
//! of elementary scores with `dM = g' dθ` (quantiles) or `φ'' dθ` (expectiles
//! and Huber means), and `χ_j dM` for a decomposed component.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::{DecomposedGenerator, DecompositionOptions};
use crate::error::{Error, Result};
use crate::numeric::{
    fmt_num, integrate_composite_gl, interior_breaks, linspace, pairwise_sum, round_sig,
    OUTPUT_DIGITS,
};
use crate::partition::{IntervalDomain, WeightFunction};
use crate::scoring::{ForecastCase, Functional, GeneratorSpec, ScoringSpec};

/// `S_θ(x, y)`: nonzero only for `y <= θ < x` or `x <= θ < y`.
pub fn elementary_score(functional: &Functional, theta: f64, x: f64, y: f64) -> f64 {
    let below = y <= theta && theta < x;
    let above = x <= theta && theta < y;
    if !(below || above) {
        return 0.0;
    }
    match *functional {
        Functional::Quantile { alpha } => {
            if below {
                1.0 - alpha
            } else {
                alpha
            }
        }
        Functional::Expectile { alpha } => {
            let d = (y - theta).abs();
            if below {
                (1.0 - alpha) * d
            } else {
                alpha * d
            }
        }
        Functional::HuberMean { nu } => 0.5 * (y - theta).abs().min(nu),
    }
}

/// `dM(θ)`: the generator's density, optionally multiplied by a weight.
#[derive(Debug, Clone)]
pub struct MixingMeasure {
    generator: GeneratorSpec,
    weight: Option<WeightFunction>,
}

impl MixingMeasure {
    pub fn new(generator: GeneratorSpec, weight: Option<WeightFunction>) -> Result<Self> {
        if !generator.has_density() {
            return Err(Error::validation(format!(
                "generator {} has no density evaluator for its mixing measure",
                generator.name()
            )));
        }
        if let Some(w) = &weight {
            w.validate()?;
        }
        Ok(MixingMeasure { generator, weight })
    }

    pub fn density(&self, theta: f64) -> f64 {
        let w = self.weight.as_ref().map_or(1.0, |w| w.eval(theta));
        if w == 0.0 {
            return 0.0;
        }
        w * self.generator.density(theta).unwrap_or(f64::NAN)
    }

    /// Bounds outside of which the density vanishes (possibly infinite).
    pub fn support_hint(&self) -> (f64, f64) {
        match &self.weight {
            Some(WeightFunction::Rectangular { a, b }) => (*a, *b),
            Some(WeightFunction::Trapezoidal { a, d, .. }) => (*a, *d),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn kinks(&self) -> Vec<f64> {
        self.weight.as_ref().map_or_else(Vec::new, |w| w.kinks())
    }

    /// First probe point with a negative density, if any.
    pub fn check(&self, probes: &[f64]) -> Option<f64> {
        probes.iter().copied().find(|t| !(self.density(*t) >= 0.0))
    }
}

/// Composite Gauss-Legendre settings for [`verify_mixture`].
#[derive(Debug, Clone, Copy)]
pub struct MixtureGrid {
    /// Initial panels per smooth segment of the integrand.
    pub panels: usize,
    /// Panel counts are doubled up to this limit.
    pub max_panels: usize,
    /// Relative change between successive doublings accepted as converged.
    pub tolerance: f64,
}

impl Default for MixtureGrid {
    fn default() -> Self {
        MixtureGrid {
            panels: 16,
            max_panels: 4096,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureCheck {
    pub integral: f64,
    pub score: f64,
    pub residual: f64,
}

/// Integrates elementary scores against the mixing measure on the segment
/// between `x` and `y` and compares with the score (or the component score
/// when a weight is given).
pub fn verify_mixture(
    spec: &ScoringSpec,
    weight: Option<&WeightFunction>,
    x: f64,
    y: f64,
    grid: &MixtureGrid,
) -> Result<MixtureCheck> {
    let measure = MixingMeasure::new(spec.generator().clone(), weight.cloned())?;
    let score = match weight {
        None => spec.score(x, y),
        Some(w) => DecomposedGenerator::new(
            spec.generator().clone(),
            w.clone(),
            IntervalDomain::real_line(),
            DecompositionOptions::default(),
        )?
        .component_score(spec.functional(), x, y)?,
    };
    let (lo, hi) = (x.min(y), x.max(y));
    let integral = if lo == hi {
        0.0
    } else {
        let mut kinks = measure.kinks();
        kinks.push(y);
        if let Functional::HuberMean { nu } = spec.functional() {
            kinks.extend([y - nu, y + nu]);
        }
        let mut edges = vec![lo];
        edges.extend(interior_breaks(lo, hi, kinks));
        edges.push(hi);
        let f = |t: f64| {
            let m = measure.density(t);
            if m == 0.0 {
                0.0
            } else {
                elementary_score(spec.functional(), t, x, y) * m
            }
        };
        let mut panels = grid.panels.max(1);
        let mut coarse = integrate_composite_gl(f, &edges, panels);
        loop {
            panels *= 2;
            let fine = integrate_composite_gl(f, &edges, panels);
            let change = (fine - coarse).abs();
            if change <= grid.tolerance * fine.abs().max(1.0) {
                break fine;
            }
            if panels >= grid.max_panels {
                return Err(Error::Numeric {
                    message: "mixture integral did not settle".into(),
                    achieved: change,
                    requested: grid.tolerance,
                });
            }
            coarse = fine;
        }
    };
    Ok(MixtureCheck {
        integral,
        score,
        residual: (integral - score).abs(),
    })
}

/// How to choose the threshold grid of a Murphy curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaGrid {
    /// `points` equally spaced thresholds over the data range widened by
    /// `pad` times the range on each side.
    Data {
        points: usize,
        pad: f64,
    },
    Range {
        lower: f64,
        upper: f64,
        points: usize,
    },
    Explicit {
        thresholds: Vec<f64>,
    },
}

impl Default for ThetaGrid {
    fn default() -> Self {
        ThetaGrid::Data {
            points: 501,
            pad: 0.05,
        }
    }
}

impl ThetaGrid {
    pub fn thresholds(&self, systems: &[Vec<ForecastCase>]) -> Result<Vec<f64>> {
        let out = match self {
            ThetaGrid::Data { points, pad } => {
                let values = systems
                    .iter()
                    .flatten()
                    .flat_map(|c| [c.forecast, c.observation]);
                let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                    (l.min(v), h.max(v))
                });
                if !lo.is_finite() {
                    return Err(Error::validation("no cases"));
                }
                let range = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
                linspace(lo - pad * range, hi + pad * range, *points)
            }
            ThetaGrid::Range {
                lower,
                upper,
                points,
            } => linspace(*lower, *upper, *points),
            ThetaGrid::Explicit { thresholds } => thresholds.clone(),
        };
        if out.is_empty()
            || out.windows(2).any(|w| w[0] >= w[1])
            || out.iter().any(|t| !t.is_finite())
        {
            return Err(Error::validation(
                "threshold grid must be nonempty, finite and strictly ascending",
            ));
        }
        Ok(out)
    }
}

/// Mean elementary scores per system over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MurphyCurve {
    pub functional: Functional,
    pub weight: Option<WeightFunction>,
    pub systems: Vec<String>,
    pub thresholds: Vec<f64>,
    /// `mean_scores[s][k]` for system `s` at `thresholds[k]`.
    pub mean_scores: Vec<Vec<f64>>,
}

pub fn murphy_curve(
    systems: &[(String, Vec<ForecastCase>)],
    functional: &Functional,
    grid: &ThetaGrid,
) -> Result<MurphyCurve> {
    functional.validate()?;
    if systems.is_empty() || systems.iter().any(|(_, c)| c.is_empty()) {
        return Err(Error::validation("no cases"));
    }
    let cases: Vec<Vec<ForecastCase>> = systems.iter().map(|(_, c)| c.clone()).collect();
    let thresholds = grid.thresholds(&cases)?;
    let per_theta: Vec<Vec<f64>> = thresholds
        .par_iter()
        .map(|theta| {
            cases
                .iter()
                .map(|cs| {
                    let scores: Vec<f64> = cs
                        .iter()
                        .map(|c| elementary_score(functional, *theta, c.forecast, c.observation))
                        .collect();
                    pairwise_sum(&scores) / scores.len() as f64
                })
                .collect()
        })
        .collect();
    let mean_scores = (0..cases.len())
        .map(|s| per_theta.iter().map(|row| row[s]).collect())
        .collect();
    Ok(MurphyCurve {
        functional: *functional,
        weight: None,
        systems: systems.iter().map(|(n, _)| n.clone()).collect(),
        thresholds,
        mean_scores,
    })
}

impl MurphyCurve {
    /// Records a weight in the curve's metadata (for the sidecar and
    /// [`MurphyCurve::weighted_area`] users).
    pub fn with_weight(mut self, weight: Option<WeightFunction>) -> Self {
        self.weight = weight;
        self
    }

    /// Trapezoidal `∫ S̄_θ dM(θ)` over the grid, per system.
    pub fn weighted_area(&self, measure: &MixingMeasure) -> Vec<f64> {
        let dens: Vec<f64> = self
            .thresholds
            .iter()
            .map(|t| measure.density(*t))
            .collect();
        self.mean_scores
            .iter()
            .map(|curve| {
                let parts: Vec<f64> = (1..self.thresholds.len())
                    .map(|k| {
                        let h = self.thresholds[k] - self.thresholds[k - 1];
                        0.5 * h * (curve[k - 1] * dens[k - 1] + curve[k] * dens[k])
                    })
                    .collect();
                pairwise_sum(&parts)
            })
            .collect()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["theta".to_string()];
        h.extend((1..=self.systems.len()).map(|i| format!("system_{i}_mean")));
        h
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::validation(format!("writing Murphy CSV: {e}"));
        w.write_record(self.csv_header()).map_err(io)?;
        for (k, t) in self.thresholds.iter().enumerate() {
            let mut row = vec![fmt_num(*t)];
            row.extend(self.mean_scores.iter().map(|c| fmt_num(c[k])));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "murphy csv".into(),
            source: e,
        })?;
        Ok(())
    }

    /// Metadata written next to the CSV.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "functional": self.functional,
            "weight": self.weight,
            "systems": self.systems,
            "columns": self.csv_header(),
            "thresholds": self.thresholds.len(),
            "digits": OUTPUT_DIGITS,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        let csv_path = dir.join(format!("{stem}.csv"));
        let file = std::fs::File::create(&csv_path).map_err(|e| Error::Io {
            path: csv_path.display().to_string(),
            source: e,
        })?;
        self.write_csv(file)?;
        let json_path = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&self.sidecar()).expect("serializable");
        std::fs::write(&json_path, text + "\n").map_err(|e| Error::Io {
            path: json_path.display().to_string(),
            source: e,
        })
    }

    /// Means rounded to the output precision.
    pub fn rounded(&self) -> Vec<Vec<f64>> {
        self.mean_scores
            .iter()
            .map(|c| c.iter().map(|v| round_sig(*v, OUTPUT_DIGITS)).collect())
            .collect()
    }
}
