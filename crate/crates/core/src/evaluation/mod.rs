//! Batch scoring, paired comparison, synthetic data and hedging simulation.

pub mod compare;
pub mod hedging;
pub mod synthetic;

use serde::Serialize;

use crate::decomposition::{build_decomposition, score_cases};
use crate::error::{Error, Result};
use crate::numeric::{fmt_num, mean, round_sig, OUTPUT_DIGITS};
use crate::partition::PartitionOfUnity;
use crate::scoring::{ForecastCase, ScoringSpec};

pub use compare::{compare, CiMethod, CompareOptions, ComparisonReport, ComparisonRow};
pub use hedging::{hedging_study, simulate_hedging, HedgingConfig, HedgingOption, HedgingReport};
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticData};

/// Per-case total and component scores, rounded to the output precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub cases: Vec<ForecastCase>,
    pub totals: Vec<f64>,
    /// `components[j][i]` for component `j`, case `i`.
    pub components: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub n_cases: usize,
    pub mean_total: f64,
    pub mean_components: Vec<f64>,
}

pub fn score_table(
    cases: &[ForecastCase],
    spec: &ScoringSpec,
    p: &PartitionOfUnity,
) -> Result<ScoreTable> {
    if cases.is_empty() {
        return Err(Error::validation("no cases"));
    }
    let gens = build_decomposition(spec, p)?;
    let scores = score_cases(&gens, spec, cases)?;
    let r = |v: f64| round_sig(v, OUTPUT_DIGITS);
    Ok(ScoreTable {
        cases: cases.to_vec(),
        totals: scores.iter().map(|s| r(s.total)).collect(),
        components: (0..p.len())
            .map(|j| scores.iter().map(|s| r(s.per_component[j])).collect())
            .collect(),
    })
}

impl ScoreTable {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["case_id", "forecast", "obs", "total"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend((1..=self.components.len()).map(|j| format!("component_{j}")));
        h
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        self.cases
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut row = vec![
                    c.case_id.clone(),
                    fmt_num(c.forecast),
                    fmt_num(c.observation),
                    fmt_num(self.totals[i]),
                ];
                row.extend(self.components.iter().map(|col| fmt_num(col[i])));
                row
            })
            .collect()
    }

    /// Means of the rounded columns, so re-reading the written table
    /// reproduces them exactly.
    pub fn summary(&self) -> ScoreSummary {
        ScoreSummary {
            n_cases: self.cases.len(),
            mean_total: mean(&self.totals),
            mean_components: self.components.iter().map(|c| mean(c)).collect(),
        }
    }
}
