//! Paired comparison of two forecast systems over the same cases.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{build_decomposition, score_cases, DecomposedScore};
use crate::error::{Error, Result};
use crate::numeric::{mean, pairwise_sum, sample_sd, sorted_quantile};
use crate::partition::PartitionOfUnity;
use crate::rng::{substream_rng, Stream};
use crate::scoring::{ForecastCase, ScoringSpec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Two-sided normal quantile for a 95% interval.
const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CiMethod {
    /// `d̄ ± 1.96 sd(d) / √n` on paired differences.
    Normal,
    /// Percentile interval of resampled mean differences.
    Bootstrap { resamples: usize, seed: u64 },
}

impl CiMethod {
    pub fn bootstrap(seed: u64) -> Self {
        CiMethod::Bootstrap {
            resamples: 10_000,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    /// `total` or `component_j` (1-based).
    pub label: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Mean of the paired differences `S(A) - S(B)`.
    pub difference: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinerRow {
    pub label: String,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub scoring: String,
    pub partition: PartitionOfUnity,
    pub ci: CiMethod,
    pub systems: [String; 2],
    pub n_cases: usize,
    pub rows: Vec<ComparisonRow>,
    /// Mean scores of the average forecast `(x_A + x_B) / 2`, when requested.
    pub combiner: Option<Vec<CombinerRow>>,
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub ci: CiMethod,
    pub combiner: bool,
    pub names: [String; 2],
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            ci: CiMethod::Normal,
            combiner: false,
            names: ["A".into(), "B".into()],
        }
    }
}

/// Orders `b` like `a` by case id, checking the pairing.
fn pair_cases<'a>(a: &[ForecastCase], b: &'a [ForecastCase]) -> Result<Vec<&'a ForecastCase>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::validation("no cases"));
    }
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "systems have {} and {} cases",
            a.len(),
            b.len()
        )));
    }
    let mut by_id: HashMap<&str, &ForecastCase> = HashMap::with_capacity(b.len());
    for c in b {
        if by_id.insert(c.case_id.as_str(), c).is_some() {
            return Err(Error::validation(format!(
                "duplicate case id '{}'",
                c.case_id
            )));
        }
    }
    let mut seen = std::collections::HashSet::with_capacity(a.len());
    a.iter()
        .map(|ca| {
            if !seen.insert(ca.case_id.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate case id '{}'",
                    ca.case_id
                )));
            }
            let cb = by_id.get(ca.case_id.as_str()).ok_or_else(|| {
                Error::validation(format!("case id '{}' has no partner", ca.case_id))
            })?;
            if cb.observation != ca.observation {
                return Err(Error::validation(format!(
                    "case '{}' has observations {} and {}",
                    ca.case_id, ca.observation, cb.observation
                )));
            }
            Ok(*cb)
        })
        .collect()
}

/// Columns of per-case values: total first, then each component.
fn columns(scores: &[DecomposedScore]) -> Vec<Vec<f64>> {
    let k = scores.first().map_or(0, |s| s.per_component.len());
    let mut cols = vec![scores.iter().map(|s| s.total).collect::<Vec<_>>()];
    for j in 0..k {
        cols.push(scores.iter().map(|s| s.per_component[j]).collect());
    }
    cols
}

fn labels(k: usize) -> Vec<String> {
    std::iter::once("total".to_string())
        .chain((1..=k).map(|j| format!("component_{j}")))
        .collect()
}

fn bootstrap_intervals(diffs: &[Vec<f64>], resamples: usize, seed: u64) -> Vec<(f64, f64)> {
    let n = diffs[0].len();
    let means: Vec<Vec<f64>> = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream_rng(seed, Stream::Bootstrap, r);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            diffs
                .iter()
                .map(|d| {
                    let picked: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
                    pairwise_sum(&picked) / n as f64
                })
                .collect()
        })
        .collect();
    (0..diffs.len())
        .map(|row| {
            let mut m: Vec<f64> = means.iter().map(|v| v[row]).collect();
            m.sort_by(f64::total_cmp);
            (sorted_quantile(&m, 0.025), sorted_quantile(&m, 0.975))
        })
        .collect()
}

/// Paired comparison of `a` against `b` (differences are `A - B`).
pub fn compare(
    a: &[ForecastCase],
    b: &[ForecastCase],
    spec: &ScoringSpec,
    p: &PartitionOfUnity,
    options: &CompareOptions,
) -> Result<ComparisonReport> {
    let b_paired: Vec<ForecastCase> = pair_cases(a, b)?.into_iter().cloned().collect();
    let n = a.len();
    if n < 2 {
        return Err(Error::validation(
            "a confidence interval needs at least two paired cases",
        ));
    }
    let gens = build_decomposition(spec, p)?;
    let cols_a = columns(&score_cases(&gens, spec, a)?);
    let cols_b = columns(&score_cases(&gens, spec, &b_paired)?);
    let diffs: Vec<Vec<f64>> = cols_a
        .iter()
        .zip(&cols_b)
        .map(|(ca, cb)| ca.iter().zip(cb).map(|(x, y)| x - y).collect())
        .collect();
    let intervals: Vec<(f64, f64)> = match options.ci {
        CiMethod::Normal => diffs
            .iter()
            .map(|d| {
                let m = mean(d);
                let half = Z_95 * sample_sd(d) / (n as f64).sqrt();
                (m - half, m + half)
            })
            .collect(),
        CiMethod::Bootstrap { resamples, seed } => {
            if resamples < 2 {
                return Err(Error::validation("bootstrap needs at least two resamples"));
            }
            bootstrap_intervals(&diffs, resamples, seed)
        }
    };
    let rows = labels(cols_a.len() - 1)
        .into_iter()
        .enumerate()
        .map(|(r, label)| ComparisonRow {
            label,
            mean_a: mean(&cols_a[r]),
            mean_b: mean(&cols_b[r]),
            difference: mean(&diffs[r]),
            ci_lower: intervals[r].0,
            ci_upper: intervals[r].1,
        })
        .collect();
    let combiner = if options.combiner {
        let avg: Vec<ForecastCase> = a
            .iter()
            .zip(&b_paired)
            .map(|(ca, cb)| {
                ForecastCase::new(
                    ca.case_id.clone(),
                    0.5 * (ca.forecast + cb.forecast),
                    ca.observation,
                )
            })
            .collect();
        let cols = columns(&score_cases(&gens, spec, &avg)?);
        Some(
            labels(cols.len() - 1)
                .into_iter()
                .zip(&cols)
                .map(|(label, c)| CombinerRow {
                    label,
                    mean: mean(c),
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scoring: spec.to_string(),
        partition: p.clone(),
        ci: options.ci,
        systems: options.names.clone(),
        n_cases: n,
        rows,
        combiner,
    })
}

impl ComparisonReport {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Aligned text table with two decimals.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scoring: {}", self.scoring);
        let _ = writeln!(out, "cases:   {}", self.n_cases);
        let _ = writeln!(
            out,
            "{:<14}{:>10}{:>10}{:>12}  {:<20}",
            "",
            format!("mean {}", self.systems[0]),
            format!("mean {}", self.systems[1]),
            "difference",
            "95% CI"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<14}{:>10.2}{:>10.2}{:>12.2}  ({:.2}, {:.2})",
                r.label, r.mean_a, r.mean_b, r.difference, r.ci_lower, r.ci_upper
            );
        }
        if let Some(c) = &self.combiner {
            for r in c {
                let _ = writeln!(out, "{:<14}{:>10.2}  (average forecast)", r.label, r.mean);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_rectangular_partition, IntervalDomain};

    fn split() -> PartitionOfUnity {
        make_rectangular_partition(IntervalDomain::real_line(), &[10.0]).unwrap()
    }

    fn cases(fc: &[(f64, f64)]) -> Vec<ForecastCase> {
        fc.iter()
            .enumerate()
            .map(|(i, (x, y))| ForecastCase::new(format!("c{i}"), *x, *y))
            .collect()
    }

    #[test]
    fn identical_systems_have_zero_difference() {
        let a = cases(&[(1.0, 2.0), (12.0, 8.0), (15.0, 20.0)]);
        let r = compare(
            &a,
            &a,
            &ScoringSpec::squared_error(),
            &split(),
            &CompareOptions::default(),
        )
        .unwrap();
        for row in &r.rows {
            assert_eq!(row.difference, 0.0);
            assert_eq!((row.ci_lower, row.ci_upper), (0.0, 0.0));
        }
    }

    #[test]
    fn two_case_normal_interval() {
        // Squared errors: A = {1, 9}, B = {4, 4}; d = {-3, 5}, mean 1, sd √32.
        let a = cases(&[(1.0, 0.0), (3.0, 0.0)]);
        let b = cases(&[(2.0, 0.0), (2.0, 0.0)]);
        let p = PartitionOfUnity::trivial(IntervalDomain::real_line());
        let r = compare(
            &a,
            &b,
            &ScoringSpec::squared_error(),
            &p,
            &CompareOptions::default(),
        )
        .unwrap();
        let t = r.row("total").unwrap();
        let half = 1.96 * 32f64.sqrt() / 2f64.sqrt();
        assert_eq!(t.difference, 1.0);
        assert!((t.ci_lower - (1.0 - half)).abs() < 1e-12);
        assert!((t.ci_upper - (1.0 + half)).abs() < 1e-12);
    }

    #[test]
    fn swapping_systems_negates_differences() {
        let a = cases(&[(1.0, 2.0), (12.0, 8.0), (15.0, 20.0), (3.0, 9.5)]);
        let b = cases(&[(0.0, 2.0), (11.0, 8.0), (25.0, 20.0), (4.0, 9.5)]);
        let spec = ScoringSpec::squared_error();
        let ab = compare(&a, &b, &spec, &split(), &CompareOptions::default()).unwrap();
        let ba = compare(&b, &a, &spec, &split(), &CompareOptions::default()).unwrap();
        for (x, y) in ab.rows.iter().zip(&ba.rows) {
            assert_eq!(x.difference, -y.difference);
        }
    }

    #[test]
    fn pairing_is_by_case_id() {
        let a = cases(&[(1.0, 2.0), (12.0, 8.0)]);
        let mut b = a.clone();
        b.reverse();
        let r = compare(
            &a,
            &b,
            &ScoringSpec::squared_error(),
            &split(),
            &CompareOptions::default(),
        )
        .unwrap();
        assert_eq!(r.row("total").unwrap().difference, 0.0);
        let mut c = a.clone();
        c[0].case_id = "other".into();
        assert!(compare(
            &a,
            &c,
            &ScoringSpec::squared_error(),
            &split(),
            &CompareOptions::default()
        )
        .is_err());
    }

    #[test]
    fn component_means_add_up() {
        let a = cases(&[(1.0, 2.0), (12.0, 8.0), (15.0, 20.0), (3.0, 9.5)]);
        let b = cases(&[(0.0, 2.0), (11.0, 8.0), (25.0, 20.0), (4.0, 9.5)]);
        let r = compare(
            &a,
            &b,
            &ScoringSpec::squared_error(),
            &split(),
            &CompareOptions::default(),
        )
        .unwrap();
        let comp: f64 = r.rows[1..].iter().map(|x| x.mean_a).sum();
        assert!((comp - r.rows[0].mean_a).abs() < 1e-9);
    }

    #[test]
    fn bootstrap_is_seeded_and_brackets_difference() {
        let a = cases(&[
            (1.0, 2.0),
            (12.0, 8.0),
            (15.0, 20.0),
            (3.0, 9.5),
            (7.0, 7.5),
        ]);
        let b = cases(&[
            (0.0, 2.0),
            (11.0, 8.0),
            (25.0, 20.0),
            (4.0, 9.5),
            (6.0, 7.5),
        ]);
        let opts = CompareOptions {
            ci: CiMethod::Bootstrap {
                resamples: 2000,
                seed: 3,
            },
            combiner: true,
            ..Default::default()
        };
        let spec = ScoringSpec::squared_error();
        let r1 = compare(&a, &b, &spec, &split(), &opts).unwrap();
        let r2 = compare(&a, &b, &spec, &split(), &opts).unwrap();
        assert_eq!(r1, r2);
        let t = r1.row("total").unwrap();
        assert!(t.ci_lower <= t.difference && t.difference <= t.ci_upper);
        assert!(r1.combiner.is_some());
        assert!(r1.render_text().contains("component_2"));
    }
}
