//! CRPS and threshold-weighted CRPS for step-function predictive CDFs.
//!
//! `CRPS(F, y) = ∫ (F(z) - 1{y <= z})² dz` and, for a weight `χ_j`,
//! `CRPS_j(F, y) = ∫ (F(z) - 1{y <= z})² χ_j(z) dz`. For a step CDF the
//! integrand is constant between consecutive breakpoints (and `y`), so both are
//! computed by exact summation; the weighted pieces only need `∫ χ_j`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, QuadratureOptions};
use crate::partition::PartitionOfUnity;

/// A right-continuous step CDF: `F(z) = cdf_values[k]` on
/// `[breakpoints[k], breakpoints[k + 1])` and 0 left of the first breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCDF {
    breakpoints: Vec<f64>,
    cdf_values: Vec<f64>,
}

/// Slack allowed when checking that the last CDF value is one.
const CDF_END_TOLERANCE: f64 = 1e-12;

impl EmpiricalCDF {
    pub fn new(breakpoints: Vec<f64>, mut cdf_values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != cdf_values.len() {
            return Err(Error::validation(
                "CDF needs equally many (>= 1) breakpoints and values",
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::validation("CDF breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "CDF breakpoints must be strictly ascending",
            ));
        }
        if cdf_values.iter().any(|v| !(0.0..=1.0).contains(v))
            || cdf_values.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::validation(
                "CDF values must be nondecreasing within [0, 1]",
            ));
        }
        let last = cdf_values.last_mut().expect("nonempty");
        if (*last - 1.0).abs() > CDF_END_TOLERANCE {
            return Err(Error::validation(format!(
                "CDF ends at {last}, leaving unbounded tail mass"
            )));
        }
        *last = 1.0;
        Ok(EmpiricalCDF {
            breakpoints,
            cdf_values,
        })
    }

    /// The empirical CDF of equally weighted ensemble members.
    pub fn from_members(members: &[f64]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::validation("ensemble has no members"));
        }
        if members.iter().any(|m| !m.is_finite()) {
            return Err(Error::validation("ensemble members must be finite"));
        }
        let mut sorted = members.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut breakpoints = Vec::new();
        let mut cdf_values = Vec::new();
        for (i, m) in sorted.iter().enumerate() {
            if i + 1 < n && sorted[i + 1] == *m {
                continue;
            }
            breakpoints.push(*m);
            cdf_values.push((i + 1) as f64 / n as f64);
        }
        Ok(EmpiricalCDF {
            breakpoints,
            cdf_values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf_values
    }

    pub fn eval(&self, z: f64) -> f64 {
        let k = self.breakpoints.partition_point(|b| *b <= z);
        if k == 0 {
            0.0
        } else {
            self.cdf_values[k - 1]
        }
    }

    /// Pieces `(lo, hi, value)` on which `F(z) - 1{y <= z}` is constant and
    /// nonzero-length, covering its support.
    fn pieces(&self, y: f64) -> Vec<(f64, f64, f64)> {
        let mut points = self.breakpoints.clone();
        points.push(y);
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
            .windows(2)
            .map(|w| {
                let v = self.eval(w[0]) - if y <= w[0] { 1.0 } else { 0.0 };
                (w[0], w[1], v)
            })
            .filter(|(_, _, v)| *v != 0.0)
            .collect()
    }
}

/// `CRPS(F, y)`.
pub fn crps(f: &EmpiricalCDF, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::validation(format!("observation {y} is not finite")));
    }
    let parts: Vec<f64> = f
        .pieces(y)
        .into_iter()
        .map(|(lo, hi, v)| v * v * (hi - lo))
        .collect();
    Ok(pairwise_sum(&parts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrpsDecomposition {
    pub per_component: Vec<f64>,
    pub total: f64,
}

/// `CRPS_j(F, y)` for each weight of `p`, with `total = CRPS(F, y)`.
pub fn crps_decomposed(
    f: &EmpiricalCDF,
    y: f64,
    p: &PartitionOfUnity,
) -> Result<CrpsDecomposition> {
    crps_decomposed_with(f, y, p, QuadratureOptions::default())
}

pub fn crps_decomposed_with(
    f: &EmpiricalCDF,
    y: f64,
    p: &PartitionOfUnity,
    opts: QuadratureOptions,
) -> Result<CrpsDecomposition> {
    p.domain.check(y)?;
    let total = crps(f, y)?;
    let pieces = f.pieces(y);
    let mut per_component = Vec::with_capacity(p.len());
    for w in &p.weights {
        let mut parts = Vec::with_capacity(pieces.len());
        for (lo, hi, v) in &pieces {
            let (lo, hi) = (lo.max(p.domain.lower), hi.min(p.domain.upper));
            if hi > lo {
                parts.push(v * v * w.integral(lo, hi, opts)?);
            }
        }
        per_component.push(pairwise_sum(&parts));
    }
    Ok(CrpsDecomposition {
        per_component,
        total,
    })
}

/// An ensemble forecast with its observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCase {
    pub case_id: String,
    pub observation: f64,
    pub members: Vec<f64>,
}

/// [`crps_decomposed`] for many cases, in parallel, preserving order.
pub fn crps_cases(cases: &[EnsembleCase], p: &PartitionOfUnity) -> Result<Vec<CrpsDecomposition>> {
    cases
        .par_iter()
        .map(|c| {
            let f = EmpiricalCDF::from_members(&c.members)?;
            crps_decomposed(&f, c.observation, p)
        })
        .collect()
}
