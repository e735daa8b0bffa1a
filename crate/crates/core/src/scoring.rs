//! Consistent scoring functions for quantiles, expectiles and Huber means.
//!
//! Three families are covered, each parameterised by a generator:
//!
//! * `QSF(g, α)(x, y) = (1{y < x} - α)(g(x) - g(y))`, `g` nondecreasing;
//! * `ESF(φ, α)(x, y) = |1{y < x} - α| (φ(y) - φ(x) - φ'(x)(y - x))`, `φ` convex;
//! * `HSF(φ, ν)(x, y) = ½ (φ(y) - φ(κ_ν(x - y) + y) + κ_ν(x - y) φ'(x))`.
//!
//! The familiar scores are special cases: absolute error (`g(t) = 2t`, α = ½),
//! the pinball loss (`g(t) = t`), squared error (`φ(t) = 2t²`, α = ½) and the
//! Huber loss (`φ(t) = t²`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::linspace;

/// `κ_ν(x) = max(-ν, min(x, ν))`.
pub fn cap(nu: f64, x: f64) -> f64 {
    x.min(nu).max(-nu)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// The statistical functional a point forecast targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum Functional {
    Quantile { alpha: f64 },
    Expectile { alpha: f64 },
    HuberMean { nu: f64 },
}

impl Functional {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Functional::Quantile { alpha } | Functional::Expectile { alpha } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::validation(format!(
                        "alpha must lie in (0, 1), got {alpha}"
                    )));
                }
            }
            Functional::HuberMean { nu } => {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(Error::validation(format!("nu must be > 0, got {nu}")));
                }
            }
        }
        Ok(())
    }

    /// The generator role this functional's scoring family expects.
    pub fn generator_role(&self) -> GeneratorRole {
        match self {
            Functional::Quantile { .. } => GeneratorRole::G,
            _ => GeneratorRole::Phi,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Quantile { .. } => "quantile",
            Functional::Expectile { .. } => "expectile",
            Functional::HuberMean { .. } => "huber_mean",
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Quantile { alpha } => write!(f, "quantile(alpha={alpha})"),
            Functional::Expectile { alpha } => write!(f, "expectile(alpha={alpha})"),
            Functional::HuberMean { nu } => write!(f, "huber_mean(nu={nu})"),
        }
    }
}

/// Whether a generator plays the role of `g` (quantile family) or `φ`
/// (expectile and Huber families).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorRole {
    G,
    Phi,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied generator. `first` is `g'` or `φ'`; `second` is `φ''`.
#[derive(Clone)]
pub struct CustomGenerator {
    pub name: String,
    pub role: GeneratorRole,
    pub value: RealFn,
    pub first: Option<RealFn>,
    pub second: Option<RealFn>,
}

impl fmt::Debug for CustomGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGenerator")
            .field("name", &self.name)
            .field("role", &self.role)
            .field("first", &self.first.is_some())
            .field("second", &self.second.is_some())
            .finish()
    }
}

impl CustomGenerator {
    pub fn g(name: impl Into<String>, value: RealFn, derivative: Option<RealFn>) -> Self {
        CustomGenerator {
            name: name.into(),
            role: GeneratorRole::G,
            value,
            first: derivative,
            second: None,
        }
    }

    pub fn phi(
        name: impl Into<String>,
        value: RealFn,
        derivative: RealFn,
        second: Option<RealFn>,
    ) -> Self {
        CustomGenerator {
            name: name.into(),
            role: GeneratorRole::Phi,
            value,
            first: Some(derivative),
            second,
        }
    }
}

/// A generator `g` or `φ` for one of the scoring families.
#[derive(Debug, Clone)]
pub enum GeneratorSpec {
    /// `g(t) = t`
    IdentityG,
    /// `g(t) = slope * t`, slope > 0
    LinearG {
        slope: f64,
    },
    /// `φ(t) = t²`
    QuadraticPhi,
    /// `φ(t) = 2t²`
    ScaledQuadraticPhi,
    Custom(CustomGenerator),
}

impl PartialEq for GeneratorSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GeneratorSpec::IdentityG, GeneratorSpec::IdentityG)
            | (GeneratorSpec::QuadraticPhi, GeneratorSpec::QuadraticPhi)
            | (GeneratorSpec::ScaledQuadraticPhi, GeneratorSpec::ScaledQuadraticPhi) => true,
            (GeneratorSpec::LinearG { slope: a }, GeneratorSpec::LinearG { slope: b }) => a == b,
            (GeneratorSpec::Custom(a), GeneratorSpec::Custom(b)) => Arc::ptr_eq(&a.value, &b.value),
            _ => false,
        }
    }
}

/// Probe points used to check monotonicity / convexity of custom generators.
const GENERATOR_PROBES: usize = 2001;
const GENERATOR_PROBE_RANGE: (f64, f64) = (-100.0, 100.0);

impl GeneratorSpec {
    pub fn role(&self) -> GeneratorRole {
        match self {
            GeneratorSpec::IdentityG | GeneratorSpec::LinearG { .. } => GeneratorRole::G,
            GeneratorSpec::QuadraticPhi | GeneratorSpec::ScaledQuadraticPhi => GeneratorRole::Phi,
            GeneratorSpec::Custom(c) => c.role,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GeneratorSpec::IdentityG => "identity_g".into(),
            GeneratorSpec::LinearG { slope } => format!("linear_g({slope})"),
            GeneratorSpec::QuadraticPhi => "quadratic_phi".into(),
            GeneratorSpec::ScaledQuadraticPhi => "scaled_quadratic_phi".into(),
            GeneratorSpec::Custom(c) => format!("custom({})", c.name),
        }
    }

    /// `g'` (for `g`) or `φ''` (for `φ`) when it is a known constant.
    pub fn constant_density(&self) -> Option<f64> {
        match self {
            GeneratorSpec::IdentityG => Some(1.0),
            GeneratorSpec::LinearG { slope } => Some(*slope),
            GeneratorSpec::QuadraticPhi => Some(2.0),
            GeneratorSpec::ScaledQuadraticPhi => Some(4.0),
            GeneratorSpec::Custom(_) => None,
        }
    }

    /// The mixing density: `g'(θ)` for a `g`, `φ''(θ)` for a `φ`.
    pub fn density(&self, theta: f64) -> Option<f64> {
        if let Some(c) = self.constant_density() {
            return Some(c);
        }
        match self {
            GeneratorSpec::Custom(c) => match c.role {
                GeneratorRole::G => c.first.as_ref().map(|f| f(theta)),
                GeneratorRole::Phi => c.second.as_ref().map(|f| f(theta)),
            },
            _ => unreachable!(),
        }
    }

    pub fn has_density(&self) -> bool {
        match self {
            GeneratorSpec::Custom(c) => match c.role {
                GeneratorRole::G => c.first.is_some(),
                GeneratorRole::Phi => c.second.is_some(),
            },
            _ => true,
        }
    }

    /// `c` in `φ(t) = c t²` for the quadratic kinds.
    fn quadratic_coefficient(&self) -> Option<f64> {
        match self {
            GeneratorSpec::QuadraticPhi => Some(1.0),
            GeneratorSpec::ScaledQuadraticPhi => Some(2.0),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::LinearG { slope } if !(*slope > 0.0 && slope.is_finite()) => Err(
                Error::validation(format!("linear g needs slope > 0, got {slope}")),
            ),
            GeneratorSpec::Custom(c) => validate_custom(c),
            _ => Ok(()),
        }
    }
}

fn validate_custom(c: &CustomGenerator) -> Result<()> {
    let probes = linspace(
        GENERATOR_PROBE_RANGE.0,
        GENERATOR_PROBE_RANGE.1,
        GENERATOR_PROBES,
    );
    match c.role {
        GeneratorRole::G => {
            if let Some(d) = &c.first {
                if let Some(t) = probes.iter().find(|t| !(d(**t) >= 0.0)) {
                    return Err(Error::validation(format!(
                        "custom g '{}' has negative derivative at t = {t}",
                        c.name
                    )));
                }
            } else if let Some(w) = probes
                .windows(2)
                .find(|w| (c.value)(w[1]) < (c.value)(w[0]))
            {
                return Err(Error::validation(format!(
                    "custom g '{}' decreases between {} and {}",
                    c.name, w[0], w[1]
                )));
            }
        }
        GeneratorRole::Phi => {
            if c.first.is_none() {
                return Err(Error::validation(format!(
                    "custom phi '{}' needs a derivative evaluator",
                    c.name
                )));
            }
            if let Some(d2) = &c.second {
                if let Some(t) = probes.iter().find(|t| !(d2(**t) >= 0.0)) {
                    return Err(Error::validation(format!(
                        "custom phi '{}' has negative second derivative at t = {t}",
                        c.name
                    )));
                }
            } else {
                for w in probes.windows(3) {
                    let v = [(c.value)(w[0]), (c.value)(w[1]), (c.value)(w[2])];
                    let second = v[0] - 2.0 * v[1] + v[2];
                    let scale = v.iter().map(|x| x.abs()).fold(1.0, f64::max);
                    if second < -1e-9 * scale {
                        return Err(Error::validation(format!(
                            "custom phi '{}' is not convex near t = {}",
                            c.name, w[1]
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The operations the scoring families need from a generator. The bracket
/// methods default to the textbook formulas; implementations override them
/// with algebraically identical but better-conditioned evaluations.
pub trait Generator {
    fn value(&self, u: f64) -> f64;

    /// `g'` or `φ'`.
    fn derivative(&self, u: f64) -> f64;

    /// `g(x) - g(y)`.
    fn increment(&self, x: f64, y: f64) -> f64 {
        self.value(x) - self.value(y)
    }

    /// `φ(y) - φ(x) - φ'(x)(y - x)`.
    fn bregman(&self, x: f64, y: f64) -> f64 {
        self.value(y) - self.value(x) - self.derivative(x) * (y - x)
    }

    /// `φ(y) - φ(κ_ν(x - y) + y) + κ_ν(x - y) φ'(x)`.
    fn huber_bracket(&self, x: f64, y: f64, nu: f64) -> f64 {
        let k = cap(nu, x - y);
        self.value(y) - self.value(k + y) + k * self.derivative(x)
    }
}

impl Generator for GeneratorSpec {
    fn value(&self, u: f64) -> f64 {
        match self {
            GeneratorSpec::IdentityG => u,
            GeneratorSpec::LinearG { slope } => slope * u,
            GeneratorSpec::QuadraticPhi => u * u,
            GeneratorSpec::ScaledQuadraticPhi => 2.0 * u * u,
            GeneratorSpec::Custom(c) => (c.value)(u),
        }
    }

    fn derivative(&self, u: f64) -> f64 {
        match self {
            GeneratorSpec::IdentityG => 1.0,
            GeneratorSpec::LinearG { slope } => *slope,
            GeneratorSpec::QuadraticPhi => 2.0 * u,
            GeneratorSpec::ScaledQuadraticPhi => 4.0 * u,
            GeneratorSpec::Custom(c) => c.first.as_ref().map_or(f64::NAN, |f| f(u)),
        }
    }

    fn increment(&self, x: f64, y: f64) -> f64 {
        match self {
            GeneratorSpec::IdentityG => x - y,
            GeneratorSpec::LinearG { slope } => slope * (x - y),
            _ => self.value(x) - self.value(y),
        }
    }

    fn bregman(&self, x: f64, y: f64) -> f64 {
        match self.quadratic_coefficient() {
            // c y² - c x² - 2 c x (y - x) = c (y - x)²
            Some(c) => c * (y - x) * (y - x),
            None => self.value(y) - self.value(x) - self.derivative(x) * (y - x),
        }
    }

    fn huber_bracket(&self, x: f64, y: f64, nu: f64) -> f64 {
        let d = x - y;
        let k = cap(nu, d);
        match self.quadratic_coefficient() {
            // c [y² - (y + k)² + 2 k x] = c k (2d - k)
            Some(c) => c * k * (2.0 * d - k),
            None => self.value(y) - self.value(k + y) + k * self.derivative(x),
        }
    }
}

/// `QSF(g, α)(x, y)`.
pub fn qsf<G: Generator + ?Sized>(g: &G, alpha: f64, x: f64, y: f64) -> f64 {
    (indicator(y < x) - alpha) * g.increment(x, y)
}

/// `ESF(φ, α)(x, y)`.
pub fn esf<G: Generator + ?Sized>(phi: &G, alpha: f64, x: f64, y: f64) -> f64 {
    (indicator(y < x) - alpha).abs() * phi.bregman(x, y)
}

/// `HSF(φ, ν)(x, y)`.
pub fn hsf<G: Generator + ?Sized>(phi: &G, nu: f64, x: f64, y: f64) -> f64 {
    0.5 * phi.huber_bracket(x, y, nu)
}

/// Applies the family formula of `functional` with generator `gen`.
pub fn family_score<G: Generator + ?Sized>(
    functional: &Functional,
    gen: &G,
    x: f64,
    y: f64,
) -> f64 {
    match *functional {
        Functional::Quantile { alpha } => qsf(gen, alpha, x, y),
        Functional::Expectile { alpha } => esf(gen, alpha, x, y),
        Functional::HuberMean { nu } => hsf(gen, nu, x, y),
    }
}

/// A validated scoring-family descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringSpec {
    functional: Functional,
    generator: GeneratorSpec,
}

impl ScoringSpec {
    pub fn new(functional: Functional, generator: GeneratorSpec) -> Result<Self> {
        functional.validate()?;
        generator.validate()?;
        if generator.role() != functional.generator_role() {
            return Err(Error::validation(format!(
                "{} scoring needs a {:?} generator, got {}",
                functional.name(),
                functional.generator_role(),
                generator.name()
            )));
        }
        Ok(ScoringSpec {
            functional,
            generator,
        })
    }

    /// `|x - y|`: QSF with `g(t) = 2t`, α = ½.
    pub fn absolute_error() -> Self {
        Self::new(
            Functional::Quantile { alpha: 0.5 },
            GeneratorSpec::LinearG { slope: 2.0 },
        )
        .expect("valid")
    }

    /// The standard α-quantile (pinball) score, `g(t) = t`.
    pub fn pinball(alpha: f64) -> Result<Self> {
        Self::new(Functional::Quantile { alpha }, GeneratorSpec::IdentityG)
    }

    /// `(x - y)²`: ESF with `φ(t) = 2t²`, α = ½.
    pub fn squared_error() -> Self {
        Self::new(
            Functional::Expectile { alpha: 0.5 },
            GeneratorSpec::ScaledQuadraticPhi,
        )
        .expect("valid")
    }

    /// The Huber loss: HSF with `φ(t) = t²`.
    pub fn huber_loss(nu: f64) -> Result<Self> {
        Self::new(Functional::HuberMean { nu }, GeneratorSpec::QuadraticPhi)
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    pub fn generator(&self) -> &GeneratorSpec {
        &self.generator
    }

    pub fn score(&self, x: f64, y: f64) -> f64 {
        family_score(&self.functional, &self.generator, x, y)
    }

    /// `E S(x, Y)` for `Y ~ dist`.
    pub fn expected_score(&self, dist: &DiscreteDistribution, x: f64) -> f64 {
        dist.support
            .iter()
            .zip(&dist.probs)
            .map(|(y, p)| p * self.score(x, *y))
            .sum()
    }
}

impl fmt::Display for ScoringSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} with {}", self.functional, self.generator.name())
    }
}

/// `S(x, y)` for a validated spec.
pub fn score(spec: &ScoringSpec, x: f64, y: f64) -> f64 {
    spec.score(x, y)
}

/// A forecast/observation pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastCase {
    pub case_id: String,
    pub forecast: f64,
    pub observation: f64,
}

impl ForecastCase {
    pub fn new(case_id: impl Into<String>, forecast: f64, observation: f64) -> Self {
        ForecastCase {
            case_id: case_id.into(),
            forecast,
            observation,
        }
    }
}

/// A distribution with finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Sorts the atoms and merges duplicates. Probabilities must be positive
    /// and sum to one within `1e-9`.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::validation(
                "distribution needs equally many (>= 1) atoms and probabilities",
            ));
        }
        if support.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::validation(
                "atoms must be finite and probabilities positive",
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut pairs: Vec<(f64, f64)> = support.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (y, p) in pairs {
            if support.last() == Some(&y) {
                *probs.last_mut().expect("nonempty") += p;
            } else {
                support.push(y);
                probs.push(p);
            }
        }
        Ok(DiscreteDistribution { support, probs })
    }

    pub fn uniform(support: Vec<f64>) -> Result<Self> {
        let n = support.len();
        Self::new(support, vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// A possibly set-valued functional value `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub lower: f64,
    pub upper: f64,
}

impl FunctionalValue {
    /// The lower endpoint.
    pub fn point(&self) -> f64 {
        self.lower
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }

    /// Distance from `x` to the set.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lower {
            self.lower - x
        } else if x > self.upper {
            x - self.upper
        } else {
            0.0
        }
    }
}

/// Tolerance for treating a quantile level or identification value as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// `{x : f(x) = 0}` for a nondecreasing, continuous, piecewise-linear `f`
/// whose kinks are among `knots` (sorted, with `f(first) <= 0 <= f(last)`).
/// Values within `tol` of zero at a knot count as zero.
fn piecewise_linear_root(f: impl Fn(f64) -> f64, knots: &[f64], tol: f64) -> FunctionalValue {
    let values: Vec<f64> = knots.iter().map(|k| f(*k)).collect();
    let k = values
        .iter()
        .position(|v| *v >= -tol)
        .unwrap_or(knots.len() - 1);
    if values[k] > tol && k > 0 {
        let (x0, x1, v0, v1) = (knots[k - 1], knots[k], values[k - 1], values[k]);
        let x = (x0 + (x1 - x0) * (-v0) / (v1 - v0)).clamp(x0, x1);
        return FunctionalValue { lower: x, upper: x };
    }
    let mut j = k;
    while j + 1 < knots.len() && values[j + 1].abs() <= tol {
        j += 1;
    }
    FunctionalValue {
        lower: knots[k],
        upper: knots[j],
    }
}

fn sorted_knots(mut knots: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    knots.retain(|k| *k >= lo && *k <= hi);
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
}

/// The functional of `dist` targeted by `spec`, computed directly from its
/// defining conditions: the generalised inverse for quantiles, the root of
/// the identification function for expectiles and Huber means.
pub fn functional_value(spec: &ScoringSpec, dist: &DiscreteDistribution) -> FunctionalValue {
    functional_value_of(spec.functional(), dist)
}

pub fn functional_value_of(
    functional: &Functional,
    dist: &DiscreteDistribution,
) -> FunctionalValue {
    let ys = &dist.support;
    let ps = &dist.probs;
    let lo = ys[0];
    let hi = ys[ys.len() - 1];
    match *functional {
        Functional::Quantile { alpha } => {
            let mut cdf = 0.0;
            for (k, (y, p)) in ys.iter().zip(ps).enumerate() {
                cdf += p;
                if cdf >= alpha - TIE_TOLERANCE {
                    let upper = if (cdf - alpha).abs() <= TIE_TOLERANCE && k + 1 < ys.len() {
                        ys[k + 1]
                    } else {
                        *y
                    };
                    return FunctionalValue { lower: *y, upper };
                }
            }
            FunctionalValue {
                lower: hi,
                upper: hi,
            }
        }
        Functional::Expectile { alpha } => {
            let ident = |x: f64| -> f64 {
                ys.iter()
                    .zip(ps)
                    .map(|(y, p)| p * (indicator(*y < x) - alpha).abs() * (x - y))
                    .sum()
            };
            let knots = sorted_knots(ys.clone(), lo, hi);
            let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
            let v = piecewise_linear_root(ident, &knots, TIE_TOLERANCE * scale);
            // The expectile is unique; a zero at a knot is reported as a point.
            FunctionalValue {
                lower: v.lower,
                upper: v.lower,
            }
        }
        Functional::HuberMean { nu } => {
            let ident =
                |x: f64| -> f64 { ys.iter().zip(ps).map(|(y, p)| p * cap(nu, x - y)).sum() };
            let knots = sorted_knots(ys.iter().flat_map(|y| [y - nu, y + nu]).collect(), lo, hi);
            piecewise_linear_root(ident, &knots, TIE_TOLERANCE * nu)
        }
    }
}
