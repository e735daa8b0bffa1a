//! Decomposition of a consistent score over a partition of unity.
//!
//! For weights `χ_j` summing to one, the generator splits as
//! `g_j(u) = ∫_{u_j}^u χ_j g'` and `φ_j(u) = ∫_{u_j}^u ∫_{v_j}^v χ_j φ''`, and
//! each family score decomposes as `S = Σ_j S_j` with `S_j` the family score
//! built from `g_j` or `φ_j`.
//!
//! Component scores are evaluated through the integral-remainder form of
//! each bracket, integrating `m = χ_j h` (`h = g'` or `φ''`) over the segment
//! between forecast and observation:
//!
//! * quantile: `|1{y<x} - α| ∫ m`
//! * expectile: `|1{y<x} - α| ∫ m(z) |z - y| dz`
//! * Huber: `½ ∫ m(z) min(|z - y|, ν) dz`
//!
//! These are algebraically the family formulas applied to `g_j` / `φ_j`, do not
//! depend on the anchors, and are exactly zero where the weight vanishes on
//! the segment. The value-level functions [`eval_g_j`], [`eval_phi_j`] and
//! [`eval_phi_prime_j`] expose the generators themselves.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{integrate_adaptive, interior_breaks, QuadratureOptions};
use crate::partition::{
    arctan_primitives, arctan_second_primitive, IntervalDomain, LinearPiece, PartitionOfUnity,
    WeightFunction,
};
use crate::scoring::{cap, ForecastCase, Functional, GeneratorRole, GeneratorSpec, ScoringSpec};

#[derive(Debug, Clone, Copy, Default)]
pub struct DecompositionOptions {
    pub quadrature: QuadratureOptions,
    /// Skip closed forms and exact piecewise integration.
    pub force_quadrature: bool,
}

/// One cubic piece of the running integrals of a piecewise-linear weight,
/// expanded around `origin`: `C(u) = ∫_{anchor}^u χ`, `D(u) = ∫_{anchor}^u C`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CubicSegment {
    origin: f64,
    c0: f64,
    d0: f64,
    w0: f64,
    slope: f64,
}

impl CubicSegment {
    fn cumulative(&self, u: f64) -> f64 {
        let h = u - self.origin;
        self.c0 + h * (self.w0 + 0.5 * self.slope * h)
    }

    fn double(&self, u: f64) -> f64 {
        let h = u - self.origin;
        self.d0 + h * (self.c0 + h * (0.5 * self.w0 + self.slope * h / 6.0))
    }
}

/// First and second running integrals of a piecewise-linear weight from an
/// anchor: piecewise quadratic and piecewise cubic respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    anchor: f64,
    knots: Vec<f64>,
    segments: Vec<CubicSegment>,
}

impl PiecewisePolynomial {
    /// `pieces` must tile the real line in order.
    pub fn from_pieces(pieces: &[LinearPiece], anchor: f64) -> Self {
        let knots: Vec<f64> = pieces[1..].iter().map(|p| p.lo).collect();
        let ia = knots.partition_point(|b| *b <= anchor);
        let mut segments = vec![
            CubicSegment {
                origin: 0.0,
                c0: 0.0,
                d0: 0.0,
                w0: 0.0,
                slope: 0.0,
            };
            pieces.len()
        ];
        segments[ia] = CubicSegment {
            origin: anchor,
            c0: 0.0,
            d0: 0.0,
            w0: pieces[ia].value_at(anchor),
            slope: pieces[ia].slope(),
        };
        for i in ia + 1..pieces.len() {
            let o = pieces[i].lo;
            segments[i] = CubicSegment {
                origin: o,
                c0: segments[i - 1].cumulative(o),
                d0: segments[i - 1].double(o),
                w0: pieces[i].value_at(o),
                slope: pieces[i].slope(),
            };
        }
        for i in (0..ia).rev() {
            let o = pieces[i].hi;
            segments[i] = CubicSegment {
                origin: o,
                c0: segments[i + 1].cumulative(o),
                d0: segments[i + 1].double(o),
                w0: pieces[i].value_at(o),
                slope: pieces[i].slope(),
            };
        }
        PiecewisePolynomial {
            anchor,
            knots,
            segments,
        }
    }

    fn segment(&self, u: f64) -> &CubicSegment {
        &self.segments[self.knots.partition_point(|b| *b <= u)]
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// `∫_{anchor}^u χ`.
    pub fn cumulative(&self, u: f64) -> f64 {
        self.segment(u).cumulative(u)
    }

    /// `∫_{anchor}^u ∫_{anchor}^v χ`.
    pub fn double(&self, u: f64) -> f64 {
        self.segment(u).double(u)
    }
}

/// Analytic running integrals of a weight from the anchor `u_j`.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Piecewise(PiecewisePolynomial),
    Arctan { upper: bool, a: f64, anchor: f64 },
}

impl ClosedForm {
    fn for_weight(weight: &WeightFunction, anchor: f64) -> Option<Self> {
        if let Some(pieces) = weight.linear_pieces() {
            return Some(ClosedForm::Piecewise(PiecewisePolynomial::from_pieces(
                &pieces, anchor,
            )));
        }
        match *weight {
            WeightFunction::ArctanUpper { a } => Some(ClosedForm::Arctan {
                upper: true,
                a,
                anchor,
            }),
            WeightFunction::ArctanLower { a } => Some(ClosedForm::Arctan {
                upper: false,
                a,
                anchor,
            }),
            _ => None,
        }
    }

    /// `C(u) = ∫_{u_j}^u χ`.
    pub fn cumulative(&self, u: f64) -> f64 {
        match self {
            ClosedForm::Piecewise(p) => p.cumulative(u),
            ClosedForm::Arctan { upper, a, anchor } => {
                arctan_primitives(*upper, u - a).0 - arctan_primitives(*upper, anchor - a).0
            }
        }
    }

    /// `D(u) = ∫_{u_j}^u C`.
    pub fn double(&self, u: f64) -> f64 {
        match self {
            ClosedForm::Piecewise(p) => p.double(u),
            ClosedForm::Arctan { upper, a, anchor } => {
                let (s0, _) = arctan_primitives(*upper, anchor - a);
                arctan_second_primitive(*upper, u - a)
                    - arctan_second_primitive(*upper, anchor - a)
                    - s0 * (u - anchor)
            }
        }
    }
}

/// The decomposed generator `g_j` or `φ_j` for one weight.
#[derive(Debug, Clone)]
pub struct DecomposedGenerator {
    pub base: GeneratorSpec,
    pub weight: WeightFunction,
    pub domain: IntervalDomain,
    pub anchor_u: f64,
    pub anchor_v: f64,
    /// Present when the base density is constant and the weight is
    /// piecewise linear or arctan.
    pub closed_form: Option<ClosedForm>,
    pub options: DecompositionOptions,
}

/// Default anchor: left end of the weight's support within the domain when
/// finite, otherwise 0 clamped into the domain.
pub fn default_anchor(weight: &WeightFunction, domain: &IntervalDomain) -> f64 {
    let left = match weight.support_left() {
        Some(a) => Some(a.max(domain.lower)),
        None => domain.lower.is_finite().then_some(domain.lower),
    };
    match left {
        Some(a) if a.is_finite() => a,
        _ => 0.0f64.clamp(domain.lower, domain.upper),
    }
}

impl DecomposedGenerator {
    pub fn new(
        base: GeneratorSpec,
        weight: WeightFunction,
        domain: IntervalDomain,
        options: DecompositionOptions,
    ) -> Result<Self> {
        let anchor = default_anchor(&weight, &domain);
        Self::with_anchors(base, weight, domain, anchor, anchor, options)
    }

    pub fn with_anchors(
        base: GeneratorSpec,
        weight: WeightFunction,
        domain: IntervalDomain,
        anchor_u: f64,
        anchor_v: f64,
        options: DecompositionOptions,
    ) -> Result<Self> {
        if !base.has_density() {
            let need = match base.role() {
                GeneratorRole::G => "a derivative g'",
                GeneratorRole::Phi => "a second derivative phi''",
            };
            return Err(Error::validation(format!(
                "generator {} needs {need} to be decomposed",
                base.name()
            )));
        }
        if !(anchor_u.is_finite() && anchor_v.is_finite()) {
            return Err(Error::validation("anchors must be finite"));
        }
        weight.validate()?;
        let closed_form = if options.force_quadrature || base.constant_density().is_none() {
            None
        } else {
            ClosedForm::for_weight(&weight, anchor_u)
        };
        Ok(DecomposedGenerator {
            base,
            weight,
            domain,
            anchor_u,
            anchor_v,
            closed_form,
            options,
        })
    }

    /// Mixing density `χ_j(θ) h(θ)`.
    pub fn density(&self, theta: f64) -> f64 {
        let w = self.weight.eval(theta);
        if w == 0.0 {
            return 0.0;
        }
        w * self.base.density(theta).unwrap_or(f64::NAN)
    }

    /// `∫_s^t m(z) k(z) dz` (`s <= t`), splitting at the kernel's kinks.
    fn moment(&self, s: f64, t: f64, kernel: &Kernel) -> Result<f64> {
        if s == t {
            return Ok(0.0);
        }
        let opts = self.options.quadrature;
        let density = self.base.constant_density();
        match density {
            Some(c) if !self.options.force_quadrature => {
                let mut edges = vec![s];
                edges.extend(interior_breaks(s, t, kernel.kinks()));
                edges.push(t);
                let mut acc = 0.0;
                for w in edges.windows(2) {
                    acc += self.weight.integrate_against_linear(
                        w[0],
                        w[1],
                        &|z| kernel.eval(z),
                        opts,
                    )?;
                }
                Ok(c * acc)
            }
            _ => {
                let mut breaks = self.weight.kinks();
                breaks.extend(kernel.kinks());
                integrate_adaptive(
                    |z| {
                        let w = self.weight.eval(z);
                        if w == 0.0 {
                            0.0
                        } else {
                            w * self.base.density(z).unwrap_or(f64::NAN) * kernel.eval(z)
                        }
                    },
                    s,
                    t,
                    &breaks,
                    opts,
                )
            }
        }
    }

    /// Signed `∫_a^b m`.
    fn signed_mass(&self, a: f64, b: f64) -> Result<f64> {
        if a <= b {
            self.moment(a, b, &Kernel::One)
        } else {
            Ok(-self.moment(b, a, &Kernel::One)?)
        }
    }

    /// `S_j(x, y)` for the given functional.
    pub fn component_score(&self, functional: &Functional, x: f64, y: f64) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        let (lo, hi) = (x.min(y), x.max(y));
        let side = |alpha: f64| if y < x { 1.0 - alpha } else { alpha };
        match *functional {
            Functional::Quantile { alpha } => Ok(side(alpha) * self.moment(lo, hi, &Kernel::One)?),
            Functional::Expectile { alpha } => {
                Ok(side(alpha) * self.moment(lo, hi, &Kernel::Distance { y })?)
            }
            Functional::HuberMean { nu } => {
                Ok(0.5 * self.moment(lo, hi, &Kernel::Capped { y, nu })?)
            }
        }
    }

    /// The family formula evaluated literally from `g_j`, `φ_j`, `φ_j'`.
    pub fn component_score_by_value(&self, functional: &Functional, x: f64, y: f64) -> Result<f64> {
        let ind = if y < x { 1.0 } else { 0.0 };
        match *functional {
            Functional::Quantile { alpha } => {
                Ok((ind - alpha) * (eval_g_j(self, x)? - eval_g_j(self, y)?))
            }
            Functional::Expectile { alpha } => {
                let b = eval_phi_j(self, y)?
                    - eval_phi_j(self, x)?
                    - eval_phi_prime_j(self, x)? * (y - x);
                Ok((ind - alpha).abs() * b)
            }
            Functional::HuberMean { nu } => {
                let k = cap(nu, x - y);
                let b = eval_phi_j(self, y)? - eval_phi_j(self, k + y)?
                    + k * eval_phi_prime_j(self, x)?;
                Ok(0.5 * b)
            }
        }
    }
}

/// Integration kernels of the three bracket forms.
enum Kernel {
    One,
    Distance { y: f64 },
    Capped { y: f64, nu: f64 },
}

impl Kernel {
    fn eval(&self, z: f64) -> f64 {
        match *self {
            Kernel::One => 1.0,
            Kernel::Distance { y } => (z - y).abs(),
            Kernel::Capped { y, nu } => (z - y).abs().min(nu),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match *self {
            Kernel::One => Vec::new(),
            Kernel::Distance { y } => vec![y],
            Kernel::Capped { y, nu } => vec![y - nu, y, y + nu],
        }
    }
}

/// One decomposed generator per weight of `p`.
pub fn build_decomposition(
    spec: &ScoringSpec,
    p: &PartitionOfUnity,
) -> Result<Vec<DecomposedGenerator>> {
    build_decomposition_with(spec, p, DecompositionOptions::default())
}

pub fn build_decomposition_with(
    spec: &ScoringSpec,
    p: &PartitionOfUnity,
    options: DecompositionOptions,
) -> Result<Vec<DecomposedGenerator>> {
    if p.is_empty() {
        return Err(Error::validation("partition has no weights"));
    }
    p.weights
        .iter()
        .map(|w| DecomposedGenerator::new(spec.generator().clone(), w.clone(), p.domain, options))
        .collect()
}

/// `g_j(u)`.
pub fn eval_g_j(dg: &DecomposedGenerator, u: f64) -> Result<f64> {
    dg.domain.check(u)?;
    match (&dg.closed_form, dg.base.constant_density()) {
        (Some(cf), Some(c)) => Ok(c * cf.cumulative(u)),
        _ => dg.signed_mass(dg.anchor_u, u),
    }
}

/// `φ_j'(u) = ∫_{v_j}^u χ_j φ''`.
pub fn eval_phi_prime_j(dg: &DecomposedGenerator, u: f64) -> Result<f64> {
    dg.domain.check(u)?;
    match (&dg.closed_form, dg.base.constant_density()) {
        (Some(cf), Some(c)) => Ok(c * (cf.cumulative(u) - cf.cumulative(dg.anchor_v))),
        _ => dg.signed_mass(dg.anchor_v, u),
    }
}

/// `φ_j(u) = ∫_{u_j}^u φ_j'`.
pub fn eval_phi_j(dg: &DecomposedGenerator, u: f64) -> Result<f64> {
    dg.domain.check(u)?;
    let uj = dg.anchor_u;
    match (&dg.closed_form, dg.base.constant_density()) {
        (Some(cf), Some(c)) => Ok(c * (cf.double(u) - cf.cumulative(dg.anchor_v) * (u - uj))),
        _ => {
            // (u - u_j) ∫_{v_j}^{u_j} m + ∫_{between u_j and u} m(z) |z - u| dz
            let offset = (u - uj) * dg.signed_mass(dg.anchor_v, uj)?;
            let inner = dg.moment(uj.min(u), uj.max(u), &Kernel::Distance { y: u })?;
            Ok(offset + inner)
        }
    }
}

/// Component scores and total for one forecast/observation pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposedScore {
    pub per_component: Vec<f64>,
    pub total: f64,
}

impl DecomposedScore {
    pub fn component_sum(&self) -> f64 {
        self.per_component.iter().sum()
    }
}

/// `S_j(x, y)` for every component; `total` is `S(x, y)` from the undecomposed
/// family formula.
pub fn score_decomposed(
    gens: &[DecomposedGenerator],
    spec: &ScoringSpec,
    x: f64,
    y: f64,
) -> Result<DecomposedScore> {
    if let Some(g) = gens.first() {
        g.domain.check(x)?;
        g.domain.check(y)?;
    }
    let per_component = gens
        .iter()
        .map(|g| g.component_score(spec.functional(), x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecomposedScore {
        per_component,
        total: spec.score(x, y),
    })
}

/// [`score_decomposed`] over many cases, in parallel, preserving case order.
pub fn score_cases(
    gens: &[DecomposedGenerator],
    spec: &ScoringSpec,
    cases: &[ForecastCase],
) -> Result<Vec<DecomposedScore>> {
    cases
        .par_iter()
        .map(|c| score_decomposed(gens, spec, c.forecast, c.observation))
        .collect()
}
