//! Weight functions and partitions of unity on an interval of the real line.
//!
//! A partition of unity is a finite list of weights `χ_j` with `0 ≤ χ_j ≤ 1`
//! and `Σ_j χ_j(t) = 1` for every `t` in the outcome interval. Each weight
//! selects a region of the outcome space (the tail above a threshold, a band
//! in the centre, ...) and induces one summand in a score decomposition.
//!
//! Rectangular cells are half-open, `[a, b)`, so a value sitting on a
//! cutpoint belongs to the cell on its right.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate_adaptive, linspace, QuadratureOptions};

/// Tolerance on `|Σ χ_j - 1|` and on the `[0, 1]` range check.
pub const PARTITION_TOLERANCE: f64 = 1e-12;

/// Default number of probe points used by [`validate_partition`].
pub const DEFAULT_PROBE_POINTS: usize = 10_001;

/// Serde support for extended reals: finite values as numbers, infinities as
/// the strings `"inf"` / `"-inf"` (TOML's native `inf` literals are accepted too).
pub mod extended {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    struct ExtendedVisitor;

    impl Visitor<'_> for ExtendedVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            if v.is_nan() {
                return Err(E::custom("NaN is not a valid outcome value"));
            }
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => match other.parse::<f64>() {
                    Ok(x) if !x.is_nan() => Ok(x),
                    _ => Err(E::custom(format!("cannot read {v:?} as an extended real"))),
                },
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtendedVisitor)
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// The outcome interval `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalDomain {
    #[serde(with = "extended")]
    pub lower: f64,
    #[serde(with = "extended")]
    pub upper: f64,
    #[serde(default)]
    pub lower_closed: bool,
    #[serde(default)]
    pub upper_closed: bool,
}

impl IntervalDomain {
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Result<Self> {
        let d = IntervalDomain {
            lower,
            upper,
            lower_closed,
            upper_closed,
        };
        d.validate()?;
        Ok(d)
    }

    /// `(-∞, ∞)`.
    pub fn real_line() -> Self {
        IntervalDomain {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            lower_closed: false,
            upper_closed: false,
        }
    }

    /// `[lower, upper)`.
    pub fn half_open(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, lower.is_finite(), false)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_nan() || self.upper.is_nan() || self.lower >= self.upper {
            return Err(Error::validation(format!(
                "domain requires lower < upper, got {self}"
            )));
        }
        if (self.lower.is_infinite() && self.lower_closed)
            || (self.upper.is_infinite() && self.upper_closed)
        {
            return Err(Error::validation(format!(
                "infinite domain endpoints must be open, got {self}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, t: f64) -> bool {
        if t.is_nan() {
            return false;
        }
        let above = if self.lower_closed {
            t >= self.lower
        } else {
            t > self.lower
        };
        let below = if self.upper_closed {
            t <= self.upper
        } else {
            t < self.upper
        };
        above && below
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: t,
                domain: self.to_string(),
            })
        }
    }
}

impl Default for IntervalDomain {
    fn default() -> Self {
        Self::real_line()
    }
}

impl fmt::Display for IntervalDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            fmt_bound(self.lower),
            fmt_bound(self.upper),
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

/// A nonnegative building block for [`make_normalized_partition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum RawFunction {
    Constant {
        value: f64,
    },
    /// `max(0, slope * (t - origin))`
    Ramp {
        origin: f64,
        slope: f64,
    },
    /// `exp(-((t - center) / width)^2 / 2)`
    Gaussian {
        center: f64,
        width: f64,
    },
    /// Linear interpolation between breakpoints, flat beyond the ends.
    Tabulated {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl RawFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RawFunction::Constant { value } => *value,
            RawFunction::Ramp { origin, slope } => (slope * (t - origin)).max(0.0),
            RawFunction::Gaussian { center, width } => {
                let z = (t - center) / width;
                (-0.5 * z * z).exp()
            }
            RawFunction::Tabulated {
                breakpoints,
                values,
            } => interpolate_table(breakpoints, values, t),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RawFunction::Constant { value } if !(value.is_finite() && *value >= 0.0) => Err(
                Error::validation(format!("constant raw function must be >= 0, got {value}")),
            ),
            RawFunction::Ramp { origin, slope } if !(origin.is_finite() && slope.is_finite()) => {
                Err(Error::validation("ramp parameters must be finite"))
            }
            RawFunction::Gaussian { center, width }
                if !(center.is_finite() && width.is_finite() && *width > 0.0) =>
            {
                Err(Error::validation(
                    "gaussian requires finite center and width > 0",
                ))
            }
            RawFunction::Tabulated {
                breakpoints,
                values,
            } => {
                validate_table(breakpoints, values)?;
                if values.iter().any(|v| *v < 0.0) {
                    return Err(Error::validation("tabulated raw values must be >= 0"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            RawFunction::Ramp { origin, .. } => vec![*origin],
            RawFunction::Tabulated { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    fn params(&self) -> Vec<f64> {
        match self {
            RawFunction::Constant { .. } => Vec::new(),
            RawFunction::Ramp { origin, .. } => vec![*origin],
            RawFunction::Gaussian { center, width } => vec![center - width, center + width],
            RawFunction::Tabulated { breakpoints, .. } => breakpoints.clone(),
        }
    }
}

/// One weight function `χ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum WeightFunction {
    /// Indicator of `[a, b)`; either end may be infinite.
    Rectangular {
        #[serde(with = "extended")]
        a: f64,
        #[serde(with = "extended")]
        b: f64,
    },
    /// Ramp up on `[a, b)`, one on `[b, c)`, ramp down on `[c, d)`.
    /// `a = b` drops the left ramp, `c = d` the right one; `a = b = -inf`
    /// and `c = d = +inf` give half-trapezoids.
    Trapezoidal {
        #[serde(with = "extended")]
        a: f64,
        #[serde(with = "extended")]
        b: f64,
        #[serde(with = "extended")]
        c: f64,
        #[serde(with = "extended")]
        d: f64,
    },
    /// `1/2 + arctan(t - a)/π`
    ArctanUpper { a: f64 },
    /// `1 - (1/2 + arctan(t - a)/π)`
    ArctanLower { a: f64 },
    /// `ψ_i / Σ_k ψ_k` for `i = component_index`.
    Normalized {
        component_index: usize,
        raw_functions: Vec<RawFunction>,
    },
    /// Linear interpolation between breakpoints, flat beyond the ends.
    Tabulated {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A piece on which a weight is linear. Unbounded pieces are constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPiece {
    pub lo: f64,
    pub hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl LinearPiece {
    /// Value of the linear piece (the continuous extension onto its closure).
    pub fn value_at(&self, z: f64) -> f64 {
        if self.lo.is_infinite() || self.hi.is_infinite() || z <= self.lo {
            self.v_lo
        } else if z >= self.hi {
            self.v_hi
        } else {
            self.v_lo + (self.v_hi - self.v_lo) * (z - self.lo) / (self.hi - self.lo)
        }
    }

    pub fn slope(&self) -> f64 {
        if self.lo.is_infinite() || self.hi.is_infinite() {
            0.0
        } else {
            (self.v_hi - self.v_lo) / (self.hi - self.lo)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.v_lo == 0.0 && self.v_hi == 0.0
    }
}

fn validate_table(breakpoints: &[f64], values: &[f64]) -> Result<()> {
    if breakpoints.is_empty() || breakpoints.len() != values.len() {
        return Err(Error::validation(
            "tabulated weight needs equally many (>= 1) breakpoints and values",
        ));
    }
    if breakpoints.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::validation("tabulated entries must be finite"));
    }
    if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation(
            "tabulated breakpoints must be strictly ascending",
        ));
    }
    Ok(())
}

fn interpolate_table(breakpoints: &[f64], values: &[f64], t: f64) -> f64 {
    let n = breakpoints.len();
    if t <= breakpoints[0] {
        return values[0];
    }
    if t >= breakpoints[n - 1] {
        return values[n - 1];
    }
    let k = breakpoints.partition_point(|p| *p <= t);
    let (x0, x1) = (breakpoints[k - 1], breakpoints[k]);
    let (v0, v1) = (values[k - 1], values[k]);
    v0 + (v1 - v0) * (t - x0) / (x1 - x0)
}

/// Antiderivatives of `1/2 + arctan(u)/π` and of `u (1/2 + arctan(u)/π)`.
fn arctan_upper_primitives(u: f64) -> (f64, f64) {
    let at = u.atan();
    let pi = std::f64::consts::PI;
    let f0 = 0.5 * u + (u * at - 0.5 * (u * u).ln_1p()) / pi;
    let f1 = 0.25 * u * u + ((u * u + 1.0) * at - u) / (2.0 * pi);
    (f0, f1)
}

/// `(∫χ, ∫uχ)` antiderivatives in the shifted variable `u = t - a`.
pub(crate) fn arctan_primitives(upper: bool, u: f64) -> (f64, f64) {
    let (f0, f1) = arctan_upper_primitives(u);
    if upper {
        (f0, f1)
    } else {
        (u - f0, 0.5 * u * u - f1)
    }
}

/// Second antiderivative of the upper arctan weight, `∫∫ χ`, in `u = t - a`.
pub(crate) fn arctan_second_primitive(upper: bool, u: f64) -> f64 {
    let at = u.atan();
    let pi = std::f64::consts::PI;
    let up = 0.25 * u * u + (0.5 * (u * u - 1.0) * at + 0.5 * u - 0.5 * u * (u * u).ln_1p()) / pi;
    if upper {
        up
    } else {
        0.5 * u * u - up
    }
}

impl WeightFunction {
    pub fn rectangular(a: f64, b: f64) -> Result<Self> {
        let w = WeightFunction::Rectangular { a, b };
        w.validate()?;
        Ok(w)
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let w = WeightFunction::Trapezoidal { a, b, c, d };
        w.validate()?;
        Ok(w)
    }

    /// The weight `χ ≡ 1`.
    pub fn unit() -> Self {
        WeightFunction::Rectangular {
            a: f64::NEG_INFINITY,
            b: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFunction::Rectangular { a, b } => {
                if a.is_nan() || b.is_nan() || a >= b {
                    return Err(Error::validation(format!(
                        "rectangular requires a < b, got a={a}, b={b}"
                    )));
                }
            }
            WeightFunction::Trapezoidal { a, b, c, d } => {
                let ordered = a <= b && b <= c && c <= d && a < d;
                if !ordered || [a, b, c, d].iter().any(|v| v.is_nan()) {
                    return Err(Error::validation(format!(
                        "trapezoidal requires a <= b <= c <= d with a < d, got ({a}, {b}, {c}, {d})"
                    )));
                }
                if (a < b && !(a.is_finite() && b.is_finite()))
                    || (c < d && !(c.is_finite() && d.is_finite()))
                {
                    return Err(Error::validation(
                        "trapezoidal ramps must have finite endpoints",
                    ));
                }
            }
            WeightFunction::ArctanUpper { a } | WeightFunction::ArctanLower { a } => {
                if !a.is_finite() {
                    return Err(Error::validation("arctan centre must be finite"));
                }
            }
            WeightFunction::Normalized {
                component_index,
                raw_functions,
            } => {
                if *component_index >= raw_functions.len() {
                    return Err(Error::validation(format!(
                        "normalized component_index {component_index} out of range for {} raw functions",
                        raw_functions.len()
                    )));
                }
                for r in raw_functions {
                    r.validate()?;
                }
            }
            WeightFunction::Tabulated {
                breakpoints,
                values,
            } => validate_table(breakpoints, values)?,
        }
        Ok(())
    }

    /// `χ(t)`, evaluated in closed form (linear interpolation for tables).
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            WeightFunction::Rectangular { a, b } => {
                if a <= t && t < b {
                    1.0
                } else {
                    0.0
                }
            }
            WeightFunction::Trapezoidal { a, b, c, d } => {
                if t < a {
                    0.0
                } else if t < b {
                    (t - a) / (b - a)
                } else if t < c {
                    1.0
                } else if t < d {
                    (d - t) / (d - c)
                } else {
                    0.0
                }
            }
            WeightFunction::ArctanUpper { a } => 0.5 + (t - a).atan() / std::f64::consts::PI,
            WeightFunction::ArctanLower { a } => {
                1.0 - (0.5 + (t - a).atan() / std::f64::consts::PI)
            }
            WeightFunction::Normalized {
                component_index,
                ref raw_functions,
            } => {
                let total: f64 = raw_functions.iter().map(|r| r.eval(t)).sum();
                if total > 0.0 {
                    raw_functions[component_index].eval(t) / total
                } else {
                    // Undefined where every ψ vanishes; split evenly so the
                    // components still sum to one.
                    1.0 / raw_functions.len() as f64
                }
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
            } => interpolate_table(breakpoints, values, t),
        }
    }

    /// Points where the weight is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match self {
            WeightFunction::Rectangular { a, b } => vec![*a, *b],
            WeightFunction::Trapezoidal { a, b, c, d } => vec![*a, *b, *c, *d],
            WeightFunction::ArctanUpper { .. } | WeightFunction::ArctanLower { .. } => Vec::new(),
            WeightFunction::Normalized { raw_functions, .. } => {
                raw_functions.iter().flat_map(|r| r.kinks()).collect()
            }
            WeightFunction::Tabulated { breakpoints, .. } => breakpoints.clone(),
        };
        out.retain(|v| v.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Finite parameters in outcome units, used to place probe grids.
    pub fn params(&self) -> Vec<f64> {
        match self {
            WeightFunction::ArctanUpper { a } | WeightFunction::ArctanLower { a } => {
                vec![a - 1.0, *a, a + 1.0]
            }
            WeightFunction::Normalized { raw_functions, .. } => {
                raw_functions.iter().flat_map(|r| r.params()).collect()
            }
            _ => self.kinks(),
        }
    }

    /// Finite left endpoint of the support, when the weight has one.
    pub fn support_left(&self) -> Option<f64> {
        match self {
            WeightFunction::Rectangular { a, .. } | WeightFunction::Trapezoidal { a, .. } => {
                a.is_finite().then_some(*a)
            }
            WeightFunction::Tabulated { .. } => {
                let pieces = self.linear_pieces()?;
                let first = pieces.iter().find(|p| !p.is_zero())?;
                first.lo.is_finite().then_some(first.lo)
            }
            _ => None,
        }
    }

    /// Piecewise-linear representation covering the whole real line, for the
    /// rectangular, trapezoidal and tabulated kinds.
    pub fn linear_pieces(&self) -> Option<Vec<LinearPiece>> {
        let ninf = f64::NEG_INFINITY;
        let inf = f64::INFINITY;
        let mut pieces = Vec::new();
        match *self {
            WeightFunction::Rectangular { a, b } => {
                if a > ninf {
                    pieces.push(LinearPiece {
                        lo: ninf,
                        hi: a,
                        v_lo: 0.0,
                        v_hi: 0.0,
                    });
                }
                pieces.push(LinearPiece {
                    lo: a,
                    hi: b,
                    v_lo: 1.0,
                    v_hi: 1.0,
                });
                if b < inf {
                    pieces.push(LinearPiece {
                        lo: b,
                        hi: inf,
                        v_lo: 0.0,
                        v_hi: 0.0,
                    });
                }
            }
            WeightFunction::Trapezoidal { a, b, c, d } => {
                if a > ninf {
                    pieces.push(LinearPiece {
                        lo: ninf,
                        hi: a,
                        v_lo: 0.0,
                        v_hi: 0.0,
                    });
                }
                if b > a {
                    pieces.push(LinearPiece {
                        lo: a,
                        hi: b,
                        v_lo: 0.0,
                        v_hi: 1.0,
                    });
                }
                if c > b {
                    pieces.push(LinearPiece {
                        lo: b,
                        hi: c,
                        v_lo: 1.0,
                        v_hi: 1.0,
                    });
                }
                if d > c {
                    pieces.push(LinearPiece {
                        lo: c,
                        hi: d,
                        v_lo: 1.0,
                        v_hi: 0.0,
                    });
                }
                if d < inf {
                    pieces.push(LinearPiece {
                        lo: d,
                        hi: inf,
                        v_lo: 0.0,
                        v_hi: 0.0,
                    });
                }
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
            } => {
                let n = breakpoints.len();
                pieces.push(LinearPiece {
                    lo: ninf,
                    hi: breakpoints[0],
                    v_lo: values[0],
                    v_hi: values[0],
                });
                for k in 1..n {
                    pieces.push(LinearPiece {
                        lo: breakpoints[k - 1],
                        hi: breakpoints[k],
                        v_lo: values[k - 1],
                        v_hi: values[k],
                    });
                }
                pieces.push(LinearPiece {
                    lo: breakpoints[n - 1],
                    hi: inf,
                    v_lo: values[n - 1],
                    v_hi: values[n - 1],
                });
            }
            _ => return None,
        }
        Some(pieces)
    }

    /// `∫_s^t χ(z) k(z) dz` for a kernel `k` that is linear on `[s, t]`
    /// (`s <= t`, both finite). Exact for piecewise-linear and arctan weights;
    /// adaptive quadrature otherwise.
    pub fn integrate_against_linear(
        &self,
        s: f64,
        t: f64,
        kernel: &dyn Fn(f64) -> f64,
        opts: QuadratureOptions,
    ) -> Result<f64> {
        debug_assert!(s <= t && s.is_finite() && t.is_finite());
        if s == t {
            return Ok(0.0);
        }
        if let Some(pieces) = self.linear_pieces() {
            return Ok(integrate_pieces_against_linear(&pieces, s, t, kernel));
        }
        match *self {
            WeightFunction::ArctanUpper { a } | WeightFunction::ArctanLower { a } => {
                let upper = matches!(self, WeightFunction::ArctanUpper { .. });
                let (us, ut) = (s - a, t - a);
                let (f0s, f1s) = arctan_primitives(upper, us);
                let (f0t, f1t) = arctan_primitives(upper, ut);
                let k_s = kernel(s);
                let slope = (kernel(t) - k_s) / (t - s);
                // ∫ χ(z) (k_s + slope (z - s)) dz with z - s = u - u_s.
                let m0 = f0t - f0s;
                let m1 = (f1t - f1s) - us * m0;
                Ok(k_s * m0 + slope * m1)
            }
            _ => integrate_adaptive(|z| self.eval(z) * kernel(z), s, t, &self.kinks(), opts),
        }
    }

    /// `∫_s^t χ(z) dz` for `s <= t`.
    pub fn integral(&self, s: f64, t: f64, opts: QuadratureOptions) -> Result<f64> {
        self.integrate_against_linear(s, t, &|_| 1.0, opts)
    }
}

/// `∫_s^t w(z) k(z) dz` over linear pieces with `k` linear on `[s, t]`. The
/// product is quadratic on each overlap, integrated exactly from endpoint
/// values. Pieces where the weight vanishes contribute exactly zero.
pub(crate) fn integrate_pieces_against_linear(
    pieces: &[LinearPiece],
    s: f64,
    t: f64,
    kernel: &dyn Fn(f64) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for piece in pieces {
        let p = piece.lo.max(s);
        let q = piece.hi.min(t);
        if q <= p || piece.is_zero() {
            continue;
        }
        let (wp, wq) = (piece.value_at(p), piece.value_at(q));
        let (kp, kq) = (kernel(p), kernel(q));
        acc += (q - p) * (2.0 * wp * kp + wp * kq + wq * kp + 2.0 * wq * kq) / 6.0;
    }
    acc
}

/// `χ(t)` with a domain check.
pub fn eval_weight(w: &WeightFunction, domain: &IntervalDomain, t: f64) -> Result<f64> {
    domain.check(t)?;
    Ok(w.eval(t))
}

/// An ordered list of weights summing to one on a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionOfUnity {
    pub domain: IntervalDomain,
    pub weights: Vec<WeightFunction>,
}

impl PartitionOfUnity {
    /// Builds a partition and checks it on the default probe grid.
    pub fn new(domain: IntervalDomain, weights: Vec<WeightFunction>) -> Result<Self> {
        let p = Self::unchecked(domain, weights);
        let report = validate_partition(&p, &ProbeGrid::default());
        if !report.passed {
            return Err(Error::validation(report.summary()));
        }
        Ok(p)
    }

    /// Builds a partition without checking the axioms; see [`validate_partition`].
    pub fn unchecked(domain: IntervalDomain, weights: Vec<WeightFunction>) -> Self {
        PartitionOfUnity { domain, weights }
    }

    /// `{χ ≡ 1}` on `domain`.
    pub fn trivial(domain: IntervalDomain) -> Self {
        Self::unchecked(domain, vec![WeightFunction::unit()])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn eval(&self, j: usize, t: f64) -> Result<f64> {
        let w = self
            .weights
            .get(j)
            .ok_or_else(|| Error::validation(format!("no weight with index {j}")))?;
        eval_weight(w, &self.domain, t)
    }

    pub fn eval_all(&self, t: f64) -> Result<Vec<f64>> {
        self.domain.check(t)?;
        Ok(self.weights.iter().map(|w| w.eval(t)).collect())
    }

    /// Finite parameters of every weight plus the finite domain bounds.
    fn finite_params(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.weights.iter().flat_map(|w| w.params()).collect();
        out.extend([self.domain.lower, self.domain.upper]);
        out.retain(|v| v.is_finite());
        out
    }
}

/// Probe grid used for grid-based partition checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeGrid {
    pub points: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid {
            points: DEFAULT_PROBE_POINTS,
        }
    }
}

impl ProbeGrid {
    /// Equally spaced points over the hull of `params` widened by one span on
    /// each side, plus the parameters themselves, restricted to `domain`.
    pub fn points_for(&self, params: &[f64], domain: &IntervalDomain) -> Vec<f64> {
        let finite: Vec<f64> = params.iter().copied().filter(|v| v.is_finite()).collect();
        let (lo, hi) = if finite.is_empty() {
            (-1.0, 1.0)
        } else {
            let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let mut span = hi - lo;
        if span == 0.0 {
            span = lo.abs().max(1.0);
        }
        let snap = 1e-9 * span;
        let mut pts = linspace(lo - span, hi + span, self.points);
        // Grid points that only differ from a parameter by rounding are
        // replaced by the parameter itself.
        pts.retain(|t| finite.iter().all(|p| (t - p).abs() > snap));
        pts.extend(finite);
        pts.retain(|t| domain.contains(*t));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeViolation {
    pub weight_index: usize,
    pub t: f64,
    pub value: f64,
}

/// Outcome of [`validate_partition`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub probe_points: usize,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub worst_point: Option<f64>,
    pub range_violations: Vec<RangeViolation>,
    pub weight_errors: Vec<String>,
    pub passed: bool,
}

impl PartitionReport {
    pub fn summary(&self) -> String {
        if self.passed {
            return format!(
                "partition valid on {} probe points (max |sum - 1| = {:e})",
                self.probe_points, self.max_deviation
            );
        }
        let mut parts = Vec::new();
        parts.extend(self.weight_errors.iter().cloned());
        if self.max_deviation > self.tolerance {
            parts.push(format!(
                "weights sum to 1 {:+e} at t = {}",
                self.max_deviation,
                self.worst_point.unwrap_or(f64::NAN)
            ));
        }
        if let Some(v) = self.range_violations.first() {
            parts.push(format!(
                "weight {} takes value {} at t = {} ({} range violations)",
                v.weight_index,
                v.value,
                v.t,
                self.range_violations.len()
            ));
        }
        if self.probe_points == 0 && self.weight_errors.is_empty() {
            parts.push("no probe points inside the domain".into());
        }
        format!("invalid partition: {}", parts.join("; "))
    }
}

/// Checks the partition axioms on a probe grid. Never fails; the report
/// carries every problem found.
pub fn validate_partition(p: &PartitionOfUnity, grid: &ProbeGrid) -> PartitionReport {
    let mut weight_errors = Vec::new();
    if let Err(e) = p.domain.validate() {
        weight_errors.push(e.to_string());
    }
    if p.weights.is_empty() {
        weight_errors.push("partition has no weights".into());
    }
    for (j, w) in p.weights.iter().enumerate() {
        if let Err(e) = w.validate() {
            weight_errors.push(format!("weights[{j}]: {e}"));
        }
    }
    if !weight_errors.is_empty() {
        return PartitionReport {
            probe_points: 0,
            tolerance: PARTITION_TOLERANCE,
            max_deviation: f64::NAN,
            worst_point: None,
            range_violations: Vec::new(),
            weight_errors,
            passed: false,
        };
    }

    let points = grid.points_for(&p.finite_params(), &p.domain);
    let mut max_deviation: f64 = 0.0;
    let mut worst_point = None;
    let mut range_violations = Vec::new();
    for &t in &points {
        let mut sum = 0.0;
        for (j, w) in p.weights.iter().enumerate() {
            let v = w.eval(t);
            if !(-PARTITION_TOLERANCE..=1.0 + PARTITION_TOLERANCE).contains(&v) {
                range_violations.push(RangeViolation {
                    weight_index: j,
                    t,
                    value: v,
                });
            }
            sum += v;
        }
        let dev = (sum - 1.0).abs();
        if dev > max_deviation || dev.is_nan() {
            max_deviation = dev;
            worst_point = Some(t);
        }
    }
    let passed =
        !points.is_empty() && max_deviation <= PARTITION_TOLERANCE && range_violations.is_empty();
    PartitionReport {
        probe_points: points.len(),
        tolerance: PARTITION_TOLERANCE,
        max_deviation,
        worst_point,
        range_violations,
        weight_errors,
        passed,
    }
}

/// Indicator cells `[c_{j-1}, c_j)` with outer cells running to `±∞`.
pub fn make_rectangular_partition(
    domain: IntervalDomain,
    cutpoints: &[f64],
) -> Result<PartitionOfUnity> {
    domain.validate()?;
    if cutpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("cutpoints must be strictly ascending"));
    }
    if let Some(c) = cutpoints
        .iter()
        .find(|c| !(c.is_finite() && **c > domain.lower && **c < domain.upper))
    {
        return Err(Error::validation(format!(
            "cutpoint {c} is not interior to {domain}"
        )));
    }
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend_from_slice(cutpoints);
    edges.push(f64::INFINITY);
    let weights = edges
        .windows(2)
        .map(|w| WeightFunction::Rectangular { a: w[0], b: w[1] })
        .collect();
    Ok(PartitionOfUnity::unchecked(domain, weights))
}

/// Trapezoidal partition whose neighbouring weights cross over on the given
/// ramps `[l_i, r_i]` (ascending, non-overlapping). `n` ramps give `n + 1` weights.
pub fn make_trapezoidal_partition(
    domain: IntervalDomain,
    ramps: &[(f64, f64)],
) -> Result<PartitionOfUnity> {
    domain.validate()?;
    if ramps.is_empty() {
        return Err(Error::validation("at least one ramp is required"));
    }
    for (i, &(l, r)) in ramps.iter().enumerate() {
        if !(l.is_finite() && r.is_finite() && l < r) {
            return Err(Error::validation(format!(
                "ramp {i} must satisfy finite l < r, got [{l}, {r}]"
            )));
        }
        if i > 0 && l < ramps[i - 1].1 {
            return Err(Error::validation(
                "ramps must be ascending and non-overlapping",
            ));
        }
    }
    let ninf = f64::NEG_INFINITY;
    let inf = f64::INFINITY;
    let mut weights = Vec::with_capacity(ramps.len() + 1);
    weights.push(WeightFunction::Trapezoidal {
        a: ninf,
        b: ninf,
        c: ramps[0].0,
        d: ramps[0].1,
    });
    for w in ramps.windows(2) {
        weights.push(WeightFunction::Trapezoidal {
            a: w[0].0,
            b: w[0].1,
            c: w[1].0,
            d: w[1].1,
        });
    }
    let last = ramps[ramps.len() - 1];
    weights.push(WeightFunction::Trapezoidal {
        a: last.0,
        b: last.1,
        c: inf,
        d: inf,
    });
    let p = PartitionOfUnity::unchecked(domain, weights);
    let report = validate_partition(&p, &ProbeGrid::default());
    if !report.passed {
        return Err(Error::validation(report.summary()));
    }
    Ok(p)
}

/// `{χ_1, χ_2}` with `χ_2(t) = 1/2 + arctan(t - a)/π` and `χ_1 = 1 - χ_2`.
/// Both weights are strictly positive everywhere.
pub fn make_arctan_partition(domain: IntervalDomain, a: f64) -> Result<PartitionOfUnity> {
    domain.validate()?;
    let p = PartitionOfUnity::unchecked(
        domain,
        vec![
            WeightFunction::ArctanLower { a },
            WeightFunction::ArctanUpper { a },
        ],
    );
    for w in &p.weights {
        w.validate()?;
    }
    Ok(p)
}

/// `χ_j = ψ_j / Σ_k ψ_k`. Fails, naming the point, if `Σ ψ` vanishes or any
/// `ψ` goes negative on the probe grid.
pub fn make_normalized_partition(
    domain: IntervalDomain,
    raw: Vec<RawFunction>,
    grid: &ProbeGrid,
) -> Result<PartitionOfUnity> {
    domain.validate()?;
    if raw.is_empty() {
        return Err(Error::validation("no raw functions given"));
    }
    for (i, r) in raw.iter().enumerate() {
        r.validate()
            .map_err(|e| Error::validation(format!("raw function {i}: {e}")))?;
    }
    let params: Vec<f64> = raw.iter().flat_map(|r| r.params()).collect();
    for t in grid.points_for(&params, &domain) {
        let mut total = 0.0;
        for (i, r) in raw.iter().enumerate() {
            let v = r.eval(t);
            if v < 0.0 {
                return Err(Error::validation(format!(
                    "raw function {i} is negative ({v}) at t = {t}"
                )));
            }
            total += v;
        }
        if !(total > 0.0) {
            return Err(Error::validation(format!(
                "raw functions sum to zero at t = {t}"
            )));
        }
    }
    let weights = (0..raw.len())
        .map(|component_index| WeightFunction::Normalized {
            component_index,
            raw_functions: raw.clone(),
        })
        .collect();
    Ok(PartitionOfUnity::unchecked(domain, weights))
}
