//! Multiplier symbols `m : (0, ∞) → C` and the operators `T_{m∘r}`.
//!
//! Symbols are trait objects built from JSON descriptors by a
//! [`SymbolRegistry`] keyed on `"kind"`. Each symbol is evaluated exactly at
//! the positive rationals `r_ν`; for the bound functionals it also exposes
//! `g = m∘exp` in the log coordinate `x = log t`, where the intervals
//! `[e^{η^k}, e^{η^{k+1}}]` become `[η^k, η^{k+1}]` and never overflow.

mod bounds;
mod kinds;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::Value;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::multi_index::{MultiIndex, ReducedRational};
use crate::norms::{NormConfig, NormRegistry};
use crate::poly::PolytorusPolynomial;

pub use bounds::{hm_bound, marcinkiewicz_bound, variation_on, BoundReport, HmConfig, IntervalDetail};
pub use kinds::{Constant, Indicator, Product, SignPattern, Smooth, SmoothForm, StepSigns, Tabulated};

/// An exact positive rational `r_ν`, with its logarithm.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    num: BigUint,
    den: BigUint,
    log: f64,
}

impl Frequency {
    pub fn of(nu: &MultiIndex) -> Result<Self> {
        let (num, den) = nu.rational_big()?;
        Ok(Frequency {
            num,
            den,
            log: nu.log_rational()?,
        })
    }

    pub fn from_rational(r: ReducedRational) -> Self {
        Frequency {
            num: BigUint::from(r.numerator()),
            den: BigUint::from(r.denominator()),
            log: r.ln(),
        }
    }

    pub fn log(&self) -> f64 {
        self.log
    }

    /// `r` in floating point (may be `inf` or `0` for extreme exponents).
    pub fn to_f64(&self) -> f64 {
        self.log.exp()
    }

    /// Exact comparison with a rational.
    pub fn cmp_to(&self, q: &BigRational) -> Ordering {
        // denominators of BigRational are normalized positive
        let lhs = BigInt::from(self.num.clone()) * q.denom();
        let rhs = q.numer() * BigInt::from(self.den.clone());
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// How a symbol behaves beyond any finite window of intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    EventuallyConstant,
    /// Periodic in the interval index.
    Periodic,
    /// Per-interval variation is at most this, with no claim the sup is hit.
    Bounded(f64),
    Unbounded,
    Unknown,
}

impl Tail {
    pub fn tag(&self) -> &'static str {
        match self {
            Tail::EventuallyConstant => "eventually_constant",
            Tail::Periodic => "periodic",
            Tail::Bounded(_) => "bounded",
            Tail::Unbounded => "unbounded",
            Tail::Unknown => "unknown",
        }
    }
}

/// A multiplier symbol.
pub trait Symbol: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;

    /// `m(r)` at an exact rational.
    fn eval(&self, r: &Frequency) -> Result<Complex64>;

    /// Regulated value of `g(x) = m(e^x)`.
    fn eval_log(&self, x: f64) -> Result<Complex64>;

    /// One-sided limits `(g(x-), g(x+))`.
    fn limits_log(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let v = self.eval_log(x)?;
        Ok((v, v))
    }

    /// Jump locations of `g` in `[lo, hi]`.
    fn breakpoints_log(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Points of `(lo, hi)` splitting it into pieces on which `g` is
    /// continuous and monotone in each of its real and imaginary parts.
    fn monotone_splits_log(&self, lo: f64, hi: f64) -> Result<Vec<f64>>;

    /// `g'(x) = t·m'(t)` at `t = e^x`.
    fn derivative_log(&self, _x: f64) -> Result<Complex64> {
        Err(self.unsupported("derivative"))
    }

    /// `sup_t |m(t)|`.
    fn sup_norm(&self) -> f64;

    fn tail(&self, eta: f64) -> Tail;

    fn to_json(&self) -> Value;

    fn unsupported(&self, what: &str) -> Error {
        Error::Unsupported {
            kind: self.kind().to_string(),
            what: what.to_string(),
        }
    }
}

pub type SymbolRef = Arc<dyn Symbol>;

type Parser = fn(&Value, &SymbolRegistry) -> Result<SymbolRef>;

/// Symbol parsers by kind name.
#[derive(Clone)]
pub struct SymbolRegistry {
    parsers: BTreeMap<&'static str, Parser>,
}

impl Default for SymbolRegistry {
    fn default() -> Self {
        let mut r = SymbolRegistry {
            parsers: BTreeMap::new(),
        };
        r.register("constant", kinds::parse_constant);
        r.register("indicator", kinds::parse_indicator);
        r.register("step_signs", kinds::parse_step_signs);
        r.register("smooth", kinds::parse_smooth);
        r.register("tabulated", kinds::parse_tabulated);
        r.register("product", kinds::parse_product);
        r
    }
}

impl SymbolRegistry {
    pub fn register(&mut self, kind: &'static str, parser: Parser) {
        self.parsers.insert(kind, parser);
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.parsers.keys().copied().collect()
    }

    pub fn parse(&self, v: &Value) -> Result<SymbolRef> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::malformed("symbol descriptor needs a string `kind`"))?;
        let parser = self.parsers.get(kind).ok_or_else(|| {
            Error::malformed(format!(
                "unknown symbol kind `{kind}` (known: {})",
                self.kinds().join(", ")
            ))
        })?;
        parser(v, self)
    }

    pub fn parse_str(&self, s: &str) -> Result<SymbolRef> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::malformed(e.to_string()))?;
        self.parse(&v)
    }
}

/// `T_{m∘r}`: `a_ν ↦ m(r_ν)·a_ν`.
pub fn apply_multiplier(m: &dyn Symbol, f: &PolytorusPolynomial) -> Result<PolytorusPolynomial> {
    let mut terms = Vec::with_capacity(f.len());
    for (nu, a) in f.terms() {
        let r = Frequency::of(nu)?;
        let v = m.eval(&r).map_err(|e| Error::NotEvaluable {
            at: format!("nu = {nu} (r = {r})"),
            reason: e.to_string(),
        })?;
        terms.push((nu.clone(), v * a));
    }
    Ok(PolytorusPolynomial::from_terms(terms))
}

/// Best ratio `‖T_{m∘r}F‖_p / ‖F‖_p` over an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierLowerBound {
    pub value: f64,
    /// Ensemble member attaining `value`.
    pub argmax: usize,
    pub ratios: Vec<f64>,
}

pub fn multiplier_norm_lower(
    m: &dyn Symbol,
    p: f64,
    ensemble: &Ensemble,
    registry: &NormRegistry,
    method: &str,
    cfg: &NormConfig,
) -> Result<MultiplierLowerBound> {
    let route = registry.resolve(method, p)?;
    let members = ensemble.members();
    let ratios: Vec<f64> = members
        .par_iter()
        .map(|f| {
            let base = route.norm(f, p, cfg)?.value;
            if base == 0.0 {
                return Ok(0.0);
            }
            Ok(route.norm(&apply_multiplier(m, f)?, p, cfg)?.value / base)
        })
        .collect::<Result<_>>()?;
    let (argmax, value) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r > best.1 { (i, r) } else { best });
    Ok(MultiplierLowerBound {
        value,
        argmax,
        ratios,
    })
}
