use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::json::{complex, num};
use crate::littlewood_paley::{IntervalPartition, MARGIN};
use crate::multi_index::ReducedRational;
use crate::numeric::rng_stream;

use super::{Frequency, Symbol, SymbolRef, SymbolRegistry, Tail};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub(crate) fn parse_complex_value(v: &Value) -> Result<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(real(x));
    }
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(Error::malformed(format!("bad complex value {v}"))),
        },
        _ => Err(Error::malformed(format!("bad complex value {v}"))),
    }
}

/// A nonnegative rational given as a JSON number or a `"p/q"` string.
fn parse_exact(v: &Value, what: &str) -> Result<BigRational> {
    let q = match v {
        Value::String(s) => {
            let r = ReducedRational::parse(s).map_err(|e| Error::malformed(format!("{what}: {e}")))?;
            BigRational::new(r.numerator().into(), r.denominator().into())
        }
        Value::Number(n) => n
            .as_f64()
            .and_then(BigRational::from_float)
            .ok_or_else(|| Error::malformed(format!("{what}: not a finite number")))?,
        _ => return Err(Error::malformed(format!("{what} must be a number or \"p/q\""))),
    };
    if q < BigRational::zero() {
        return Err(Error::malformed(format!("{what} must be nonnegative")));
    }
    Ok(q)
}

fn ln_exact(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    let ln_big = |b: &BigInt| {
        let bits = b.bits();
        if bits < 1000 {
            b.to_f64().expect("fits").ln()
        } else {
            let shift = bits - 60;
            (b >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_big(q.numer()) - ln_big(q.denom())
}

fn parse_positive_rational(v: &Value, what: &str) -> Result<ReducedRational> {
    let q = parse_exact(v, what)?;
    match (q.numer().to_u64(), q.denom().to_u64()) {
        (Some(n), Some(d)) if n > 0 => ReducedRational::new(n, d),
        _ => Err(Error::malformed(format!("{what} must be a positive rational with 64-bit parts"))),
    }
}

fn opt_bool(v: &Value, key: &str) -> Result<Option<bool>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Bool(b)) => Ok(Some(*b)),
        Some(_) => Err(Error::malformed(format!("`{key}` must be a boolean"))),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::malformed(format!("symbol descriptor lacks `{key}`")))
}

// ---------------------------------------------------------------- constant

#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub value: Complex64,
}

impl Symbol for Constant {
    fn kind(&self) -> &'static str {
        "constant"
    }

    fn eval(&self, _r: &Frequency) -> Result<Complex64> {
        Ok(self.value)
    }

    fn eval_log(&self, _x: f64) -> Result<Complex64> {
        Ok(self.value)
    }

    fn monotone_splits_log(&self, _lo: f64, _hi: f64) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn derivative_log(&self, _x: f64) -> Result<Complex64> {
        Ok(ZERO)
    }

    fn sup_norm(&self) -> f64 {
        self.value.norm()
    }

    fn tail(&self, _eta: f64) -> Tail {
        Tail::EventuallyConstant
    }

    fn to_json(&self) -> Value {
        json!({"kind": "constant", "value": complex(self.value)})
    }
}

pub(crate) fn parse_constant(v: &Value, _: &SymbolRegistry) -> Result<SymbolRef> {
    Ok(std::sync::Arc::new(Constant {
        value: parse_complex_value(field(v, "value")?)?,
    }))
}

// ---------------------------------------------------------------- indicator

/// `χ_{(a, b)}` with endpoint values 1 (closed), 0 (open), or 1/2 when unset.
#[derive(Clone, Debug, PartialEq)]
pub struct Indicator {
    a: BigRational,
    b: Option<BigRational>,
    a_json: Value,
    b_json: Value,
    ln_a: f64,
    ln_b: f64,
    pub closed_left: Option<bool>,
    pub closed_right: Option<bool>,
}

fn endpoint_value(closed: Option<bool>) -> f64 {
    match closed {
        Some(true) => 1.0,
        Some(false) => 0.0,
        None => 0.5,
    }
}

impl Indicator {
    pub fn new(
        a: &Value,
        b: Option<&Value>,
        closed_left: Option<bool>,
        closed_right: Option<bool>,
    ) -> Result<Self> {
        let a_exact = parse_exact(a, "a")?;
        let b_exact = match b {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if s == "inf" => None,
            Some(b) => Some(parse_exact(b, "b")?),
        };
        if let Some(b) = &b_exact {
            if *b <= a_exact {
                return Err(Error::malformed("indicator needs a < b"));
            }
        }
        Ok(Indicator {
            ln_a: ln_exact(&a_exact),
            ln_b: b_exact.as_ref().map_or(f64::INFINITY, ln_exact),
            a: a_exact,
            b: b_exact,
            a_json: a.clone(),
            b_json: b.cloned().unwrap_or(Value::Null),
            closed_left,
            closed_right,
        })
    }

    fn value_at(&self, vs_a: Ordering, vs_b: Ordering) -> f64 {
        match (vs_a, vs_b) {
            (Ordering::Less, _) | (_, Ordering::Greater) => 0.0,
            (Ordering::Equal, _) => endpoint_value(self.closed_left),
            (_, Ordering::Equal) => endpoint_value(self.closed_right),
            _ => 1.0,
        }
    }
}

impl Symbol for Indicator {
    fn kind(&self) -> &'static str {
        "indicator"
    }

    fn eval(&self, r: &Frequency) -> Result<Complex64> {
        let vs_b = self.b.as_ref().map_or(Ordering::Less, |b| r.cmp_to(b));
        Ok(real(self.value_at(r.cmp_to(&self.a), vs_b)))
    }

    fn eval_log(&self, x: f64) -> Result<Complex64> {
        let vs_a = x.partial_cmp(&self.ln_a).unwrap_or(Ordering::Greater);
        let vs_b = x.partial_cmp(&self.ln_b).unwrap_or(Ordering::Less);
        Ok(real(self.value_at(vs_a, vs_b)))
    }

    fn limits_log(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let left = self.ln_a < x && x <= self.ln_b;
        let right = self.ln_a <= x && x < self.ln_b;
        Ok((real(left as u8 as f64), real(right as u8 as f64)))
    }

    fn breakpoints_log(&self, lo: f64, hi: f64) -> Vec<f64> {
        [self.ln_a, self.ln_b]
            .into_iter()
            .filter(|x| x.is_finite() && lo <= *x && *x <= hi)
            .collect()
    }

    fn monotone_splits_log(&self, _lo: f64, _hi: f64) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn tail(&self, _eta: f64) -> Tail {
        Tail::EventuallyConstant
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("kind".into(), "indicator".into());
        m.insert("a".into(), self.a_json.clone());
        m.insert("b".into(), self.b_json.clone());
        if let Some(c) = self.closed_left {
            m.insert("closed_left".into(), c.into());
        }
        if let Some(c) = self.closed_right {
            m.insert("closed_right".into(), c.into());
        }
        Value::Object(m)
    }
}

pub(crate) fn parse_indicator(v: &Value, _: &SymbolRegistry) -> Result<SymbolRef> {
    Ok(std::sync::Arc::new(Indicator::new(
        field(v, "a")?,
        v.get("b"),
        opt_bool(v, "closed_left")?,
        opt_bool(v, "closed_right")?,
    )?))
}

// ---------------------------------------------------------------- step signs

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignPattern {
    Constant(i8),
    /// `ε_k = (-1)^k`.
    Alternating,
    /// Independent fair signs, `ε_k` drawn from its own stream of the seed.
    Seeded(u64),
}

/// `m_ε = Σ_k ε_k χ_{I_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSigns {
    pub partition: IntervalPartition,
    pub pattern: SignPattern,
    pub overrides: BTreeMap<i64, i8>,
}

fn zigzag(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

impl StepSigns {
    pub fn new(partition: IntervalPartition, pattern: SignPattern) -> Self {
        StepSigns {
            partition,
            pattern,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_overrides(mut self, overrides: BTreeMap<i64, i8>) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn sign(&self, k: i64) -> f64 {
        if let Some(&s) = self.overrides.get(&k) {
            return s as f64;
        }
        match self.pattern {
            SignPattern::Constant(s) => s as f64,
            SignPattern::Alternating => {
                if k.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            SignPattern::Seeded(seed) => {
                if rng_stream(seed, zigzag(k)).gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl Symbol for StepSigns {
    fn kind(&self) -> &'static str {
        "step_signs"
    }

    fn eval(&self, r: &Frequency) -> Result<Complex64> {
        let (k, margin) = self.partition.block_of_log(r.log());
        if margin < MARGIN {
            return Err(Error::Uncertified(format!(
                "log r = {} lies within {margin:e} of an edge of I_{k}",
                r.log()
            )));
        }
        Ok(real(self.sign(k)))
    }

    fn eval_log(&self, x: f64) -> Result<Complex64> {
        let (k, _) = self.partition.block_of_log(x);
        if x == self.partition.lower_edge(k) {
            Ok(real(0.5 * (self.sign(k - 1) + self.sign(k))))
        } else {
            Ok(real(self.sign(k)))
        }
    }

    fn limits_log(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let (k, _) = self.partition.block_of_log(x);
        if x == self.partition.lower_edge(k) {
            Ok((real(self.sign(k - 1)), real(self.sign(k))))
        } else {
            Ok((real(self.sign(k)), real(self.sign(k))))
        }
    }

    fn breakpoints_log(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (k0, _) = self.partition.block_of_log(lo);
        let (k1, _) = self.partition.block_of_log(hi);
        (k0..=k1)
            .map(|k| self.partition.lower_edge(k))
            .filter(|e| lo <= *e && *e <= hi)
            .collect()
    }

    fn monotone_splits_log(&self, _lo: f64, _hi: f64) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn tail(&self, _eta: f64) -> Tail {
        match self.pattern {
            SignPattern::Constant(_) => Tail::EventuallyConstant,
            SignPattern::Alternating => Tail::Periodic,
            // each closed interval sees at most two half-jumps of size <= 2
            SignPattern::Seeded(_) => Tail::Bounded(2.0),
        }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("kind".into(), "step_signs".into());
        m.insert("eta".into(), self.partition.eta().to_string().into());
        match self.pattern {
            SignPattern::Constant(s) => {
                m.insert("pattern".into(), "constant".into());
                m.insert("value".into(), s.into());
            }
            SignPattern::Alternating => {
                m.insert("pattern".into(), "alternating".into());
            }
            SignPattern::Seeded(seed) => {
                m.insert("pattern".into(), "seeded".into());
                m.insert("seed".into(), seed.into());
            }
        }
        if !self.overrides.is_empty() {
            let o: Map<String, Value> = self
                .overrides
                .iter()
                .map(|(k, s)| (k.to_string(), Value::from(*s)))
                .collect();
            m.insert("overrides".into(), Value::Object(o));
        }
        Value::Object(m)
    }
}

fn parse_sign(v: &Value) -> Result<i8> {
    match v.as_i64() {
        Some(1) => Ok(1),
        Some(-1) => Ok(-1),
        _ => Err(Error::malformed(format!("sign must be +1 or -1, got {v}"))),
    }
}

pub(crate) fn parse_step_signs(v: &Value, _: &SymbolRegistry) -> Result<SymbolRef> {
    let eta = parse_positive_rational(field(v, "eta")?, "eta")?;
    let partition = IntervalPartition::new(eta).map_err(|e| Error::malformed(e.to_string()))?;
    let pattern = match v.get("pattern").and_then(Value::as_str).unwrap_or("alternating") {
        "alternating" => SignPattern::Alternating,
        "constant" => SignPattern::Constant(v.get("value").map_or(Ok(1), parse_sign)?),
        "seeded" => SignPattern::Seeded(
            field(v, "seed")?
                .as_u64()
                .ok_or_else(|| Error::malformed("`seed` must be a nonnegative integer"))?,
        ),
        other => return Err(Error::malformed(format!("unknown sign pattern `{other}`"))),
    };
    let mut overrides = BTreeMap::new();
    if let Some(o) = v.get("overrides") {
        let o = o
            .as_object()
            .ok_or_else(|| Error::malformed("`overrides` must be an object"))?;
        for (k, s) in o {
            let k: i64 = k
                .parse()
                .map_err(|_| Error::malformed(format!("override key `{k}` is not an integer")))?;
            overrides.insert(k, parse_sign(s)?);
        }
    }
    Ok(std::sync::Arc::new(
        StepSigns::new(partition, pattern).with_overrides(overrides),
    ))
}

// ---------------------------------------------------------------- smooth

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SmoothForm {
    /// `sin(log log t)` for `t > e`, `0` below.
    SinLogLog,
    /// `log t`.
    Log,
    /// `1 / (1 + ((t - center)/width)²)`.
    Lorentzian { center: f64, width: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Smooth {
    pub form: SmoothForm,
}

impl Smooth {
    fn g(&self, x: f64) -> f64 {
        match self.form {
            SmoothForm::SinLogLog => {
                if x > 1.0 {
                    x.ln().sin()
                } else {
                    0.0
                }
            }
            SmoothForm::Log => x,
            SmoothForm::Lorentzian { center, width } => lorentz(x.exp(), center, width),
        }
    }
}

fn lorentz(t: f64, center: f64, width: f64) -> f64 {
    let u = (t - center) / width;
    if u.is_finite() {
        1.0 / (1.0 + u * u)
    } else {
        0.0
    }
}

impl Symbol for Smooth {
    fn kind(&self) -> &'static str {
        "smooth"
    }

    fn eval(&self, r: &Frequency) -> Result<Complex64> {
        Ok(real(match self.form {
            SmoothForm::Lorentzian { center, width } => lorentz(r.to_f64(), center, width),
            _ => self.g(r.log()),
        }))
    }

    fn eval_log(&self, x: f64) -> Result<Complex64> {
        Ok(real(self.g(x)))
    }

    fn monotone_splits_log(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let inside = |x: &f64| lo < *x && *x < hi;
        Ok(match self.form {
            SmoothForm::SinLogLog => {
                // turning points of sin(log x) at log x = π/2 + jπ
                let mut out = vec![1.0];
                if hi > 1.0 {
                    let u_lo = lo.max(1.0).ln();
                    let u_hi = hi.ln();
                    let pi = std::f64::consts::PI;
                    let mut j = ((u_lo - pi / 2.0) / pi).floor() as i64;
                    while pi / 2.0 + j as f64 * pi <= u_hi {
                        out.push((pi / 2.0 + j as f64 * pi).exp());
                        j += 1;
                    }
                }
                out.into_iter().filter(inside).collect()
            }
            SmoothForm::Log => Vec::new(),
            SmoothForm::Lorentzian { center, .. } => {
                [center.ln()].into_iter().filter(|x| x.is_finite() && inside(x)).collect()
            }
        })
    }

    fn derivative_log(&self, x: f64) -> Result<Complex64> {
        Ok(real(match self.form {
            SmoothForm::SinLogLog => {
                if x >= 1.0 {
                    x.ln().cos() / x
                } else {
                    0.0
                }
            }
            SmoothForm::Log => 1.0,
            SmoothForm::Lorentzian { center, width } => {
                let t = x.exp();
                let u = (t - center) / width;
                if !u.is_finite() || u.abs() > 1e100 {
                    0.0
                } else {
                    -2.0 * u * (t / width) / (1.0 + u * u).powi(2)
                }
            }
        }))
    }

    fn sup_norm(&self) -> f64 {
        match self.form {
            SmoothForm::Log => f64::INFINITY,
            _ => 1.0,
        }
    }

    fn tail(&self, eta: f64) -> Tail {
        match self.form {
            // |d/du sin u| <= 1 over a log-interval of length log η
            SmoothForm::SinLogLog => Tail::Bounded(eta.ln()),
            SmoothForm::Log => Tail::Unbounded,
            // rises to 1 once and decays: total variation on (0, ∞) is < 2
            SmoothForm::Lorentzian { .. } => Tail::Bounded(2.0),
        }
    }

    fn to_json(&self) -> Value {
        match self.form {
            SmoothForm::SinLogLog => json!({"kind": "smooth", "form": "sin_loglog"}),
            SmoothForm::Log => json!({"kind": "smooth", "form": "log"}),
            SmoothForm::Lorentzian { center, width } => json!({
                "kind": "smooth", "form": "lorentzian",
                "center": num(center), "width": num(width),
            }),
        }
    }
}

pub(crate) fn parse_smooth(v: &Value, _: &SymbolRegistry) -> Result<SymbolRef> {
    let form = match field(v, "form")?.as_str() {
        Some("sin_loglog") => SmoothForm::SinLogLog,
        Some("log") => SmoothForm::Log,
        Some("lorentzian") => {
            let get = |k: &str| {
                v.get(k)
                    .and_then(Value::as_f64)
                    .filter(|x| x.is_finite() && *x > 0.0)
                    .ok_or_else(|| Error::malformed(format!("lorentzian needs positive `{k}`")))
            };
            SmoothForm::Lorentzian {
                center: get("center")?,
                width: get("width")?,
            }
        }
        _ => return Err(Error::malformed("`form` must be sin_loglog, log or lorentzian")),
    };
    Ok(std::sync::Arc::new(Smooth { form }))
}

// ---------------------------------------------------------------- tabulated

/// Values at finitely many nodes, optionally linearly interpolated in `t`
/// and held constant outside the node range.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    nodes: Vec<(BigRational, f64, Complex64)>,
    node_json: Vec<Value>,
    pub interpolate: bool,
    pub monotone_certificate: bool,
}

impl Tabulated {
    fn segment(&self, t: f64) -> Complex64 {
        let n = &self.nodes;
        let i = n.partition_point(|(_, ti, _)| *ti <= t);
        if i == 0 {
            return n[0].2;
        }
        if i == n.len() {
            return n[n.len() - 1].2;
        }
        let (_, t0, v0) = &n[i - 1];
        let (_, t1, v1) = &n[i];
        let w = (t - t0) / (t1 - t0);
        v0 + (v1 - v0) * w
    }

    fn need_interpolation(&self, what: &str) -> Result<()> {
        if self.interpolate {
            Ok(())
        } else {
            Err(self.unsupported(what))
        }
    }
}

impl Symbol for Tabulated {
    fn kind(&self) -> &'static str {
        "tabulated"
    }

    fn eval(&self, r: &Frequency) -> Result<Complex64> {
        if let Ok(i) = self.nodes.binary_search_by(|(q, _, _)| r.cmp_to(q).reverse()) {
            return Ok(self.nodes[i].2);
        }
        if !self.interpolate {
            return Err(Error::NotEvaluable {
                at: r.to_string(),
                reason: "not a node of a non-interpolated table".into(),
            });
        }
        Ok(self.segment(r.to_f64()))
    }

    fn eval_log(&self, x: f64) -> Result<Complex64> {
        self.need_interpolation("evaluation between nodes")?;
        Ok(self.segment(x.exp()))
    }

    fn monotone_splits_log(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        self.need_interpolation("bounded variation")?;
        if !self.monotone_certificate {
            return Err(self.unsupported("bounded variation without a monotonicity certificate"));
        }
        Ok(self
            .nodes
            .iter()
            .map(|(_, t, _)| t.ln())
            .filter(|x| lo < *x && *x < hi)
            .collect())
    }

    fn derivative_log(&self, x: f64) -> Result<Complex64> {
        self.need_interpolation("derivative")?;
        let t = x.exp();
        let n = &self.nodes;
        let i = n.partition_point(|(_, ti, _)| *ti <= t);
        if i == 0 || i == n.len() {
            return Ok(ZERO);
        }
        let (_, t0, v0) = &n[i - 1];
        let (_, t1, v1) = &n[i];
        Ok((v1 - v0) / (t1 - t0) * t)
    }

    fn sup_norm(&self) -> f64 {
        self.nodes.iter().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    fn tail(&self, _eta: f64) -> Tail {
        if self.interpolate {
            Tail::EventuallyConstant
        } else {
            Tail::Unknown
        }
    }

    fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .zip(&self.node_json)
            .map(|((_, _, v), t)| json!([t, complex(*v)]))
            .collect();
        json!({
            "kind": "tabulated",
            "nodes": nodes,
            "interpolate": self.interpolate,
            "monotone_certificate": self.monotone_certificate,
        })
    }
}

pub(crate) fn parse_tabulated(v: &Value, _: &SymbolRegistry) -> Result<SymbolRef> {
    let raw = field(v, "nodes")?
        .as_array()
        .ok_or_else(|| Error::malformed("`nodes` must be an array of [t, value]"))?;
    let mut nodes = Vec::with_capacity(raw.len());
    let mut node_json = Vec::with_capacity(raw.len());
    for n in raw {
        let Some([t, val]) = n.as_array().map(Vec::as_slice) else {
            return Err(Error::malformed("each node must be [t, value]"));
        };
        let q = parse_exact(t, "node")?;
        if q.is_zero() {
            return Err(Error::malformed("nodes must be positive"));
        }
        let tf = ln_exact(&q).exp();
        nodes.push((q, tf, parse_complex_value(val)?));
        node_json.push(t.clone());
    }
    if nodes.is_empty() {
        return Err(Error::malformed("table has no nodes"));
    }
    if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::malformed("nodes must be strictly increasing"));
    }
    Ok(std::sync::Arc::new(Tabulated {
        nodes,
        node_json,
        interpolate: opt_bool(v, "interpolate")?.unwrap_or(false),
        monotone_certificate: opt_bool(v, "monotone_certificate")?.unwrap_or(false),
    }))
}

// ---------------------------------------------------------------- product

/// Pointwise product of symbols.
#[derive(Clone, Debug)]
pub struct Product {
    pub factors: Vec<SymbolRef>,
}

impl Product {
    fn varying(&self) -> Vec<&SymbolRef> {
        self.factors.iter().filter(|f| f.kind() != "constant").collect()
    }

    fn constant_part(&self) -> Result<Complex64> {
        self.factors
            .iter()
            .filter(|f| f.kind() == "constant")
            .try_fold(ONE, |acc, f| Ok(acc * f.eval_log(0.0)?))
    }
}

impl Symbol for Product {
    fn kind(&self) -> &'static str {
        "product"
    }

    fn eval(&self, r: &Frequency) -> Result<Complex64> {
        self.factors.iter().try_fold(ONE, |acc, f| Ok(acc * f.eval(r)?))
    }

    fn eval_log(&self, x: f64) -> Result<Complex64> {
        if let [only] = self.varying().as_slice() {
            return Ok(self.constant_part()? * only.eval_log(x)?);
        }
        self.factors.iter().try_fold(ONE, |acc, f| Ok(acc * f.eval_log(x)?))
    }

    fn limits_log(&self, x: f64) -> Result<(Complex64, Complex64)> {
        self.factors.iter().try_fold((ONE, ONE), |(l, r), f| {
            let (fl, fr) = f.limits_log(x)?;
            Ok((l * fl, r * fr))
        })
    }

    fn breakpoints_log(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .factors
            .iter()
            .flat_map(|f| f.breakpoints_log(lo, hi))
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn monotone_splits_log(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        match self.varying().as_slice() {
            [] => Ok(Vec::new()),
            [only] => only.monotone_splits_log(lo, hi),
            _ => Err(self.unsupported("bounded variation of a product of non-constant factors")),
        }
    }

    fn derivative_log(&self, x: f64) -> Result<Complex64> {
        let mut total = ZERO;
        for (i, f) in self.factors.iter().enumerate() {
            let mut term = f.derivative_log(x)?;
            for (j, g) in self.factors.iter().enumerate() {
                if i != j {
                    term *= g.eval_log(x)?;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Product of the factors' sup norms, an upper bound.
    fn sup_norm(&self) -> f64 {
        self.factors.iter().map(|f| f.sup_norm()).product()
    }

    fn tail(&self, eta: f64) -> Tail {
        match self.varying().as_slice() {
            [] => Tail::EventuallyConstant,
            [only] => {
                let scale = self.constant_part().map_or(f64::NAN, |c| c.norm());
                match only.tail(eta) {
                    Tail::Bounded(b) => Tail::Bounded(b * scale),
                    t => t,
                }
            }
            _ => Tail::Unknown,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "kind": "product",
            "factors": self.factors.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
        })
    }
}

pub(crate) fn parse_product(v: &Value, reg: &SymbolRegistry) -> Result<SymbolRef> {
    let factors = field(v, "factors")?
        .as_array()
        .ok_or_else(|| Error::malformed("`factors` must be an array"))?
        .iter()
        .map(|f| reg.parse(f))
        .collect::<Result<Vec<_>>>()?;
    if factors.is_empty() {
        return Err(Error::malformed("product needs at least one factor"));
    }
    Ok(std::sync::Arc::new(Product { factors }))
}
