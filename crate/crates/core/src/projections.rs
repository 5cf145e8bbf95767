//! Partial sums `P_N`, the order projection on `{ν : r_ν >= 1}`, the
//! Hilbert transform of the order, and a truncation benchmark.
//!
//! Order: `ν ∈ P` iff `r_ν <= 1`. `sgn ν = +1` on `P \ {0}`, `-1` off `P`,
//! `0` at `ν = 0`.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ensemble::unit_disk;
use crate::error::{Error, Result};
use crate::json::num;
use crate::multi_index::{factorize, MultiIndex};
use crate::norms::{even_half, norm_dirichlet, norm_even_exact_dirichlet, NormConfig, NormRegistry};
use crate::numeric::{ols_slope, rng_stream};
use crate::poly::{DirichletPolynomial, PolytorusPolynomial};

/// `sgn ν` for the order `P = {r_ν <= 1}`, compared exactly.
pub fn order_sign(nu: &MultiIndex) -> Result<i8> {
    Ok(match nu.cmp_rational_to_one()? {
        Ordering::Less => 1,
        Ordering::Equal => 0,
        Ordering::Greater => -1,
    })
}

fn keep_by_sign(f: &PolytorusPolynomial, keep: impl Fn(i8) -> bool) -> Result<PolytorusPolynomial> {
    let mut out = Vec::with_capacity(f.len());
    for (nu, a) in f.terms() {
        if keep(order_sign(nu)?) {
            out.push((nu.clone(), a));
        }
    }
    Ok(PolytorusPolynomial::from_terms(out))
}

/// `Σ_{n <= N} a_n n^{-s}`.
pub fn partial_sum(f: &DirichletPolynomial, n: u64) -> DirichletPolynomial {
    DirichletPolynomial::from_terms(f.terms().take_while(|&(k, _)| k <= n)).expect("indices kept")
}

/// Keep the coefficients with `r_ν >= 1`; `ν = 0` stays.
pub fn riesz_project(f: &PolytorusPolynomial) -> Result<PolytorusPolynomial> {
    keep_by_sign(f, |s| s <= 0)
}

/// Keep the coefficients on the cone `P`, that is `r_ν <= 1`; `ν = 0` stays.
pub fn cone_project(f: &PolytorusPolynomial) -> Result<PolytorusPolynomial> {
    keep_by_sign(f, |s| s >= 0)
}

/// `e_ν ↦ -i·sgn(ν)·e_ν`.
pub fn hilbert_transform(f: &PolytorusPolynomial) -> Result<PolytorusPolynomial> {
    let mut out = Vec::with_capacity(f.len());
    for (nu, a) in f.terms() {
        let s = order_sign(nu)?;
        if s != 0 {
            out.push((nu.clone(), a * Complex64::new(0.0, -(s as f64))));
        }
    }
    Ok(PolytorusPolynomial::from_terms(out))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchauderCheck {
    pub n: u64,
    pub holds: bool,
    pub deviation: f64,
    pub truncated: DirichletPolynomial,
}

impl SchauderCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "N": self.n,
            "holds": self.holds,
            "deviation": num(self.deviation),
            "truncated": crate::json::dirichlet_to_json(&self.truncated),
        })
    }
}

/// Compares `P_N f` with `e_{ν(N)}·Π(e_{-ν(N)}·f)` coefficientwise, where
/// `Π` is [`cone_project`]. The shifted frequencies are `n/N`, so membership
/// is an exact comparison of `n` with `N`.
pub fn schauder_identity_check(f: &DirichletPolynomial, n: u64) -> Result<SchauderCheck> {
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let shift = factorize(n)?;
    let lifted = crate::poly::bohr_lift(f)?;
    let via_order = cone_project(&lifted.shift(&shift.neg())?)?.shift(&shift)?;
    let direct = crate::poly::bohr_lift(&partial_sum(f, n))?;
    let deviation = via_order.max_coeff_deviation(&direct);
    Ok(SchauderCheck {
        n,
        holds: deviation == 0.0,
        deviation,
        truncated: crate::poly::bohr_drop(&via_order)?,
    })
}

/// Bench members: member `i` is a dense random polynomial of length
/// `L_i = ⌈max_index^{i/(size-1)}⌉`, a geometric ladder from 1 to `max_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderEnsemble {
    pub seed: u64,
    pub size: usize,
    pub max_index: u64,
}

impl LadderEnsemble {
    pub fn new(seed: u64, size: usize, max_index: u64) -> Result<Self> {
        if size == 0 || max_index == 0 {
            return Err(Error::invalid("ladder ensemble needs size and max_index >= 1"));
        }
        Ok(LadderEnsemble {
            seed,
            size,
            max_index,
        })
    }

    pub fn length(&self, i: usize) -> u64 {
        if self.size == 1 {
            return self.max_index;
        }
        let e = i as f64 / (self.size - 1) as f64;
        ((self.max_index as f64).powf(e).ceil() as u64).clamp(1, self.max_index)
    }

    pub fn member(&self, i: usize) -> DirichletPolynomial {
        let mut rng = rng_stream(self.seed, i as u64);
        DirichletPolynomial::from_terms((1..=self.length(i)).map(|n| (n, unit_disk(&mut rng))))
            .expect("indices start at 1")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: u64,
    pub max_ratio: f64,
    pub argmax: usize,
    /// Largest ratio among members longer than `N`; `None` when every member fits.
    pub max_truncated: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationBench {
    pub p: f64,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    /// OLS fit of `max_ratio` against `log N`.
    pub slope: f64,
    pub slope_se: f64,
    pub theorem_regime: bool,
}

impl TruncationBench {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,max_ratio,argmax\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.n, crate::json::format_float(r.max_ratio), r.argmax));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": num(self.p),
            "seed": self.seed,
            "rows": self.rows.iter().map(|r| json!({
                "N": r.n, "max_ratio": num(r.max_ratio), "argmax": r.argmax,
                "max_truncated": r.max_truncated.map_or(Value::Null, num),
            })).collect::<Vec<_>>(),
            "slope": num(self.slope),
            "slope_se": num(self.slope_se),
            "theorem_regime": self.theorem_regime,
        })
    }
}

fn dirichlet_norm(
    f: &DirichletPolynomial,
    p: f64,
    registry: &NormRegistry,
    method: &str,
    cfg: &NormConfig,
) -> Result<f64> {
    match even_half(p) {
        Some(q) if method == "auto" || method == "even" => Ok(norm_even_exact_dirichlet(f, q)?.value),
        _ => Ok(norm_dirichlet(registry, method, f, p, cfg)?.value),
    }
}

/// `sup_i ‖P_N f_i‖_p / ‖f_i‖_p` for each `N` of the schedule.
pub fn truncation_norm_bench(
    p: f64,
    schedule: &[u64],
    ensemble: &LadderEnsemble,
    registry: &NormRegistry,
    method: &str,
    cfg: &NormConfig,
) -> Result<TruncationBench> {
    if schedule.is_empty() || schedule.contains(&0) {
        return Err(Error::invalid("N schedule must be non-empty and positive"));
    }
    let members: Vec<DirichletPolynomial> = (0..ensemble.size).map(|i| ensemble.member(i)).collect();
    let full: Vec<f64> = members
        .par_iter()
        .map(|f| dirichlet_norm(f, p, registry, method, cfg))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let ratios: Vec<f64> = members
            .par_iter()
            .zip(&full)
            .map(|(f, &nf)| {
                if f.max_index() <= n {
                    return Ok(1.0);
                }
                Ok(dirichlet_norm(&partial_sum(f, n), p, registry, method, cfg)? / nf)
            })
            .collect::<Result<_>>()?;
        let (argmax, max_ratio) = ratios
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &r)| if r > best.1 { (i, r) } else { best });
        let max_truncated = members
            .iter()
            .zip(&ratios)
            .filter(|(f, _)| f.max_index() > n)
            .map(|(_, &r)| r)
            .reduce(f64::max);
        rows.push(BenchRow {
            n,
            max_ratio,
            argmax,
            max_truncated,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    let (slope, slope_se) = ols_slope(&xs, &ys);
    Ok(TruncationBench {
        p,
        seed: ensemble.seed,
        rows,
        slope,
        slope_se,
        theorem_regime: p > 1.0,
    })
}
