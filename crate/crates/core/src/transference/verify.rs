use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::json::num;
use crate::multi_index::MultiIndex;
use crate::multipliers::{apply_multiplier, Frequency, Symbol};
use crate::norms::{NormConfig, NormMethod, NormRegistry};
use crate::numeric::{compensated_sum, rng_stream};
use crate::poly::PolytorusPolynomial;

use super::approx::{approx_logs, RationalApproximation};
use super::matrix::{build_matrix_a, build_matrix_b, change_variables, MatrixB, UnimodularMatrix};

/// `M(ν) = m(exp(Σ_j a_j ν_j / Q))`.
pub fn approx_symbol_m(m: &dyn Symbol, r: &RationalApproximation, nu: &MultiIndex) -> Result<Complex64> {
    if nu.dimension() as usize > r.dim() {
        return Err(Error::invalid(format!(
            "{nu} has more variables than the approximation ({})",
            r.dim()
        )));
    }
    let mut s = 0i128;
    for (j, e) in nu.iter() {
        s += r.a[j as usize - 1] as i128 * e as i128;
    }
    m.eval_log(s as f64 / r.q as f64)
}

/// `sup_{ν ∈ supp f} |M(ν) - m(r_ν)|`.
pub fn symbol_gap(m: &dyn Symbol, r: &RationalApproximation, f: &PolytorusPolynomial) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for (nu, _) in f.terms() {
        let d = approx_symbol_m(m, r, nu)? - m.eval(&Frequency::of(nu)?)?;
        gap = gap.max(d.norm());
    }
    Ok(gap)
}

/// One numerically asserted inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    fn le(name: &'static str, lhs: f64, rhs: f64) -> Check {
        Check {
            name,
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }

    fn to_json(&self) -> Value {
        json!({"name": self.name, "lhs": num(self.lhs), "rhs": num(self.rhs), "holds": self.holds})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferenceReport {
    pub direction: &'static str,
    pub p: f64,
    pub epsilon: Option<f64>,
    pub approximation: Option<RationalApproximation>,
    pub q_max_used: Option<i64>,
    pub matrix_a: Option<UnimodularMatrix>,
    pub matrix_b: Option<MatrixB>,
    /// Achieved `sup |M(ν) - m(r_ν)|` (forward) or
    /// `sup |m(e^{γn}) - m(r_{(n,-n)})|` (backward) over the support.
    pub gap: f64,
    pub norm_f: f64,
    pub norm_t_m: f64,
    pub norm_t_mr: f64,
    /// Forward: largest fiber ratio of the one-variable multiplier `n ↦ m(e^{n/Q})`.
    pub reference: f64,
    pub fibers: usize,
    pub fibers_exact: bool,
    pub l1_mass: f64,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl TransferenceReport {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("direction".into(), self.direction.into());
        m.insert("p".into(), num(self.p));
        m.insert("epsilon".into(), self.epsilon.map_or(Value::Null, num));
        m.insert(
            "approximation".into(),
            self.approximation.as_ref().map_or(Value::Null, |r| r.to_json()),
        );
        m.insert("Q_max_used".into(), self.q_max_used.map_or(Value::Null, Value::from));
        m.insert(
            "matrix_A".into(),
            self.matrix_a.as_ref().map_or(Value::Null, |a| a.to_json()),
        );
        m.insert(
            "matrix_B".into(),
            self.matrix_b.as_ref().map_or(Value::Null, |b| b.to_json()),
        );
        m.insert("gap".into(), num(self.gap));
        m.insert("norm_f".into(), num(self.norm_f));
        m.insert("norm_T_M_f".into(), num(self.norm_t_m));
        m.insert("norm_T_mr_f".into(), num(self.norm_t_mr));
        m.insert("reference".into(), num(self.reference));
        m.insert("fibers".into(), self.fibers.into());
        m.insert("fibers_exact".into(), self.fibers_exact.into());
        m.insert("l1_mass".into(), num(self.l1_mass));
        m.insert("tolerance".into(), num(self.tolerance));
        m.insert(
            "checks".into(),
            Value::Array(self.checks.iter().map(Check::to_json).collect()),
        );
        m.insert("pass".into(), self.pass.into());
        Value::Object(m)
    }
}

/// Knobs for the verification routines.
#[derive(Clone, Debug)]
pub struct TransferConfig {
    pub norms: NormConfig,
    pub method: String,
    /// Escalation stops once `Q_max` would exceed this.
    pub q_max_cap: i64,
    pub b_cap: i64,
    /// Fiber grids larger than this are replaced by seeded random fibers.
    pub fiber_budget: usize,
    pub fiber_samples: usize,
    /// Relative slack for floating-point comparisons.
    pub rel_tol: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            norms: NormConfig::default(),
            method: "auto".into(),
            q_max_cap: 1_000_000,
            b_cap: 1_000_000,
            fiber_budget: 200_000,
            fiber_samples: 2048,
            rel_tol: 1e-10,
        }
    }
}

/// Restrict `g` (already in the new coordinates) to the fiber through `θ''`:
/// a polynomial in the first variable only.
fn fiber(g: &PolytorusPolynomial, theta: &[f64]) -> PolytorusPolynomial {
    let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
    for (nu, a) in g.terms() {
        let mut phase = 0.0;
        for (j, e) in nu.iter().filter(|(j, _)| *j >= 2) {
            phase += e as f64 * theta[j as usize - 2];
        }
        *acc.entry(nu.exponent(1)).or_default() += a * Complex64::cis(phase);
    }
    PolytorusPolynomial::from_terms(
        acc.into_iter()
            .map(|(n, c)| (MultiIndex::from_pairs([(1, n)]).expect("variable 1"), c)),
    )
}

struct FiberStats {
    ratio: f64,
    mean_t_pth: f64,
    count: usize,
    exact: bool,
}

fn fiber_stats(
    g: &PolytorusPolynomial,
    tg: &PolytorusPolynomial,
    p: f64,
    route: &dyn NormMethod,
    cfg: &TransferConfig,
    scale: f64,
) -> Result<FiberStats> {
    let d = g.dimension().max(1) as usize;
    // grid fine enough that the mean of |·|^p over θ'' is exact for even p
    let mult = (p / 2.0).ceil() as i64;
    let res: Vec<usize> = (2..=d as u32)
        .map(|j| {
            let deg = g
                .terms()
                .chain(tg.terms())
                .map(|(nu, _)| nu.exponent(j).abs())
                .max()
                .unwrap_or(0);
            (2 * mult * deg + 1) as usize
        })
        .collect();
    let total = res.iter().try_fold(1usize, |a, &r| a.checked_mul(r));
    let exact = matches!(total, Some(t) if t <= cfg.fiber_budget);
    let points: Vec<Vec<f64>> = if exact {
        let total = total.expect("checked");
        (0..total)
            .map(|mut i| {
                let mut th = vec![0.0; res.len()];
                for (axis, &r) in res.iter().enumerate().rev() {
                    th[axis] = std::f64::consts::TAU * (i % r) as f64 / r as f64;
                    i /= r;
                }
                th
            })
            .collect()
    } else {
        let mut rng = rng_stream(cfg.norms.seed, 0xf1be5);
        (0..cfg.fiber_samples)
            .map(|_| (0..res.len()).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect())
            .collect()
    };
    let per: Vec<(f64, f64)> = points
        .par_iter()
        .map(|th| {
            let h = route.norm(&fiber(g, th), p, &cfg.norms)?.value;
            let th_ = route.norm(&fiber(tg, th), p, &cfg.norms)?.value;
            Ok((h, th_))
        })
        .collect::<Result<_>>()?;
    let ratio = per
        .iter()
        .filter(|(h, _)| *h > 1e-12 * scale)
        .map(|(h, t)| t / h)
        .fold(0.0, f64::max);
    let mean_t_pth = compensated_sum(per.iter().map(|(_, t)| t.powf(p))) / per.len() as f64;
    Ok(FiberStats {
        ratio,
        mean_t_pth,
        count: per.len(),
        exact,
    })
}

/// Forward direction: `‖T_M f‖_p <= ‖m∘exp(·/Q)‖_{M_p(T)} ‖f‖_p`, with `M`
/// close to `m∘r` on the support of `f`.
pub fn verify_forward(
    m: &dyn Symbol,
    f: &PolytorusPolynomial,
    p: f64,
    epsilon: f64,
    q_max: i64,
    cfg: &TransferConfig,
) -> Result<TransferenceReport> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let d = f.dimension().max(2) as usize;
    let mut qm = q_max.max(1);
    let (approx, gap) = loop {
        let r = approx_logs(d, qm)?;
        let gap = symbol_gap(m, &r, f)?;
        if gap < epsilon {
            break (r, gap);
        }
        let next = qm.saturating_mul(10);
        if next > cfg.q_max_cap {
            return Err(Error::Unattainable(format!(
                "sup |M - m∘r| = {gap:e} >= {epsilon:e} at Q_max = {qm}; cap {} reached",
                cfg.q_max_cap
            )));
        }
        qm = next;
    };
    let a = build_matrix_a(&approx)?;
    let registry = NormRegistry::default();
    let route = registry.resolve(&cfg.method, p)?;

    let t_m = PolytorusPolynomial::from_terms(
        f.terms()
            .map(|(nu, c)| Ok((nu.clone(), c * approx_symbol_m(m, &approx, nu)?)))
            .collect::<Result<Vec<_>>>()?,
    );
    let t_mr = apply_multiplier(m, f)?;
    let est_f = route.norm(f, p, &cfg.norms)?;
    let est_tm = route.norm(&t_m, p, &cfg.norms)?;
    let est_tmr = route.norm(&t_mr, p, &cfg.norms)?;
    let g = change_variables(f, &a)?;
    let tg = change_variables(&t_m, &a)?;
    let est_tg = route.norm(&tg, p, &cfg.norms)?;

    let scale = est_f.value.max(f.l1_mass()).max(1.0);
    let tol = cfg.rel_tol * scale
        + est_f.tolerance()
        + est_tm.tolerance()
        + est_tmr.tolerance()
        + est_tg.tolerance();
    let stats = fiber_stats(&g, &tg, p, route.as_ref(), cfg, scale)?;
    let l1 = f.l1_mass();

    let mut checks = vec![
        Check::le("T_M f <= reference * f", est_tm.value, stats.ratio * est_f.value + tol),
        Check::le(
            "|T_M f - T_mr f| <= gap * l1",
            (est_tm.value - est_tmr.value).abs(),
            gap * l1 + tol,
        ),
        Check::le("change of variables preserves the norm", (est_tg.value - est_tm.value).abs(), tol),
        Check::le(
            "T_mr f <= reference * f + gap * l1",
            est_tmr.value,
            stats.ratio * est_f.value + gap * l1 + tol,
        ),
    ];
    if stats.exact && crate::norms::even_half(p).is_some() {
        let lhs = est_tm.value.powf(p);
        checks.push(Check::le(
            "fiber average equals the norm",
            (stats.mean_t_pth - lhs).abs(),
            cfg.rel_tol * lhs.max(1.0) * 100.0,
        ));
    }
    if p == 2.0 {
        checks.push(Check::le("p = 2 reference <= sup |m|", stats.ratio, m.sup_norm() * (1.0 + cfg.rel_tol)));
    }
    let pass = checks.iter().all(|c| c.holds);
    Ok(TransferenceReport {
        direction: "forward",
        p,
        epsilon: Some(epsilon),
        approximation: Some(approx),
        q_max_used: Some(qm),
        matrix_a: Some(a),
        matrix_b: None,
        gap,
        norm_f: est_f.value,
        norm_t_m: est_tm.value,
        norm_t_mr: est_tmr.value,
        reference: stats.ratio,
        fibers: stats.count,
        fibers_exact: stats.exact,
        l1_mass: l1,
        tolerance: tol,
        checks,
        pass,
    })
}

/// Backward direction: a one-variable `g` is carried to `(n, -n)` on two
/// primes with `log p_j - log p_k ≈ γ`, and `‖T_{m∘exp(γ·)} g‖_p` is
/// compared with `‖T_{m∘r} G‖_p`.
pub fn verify_backward(
    m: &dyn Symbol,
    g: &PolytorusPolynomial,
    gamma: f64,
    p: f64,
    delta: f64,
    cfg: &TransferConfig,
) -> Result<TransferenceReport> {
    if g.active_variables().iter().any(|&j| j != 1) {
        return Err(Error::invalid("backward verification needs a polynomial in z_1 only"));
    }
    let n_max = g.terms().map(|(nu, _)| nu.exponent(1).unsigned_abs()).max().unwrap_or(0).max(1);
    let b = build_matrix_b(gamma, n_max, delta, cfg.b_cap)?;
    let registry = NormRegistry::default();
    let route = registry.resolve(&cfg.method, p)?;

    let mut lifted = Vec::with_capacity(g.len());
    let mut one_var = Vec::with_capacity(g.len());
    let mut t_lifted = Vec::with_capacity(g.len());
    let mut gap: f64 = 0.0;
    for (nu, c) in g.terms() {
        let n = nu.exponent(1);
        let v = MultiIndex::from_dense(&[n, -n]);
        // B(n, -n) = (n, 0)
        if b.matrix.apply(&v)? != MultiIndex::from_dense(&[n, 0]) {
            return Err(Error::invalid("B does not send (n, -n) to (n, 0)"));
        }
        let on_primes = MultiIndex::from_pairs([(b.j, n), (b.k, -n)])?;
        let line = m.eval_log(gamma * n as f64)?;
        let torus = m.eval(&Frequency::of(&on_primes)?)?;
        gap = gap.max((line - torus).norm());
        one_var.push((nu.clone(), c * line));
        t_lifted.push((on_primes.clone(), c * torus));
        lifted.push((on_primes, c));
    }
    let big_g = PolytorusPolynomial::from_terms(lifted);
    let t_line = PolytorusPolynomial::from_terms(one_var);
    let t_torus = PolytorusPolynomial::from_terms(t_lifted);

    let est_g = route.norm(g, p, &cfg.norms)?;
    let est_big = route.norm(&big_g, p, &cfg.norms)?;
    let est_line = route.norm(&t_line, p, &cfg.norms)?;
    let est_torus = route.norm(&t_torus, p, &cfg.norms)?;
    let l1 = g.l1_mass();
    let scale = est_g.value.max(l1).max(1.0);
    let tol = cfg.rel_tol * scale
        + est_g.tolerance()
        + est_big.tolerance()
        + est_line.tolerance()
        + est_torus.tolerance();
    let checks = vec![
        Check::le("line side <= polytorus side + gap * l1", est_line.value, est_torus.value + gap * l1 + tol),
        Check::le("|line side - polytorus side| <= gap * l1", (est_line.value - est_torus.value).abs(), gap * l1 + tol),
        Check::le("lift preserves the norm", (est_big.value - est_g.value).abs(), tol),
    ];
    let pass = checks.iter().all(|c| c.holds);
    Ok(TransferenceReport {
        direction: "backward",
        p,
        epsilon: None,
        approximation: None,
        q_max_used: None,
        matrix_a: None,
        matrix_b: Some(b),
        gap,
        norm_f: est_g.value,
        norm_t_m: est_line.value,
        norm_t_mr: est_torus.value,
        reference: est_big.value,
        fibers: 0,
        fibers_exact: true,
        l1_mass: l1,
        tolerance: tol,
        checks,
        pass,
    })
}
