//! Marcinkiewicz and Hörmander-Mihlin bound functionals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::Result;
use crate::json::num;
use crate::littlewood_paley::IntervalPartition;
use crate::multi_index::ReducedRational;

use super::{Symbol, Tail};

/// Total variation of `g = m∘exp` on the closed interval `[lo, hi]`, counting
/// the half-jumps at the two endpoints (values there are regulated).
pub fn variation_on(m: &dyn Symbol, lo: f64, hi: f64) -> Result<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(m.breakpoints_log(lo, hi));
    pts.extend(m.monotone_splits_log(lo, hi)?);
    pts.retain(|x| lo <= *x && *x <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut sides: Vec<(Complex64, Complex64, Complex64)> = Vec::with_capacity(pts.len());
    for &x in &pts {
        let (l, r) = m.limits_log(x)?;
        sides.push((l, m.eval_log(x)?, r));
    }
    let n = sides.len();
    let mut parts = Vec::with_capacity(3 * n);
    for (i, (l, v, r)) in sides.iter().enumerate() {
        if i > 0 {
            parts.push((v - l).norm());
        }
        if i + 1 < n {
            parts.push((r - v).norm());
            // monotone and continuous strictly between consecutive points
            parts.push((sides[i + 1].0 - r).norm());
        }
    }
    Ok(crate::numeric::compensated_sum(parts))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalDetail {
    pub k: i64,
    /// Interval in the log coordinate `x = log t`.
    pub lo: f64,
    pub hi: f64,
    pub variation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// `marcinkiewicz` or `hm`.
    pub functional: &'static str,
    pub sup_norm: f64,
    pub bv_sup: Option<f64>,
    pub hm_term: Option<f64>,
    pub bracket: f64,
    pub detail: Vec<IntervalDetail>,
    /// `(log t_max, sup up to t_max)` for the HM scan.
    pub hm_trace: Vec<(f64, f64)>,
    /// Where the sup was attained (`k`, or `log t`).
    pub argmax: Option<f64>,
    pub tail: Tail,
    pub tail_justified: bool,
    pub unbounded: bool,
}

impl BoundReport {
    pub fn to_json(&self) -> Value {
        json!({
            "functional": self.functional,
            "sup_norm": num(self.sup_norm),
            "bv_sup": self.bv_sup.map(num),
            "hm_term": self.hm_term.map(num),
            "bracket": num(self.bracket),
            "detail": self.detail.iter().map(|d| json!({
                "k": d.k, "lo": num(d.lo), "hi": num(d.hi), "variation": num(d.variation),
            })).collect::<Vec<_>>(),
            "hm_trace": self.hm_trace.iter().map(|(x, s)| json!({
                "log_t_max": num(*x), "sup": num(*s),
            })).collect::<Vec<_>>(),
            "argmax": self.argmax.map(num),
            "tail": self.tail.tag(),
            "tail_bound": match self.tail { Tail::Bounded(b) => num(b), _ => Value::Null },
            "tail_justified": self.tail_justified,
            "unbounded": self.unbounded,
        })
    }
}

/// `‖m‖_∞ + sup_{|k| <= k_range} ‖m‖_{BV(I_k)}`.
pub fn marcinkiewicz_bound(m: &dyn Symbol, eta: ReducedRational, k_range: i64) -> Result<BoundReport> {
    let partition = IntervalPartition::new(eta)?;
    let detail: Vec<IntervalDetail> = (-k_range..=k_range)
        .into_par_iter()
        .map(|k| {
            let (lo, hi) = (partition.lower_edge(k), partition.upper_edge(k));
            Ok(IntervalDetail {
                k,
                lo,
                hi,
                variation: variation_on(m, lo, hi)?,
            })
        })
        .collect::<Result<_>>()?;
    let (argmax, bv_sup) = detail
        .iter()
        .fold((0, 0.0f64), |best, d| if d.variation > best.1 { (d.k, d.variation) } else { best });
    let sup_norm = m.sup_norm();
    let tail = m.tail(partition.eta_f64());
    let tail_justified = match tail {
        Tail::EventuallyConstant | Tail::Periodic => true,
        Tail::Bounded(b) => b <= bv_sup,
        Tail::Unbounded | Tail::Unknown => false,
    };
    let unbounded = tail == Tail::Unbounded || !sup_norm.is_finite();
    Ok(BoundReport {
        functional: "marcinkiewicz",
        sup_norm,
        bv_sup: Some(bv_sup),
        hm_term: None,
        bracket: if unbounded { f64::INFINITY } else { sup_norm + bv_sup },
        detail,
        hm_trace: Vec::new(),
        argmax: Some(argmax as f64),
        tail,
        tail_justified,
        unbounded,
    })
}

/// Scan range for [`hm_bound`], in `x = log t`.
#[derive(Clone, Debug, PartialEq)]
pub struct HmConfig {
    pub x_min: f64,
    pub x_max: f64,
    /// Grid points per doubling of `t`.
    pub per_octave: usize,
}

impl Default for HmConfig {
    fn default() -> Self {
        HmConfig {
            x_min: 1.0,
            x_max: 40.0,
            per_octave: 64,
        }
    }
}

fn hm_scan(m: &dyn Symbol, lo: f64, hi: f64, step: f64) -> Result<(f64, f64)> {
    let n = ((hi - lo) / step).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect();
    let mut best = (lo, 0.0f64);
    for &x in &xs {
        let v = (x * m.derivative_log(x)?).norm();
        if v > best.1 {
            best = (x, v);
        }
    }
    // one refinement pass around the grid argmax
    let (a, b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    for i in 0..=64 {
        let x = a + (b - a) * i as f64 / 64.0;
        let v = (x * m.derivative_log(x)?).norm();
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// `‖m‖_∞ + sup_{t > e} |t log t · m'(t)|`, the sup taken on a geometric grid.
pub fn hm_bound(m: &dyn Symbol, cfg: &HmConfig) -> Result<BoundReport> {
    let step = std::f64::consts::LN_2 / cfg.per_octave.max(1) as f64;
    let half = 0.5 * cfg.x_max;
    let (_, half_sup) = hm_scan(m, cfg.x_min, half.max(cfg.x_min), step)?;
    let (arg, sup) = hm_scan(m, cfg.x_min, cfg.x_max, step)?;
    let sup_norm = m.sup_norm();
    let grows = sup > 1.5 * half_sup && sup > 0.0;
    let unbounded = grows || !sup_norm.is_finite();
    let tail = if grows { Tail::Unbounded } else { m.tail(std::f64::consts::E) };
    Ok(BoundReport {
        functional: "hm",
        sup_norm,
        bv_sup: None,
        hm_term: Some(sup),
        bracket: if unbounded { f64::INFINITY } else { sup_norm + sup },
        detail: Vec::new(),
        hm_trace: vec![(half, half_sup), (cfg.x_max, sup)],
        argmax: Some(arg),
        tail,
        tail_justified: !grows,
        unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::SymbolRegistry;

    fn sym(s: &str) -> super::super::SymbolRef {
        SymbolRegistry::default().parse_str(s).unwrap()
    }

    fn two() -> ReducedRational {
        ReducedRational::integer(2).unwrap()
    }

    /// Sum of |Δg| over a fine partition that contains both endpoints.
    fn brute_variation(m: &dyn Symbol, lo: f64, hi: f64, n: usize) -> f64 {
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        xs.windows(2)
            .map(|w| (m.eval_log(w[1]).unwrap() - m.eval_log(w[0]).unwrap()).norm())
            .sum()
    }

    #[test]
    fn constant_bracket_is_one() {
        let m = sym(r#"{"kind":"constant","value":1}"#);
        let r = marcinkiewicz_bound(m.as_ref(), two(), 40).unwrap();
        assert_eq!((r.sup_norm, r.bv_sup, r.bracket), (1.0, Some(0.0), 1.0));
        let h = hm_bound(m.as_ref(), &HmConfig::default()).unwrap();
        assert_eq!(h.bracket, 1.0);
    }

    #[test]
    fn indicator_bracket_is_two() {
        for eta in ["3/2", "2", "3", "7/5"] {
            for b in ["2", "5/3", "100"] {
                let m = sym(&format!(r#"{{"kind":"indicator","a":0,"b":"{b}","closed_right":true}}"#));
                let eta = ReducedRational::parse(eta).unwrap();
                let r = marcinkiewicz_bound(m.as_ref(), eta, 40).unwrap();
                assert!((r.bracket - 2.0).abs() < 1e-15, "b = {b}: {}", r.bracket);
                assert!(r.tail_justified);
            }
        }
        let m = sym(r#"{"kind":"indicator","a":0,"b":2,"closed_right":true}"#);
        let r = marcinkiewicz_bound(m.as_ref(), two(), 40).unwrap();
        assert_eq!(r.argmax, Some(0.0));
    }

    #[test]
    fn alternating_signs_against_brute_force() {
        let m = sym(r#"{"kind":"step_signs","eta":"2","pattern":"alternating"}"#);
        let p = IntervalPartition::new(two()).unwrap();
        let r = marcinkiewicz_bound(m.as_ref(), two(), 6).unwrap();
        for d in &r.detail {
            // the brute partition has the exact edges as first and last points
            let brute = brute_variation(m.as_ref(), p.lower_edge(d.k), p.upper_edge(d.k), 4001);
            assert!((d.variation - brute).abs() < 1e-12, "k = {}", d.k);
        }
        assert_eq!(r.bv_sup, Some(2.0));
        assert_eq!(r.bracket, 3.0);
    }

    #[test]
    fn sin_loglog_variation_matches_brute_force() {
        let m = sym(r#"{"kind":"smooth","form":"sin_loglog"}"#);
        let eta = ReducedRational::integer(3).unwrap();
        let r = marcinkiewicz_bound(m.as_ref(), eta, 5).unwrap();
        for d in r.detail.iter().filter(|d| d.hi < 1e4) {
            let brute = brute_variation(m.as_ref(), d.lo, d.hi, 200_000);
            assert!((d.variation - brute).abs() < 1e-6, "k = {}: {} vs {brute}", d.k, d.variation);
        }
    }

    #[test]
    fn hm_examples() {
        let s = sym(r#"{"kind":"smooth","form":"sin_loglog"}"#);
        let r = hm_bound(s.as_ref(), &HmConfig::default()).unwrap();
        let hm = r.hm_term.unwrap();
        assert!(hm <= 1.0 + 1e-15 && hm > 0.999, "{hm}");
        assert!(r.bracket <= 2.0 + 1e-15);
        assert!(!r.unbounded);

        let l = sym(r#"{"kind":"smooth","form":"log"}"#);
        let r = hm_bound(l.as_ref(), &HmConfig::default()).unwrap();
        assert!(r.unbounded);
        assert!((r.hm_term.unwrap() - 40.0).abs() < 1e-12);

        let ind = sym(r#"{"kind":"indicator","a":0,"b":2}"#);
        assert_eq!(hm_bound(ind.as_ref(), &HmConfig::default()).unwrap_err().code(), "unsupported");
    }

    #[test]
    fn uncertified_tables_rejected() {
        let t = sym(r#"{"kind":"tabulated","nodes":[[1,0],[2,1]],"interpolate":true}"#);
        assert_eq!(marcinkiewicz_bound(t.as_ref(), two(), 3).unwrap_err().code(), "unsupported");
        let t = sym(
            r#"{"kind":"tabulated","nodes":[[1,0],[2,1]],"interpolate":true,"monotone_certificate":true}"#,
        );
        let r = marcinkiewicz_bound(t.as_ref(), two(), 3).unwrap();
        assert!((r.bv_sup.unwrap() - 1.0).abs() < 1e-15);
    }
}
