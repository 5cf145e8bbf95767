//! Time averages along the Kronecker flow:
//! `((1/2T) ∫_{-T}^{T} |Σ a_n n^{-it}|^p dt)^{1/p}`.
//!
//! On the flow `z^ν = r_ν^{-it}`, so every term is a pure oscillation with
//! frequency `log r_ν`. The interval is cut into panels no wider than one
//! period of the fastest beat `2π/Λ` (`Λ` = spread of the frequencies) and
//! each panel gets a Gauss-Legendre rule.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, gauss_legendre};
use crate::poly::{bohr_lift, DirichletPolynomial, PolytorusPolynomial};

use super::{check_p, quasi_norm_flag, ErrorReport, NormConfig, NormEstimate, NormMethod, NormMethodKind};

type Spectrum = Vec<Vec<(f64, Complex64)>>;

fn spectrum(parts: &[PolytorusPolynomial]) -> Result<Spectrum> {
    parts
        .iter()
        .map(|f| {
            f.terms()
                .map(|(nu, a)| Ok((nu.log_rational()?, a)))
                .collect()
        })
        .collect()
}

fn spread(sp: &Spectrum) -> f64 {
    let (lo, hi) = sp
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(l, _)| {
            (lo.min(l), hi.max(l))
        });
    if hi > lo {
        hi - lo
    } else {
        0.0
    }
}

fn integrand(sp: &Spectrum, t: f64, half_p: f64) -> f64 {
    let s: f64 = sp
        .iter()
        .map(|part| {
            part.iter()
                .map(|&(l, a)| a * Complex64::cis(-t * l))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    s.powf(half_p)
}

fn average(sp: &Spectrum, p: f64, t_half: f64, offset: f64, order: usize) -> f64 {
    let lambda = spread(sp);
    if lambda == 0.0 {
        // the integrand is constant
        return integrand(sp, offset, p / 2.0);
    }
    let panels = ((2.0 * t_half * lambda / std::f64::consts::TAU).ceil() as usize).max(1);
    let width = 2.0 * t_half / panels as f64;
    let (nodes, weights) = gauss_legendre(order.max(1));
    let start = offset - t_half;
    let sums: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let mid = start + (k as f64 + 0.5) * width;
            compensated_sum(
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(x, w)| w * integrand(sp, mid + 0.5 * width * x, p / 2.0)),
            )
        })
        .collect();
    // Σ w = 2 per panel, so the mean is the panel total over 2·panels
    compensated_sum(sums) / (2.0 * panels as f64)
}

/// `(1/2T) ∫_{τ-T}^{τ+T} (Σ_k |F_k(φ(t))|²)^{p/2} dt`, the `p`-th power mean.
pub fn ergodic_average(
    parts: &[PolytorusPolynomial],
    p: f64,
    t_half: f64,
    offset: f64,
    cfg: &NormConfig,
) -> Result<f64> {
    check_p(p)?;
    if !(t_half.is_finite() && t_half > 0.0) || !offset.is_finite() {
        return Err(Error::invalid(format!(
            "averaging window T = {t_half}, offset {offset} not usable"
        )));
    }
    Ok(average(&spectrum(parts)?, p, t_half, offset, cfg.gl_order))
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::invalid("T schedule is empty"));
    }
    if schedule.iter().any(|t| !(t.is_finite() && *t > 0.0))
        || schedule.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::invalid(format!(
            "T schedule {schedule:?} must be positive and strictly increasing"
        )));
    }
    Ok(())
}

/// Ergodic norm of `(Σ_k |F_k|²)^{1/2}` along `cfg.t_schedule`; the value is
/// the one at the largest `T`.
pub fn norm_ergodic(parts: &[PolytorusPolynomial], p: f64, cfg: &NormConfig) -> Result<NormEstimate> {
    check_p(p)?;
    check_schedule(&cfg.t_schedule)?;
    let sp = spectrum(parts)?;
    let trace: Vec<(f64, f64)> = cfg
        .t_schedule
        .iter()
        .map(|&t| (t, average(&sp, p, t, 0.0, cfg.gl_order).max(0.0).powf(1.0 / p)))
        .collect();
    Ok(NormEstimate {
        value: trace.last().expect("nonempty schedule").1,
        p,
        method: NormMethodKind::Ergodic,
        error_report: Some(ErrorReport::Ergodic { trace }),
        flags: quasi_norm_flag(p),
    })
}

pub fn norm_ergodic_dirichlet(f: &DirichletPolynomial, p: f64, schedule: &[f64]) -> Result<NormEstimate> {
    let cfg = NormConfig {
        t_schedule: schedule.to_vec(),
        ..NormConfig::default()
    };
    norm_ergodic(&[bohr_lift(f)?], p, &cfg)
}

pub struct Ergodic;

impl NormMethod for Ergodic {
    fn name(&self) -> &'static str {
        "ergodic"
    }

    fn accepts(&self, p: f64) -> bool {
        p.is_finite() && p > 0.0
    }

    fn square_norm(
        &self,
        parts: &[PolytorusPolynomial],
        p: f64,
        cfg: &NormConfig,
    ) -> Result<NormEstimate> {
        norm_ergodic(parts, p, cfg)
    }
}
