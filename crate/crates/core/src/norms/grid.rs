//! Uniform tensor-grid quadrature on the active variables.
//!
//! On `R` equispaced points per axis the rectangle rule integrates every
//! character `e^{ikθ}` with `|k| < R` exactly, so for `p = 2q` and
//! `R > 2q·maxdeg` the grid mean of `|F|^p` is exact up to rounding.
//! Polynomial values on the grid come from inverse FFTs, one slab of the
//! first axis at a time so memory stays at `N / R_1` points.
//!
//! Past the point budget (or `max_tensor_dim` active variables) the mean is
//! estimated with a randomly shifted Korobov lattice instead.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, rng_stream};
use crate::poly::PolytorusPolynomial;

use super::{check_p, quasi_norm_flag, ErrorReport, NormConfig, NormEstimate, NormMethod, NormMethodKind};

const TAU: f64 = std::f64::consts::TAU;

/// Components re-indexed onto the compact set of active variables.
struct Compact {
    parts: Vec<Vec<(Vec<i64>, Complex64)>>,
    max_deg: Vec<i64>,
}

fn compact(parts: &[PolytorusPolynomial]) -> Compact {
    let mut vars: Vec<u32> = parts.iter().flat_map(|f| f.active_variables()).collect();
    vars.sort_unstable();
    vars.dedup();
    let d = vars.len();
    let mut max_deg = vec![0i64; d];
    let parts = parts
        .iter()
        .map(|f| {
            f.terms()
                .map(|(nu, a)| {
                    let mut e = vec![0i64; d];
                    for (j, x) in nu.iter() {
                        let axis = vars.binary_search(&j).expect("active variable");
                        e[axis] = x;
                        max_deg[axis] = max_deg[axis].max(x.abs());
                    }
                    (e, a)
                })
                .collect()
        })
        .collect();
    Compact { parts, max_deg }
}

/// `‖F‖_p` by tensor-grid quadrature.
pub fn norm_grid(f: &PolytorusPolynomial, p: f64, cfg: &NormConfig) -> Result<NormEstimate> {
    grid_square_norm(std::slice::from_ref(f), p, cfg)
}

fn grid_square_norm(parts: &[PolytorusPolynomial], p: f64, cfg: &NormConfig) -> Result<NormEstimate> {
    check_p(p)?;
    let c = compact(parts);
    let d = c.max_deg.len();
    let mut flags = quasi_norm_flag(p);

    if d == 0 {
        // constants only
        let s: f64 = c
            .parts
            .iter()
            .flat_map(|t| t.iter().map(|(_, a)| a.norm_sqr()))
            .sum();
        let v = s.sqrt();
        return Ok(NormEstimate {
            value: v,
            p,
            method: NormMethodKind::Grid,
            error_report: Some(ErrorReport::Grid {
                levels: vec![(vec![], v)],
                delta: Some(0.0),
            }),
            flags,
        });
    }

    let min_res: Vec<usize> = c.max_deg.iter().map(|&m| 2 * m as usize + 1).collect();
    let res: Vec<usize> = match cfg.resolution {
        Some(r) => {
            if let Some((axis, &need)) = min_res.iter().enumerate().find(|(_, &m)| r < m) {
                return Err(Error::invalid(format!(
                    "resolution {r} below 2·maxdeg+1 = {need} on active axis {axis}"
                )));
            }
            vec![r; d]
        }
        None => min_res.iter().map(|m| m * cfg.oversample.max(1)).collect(),
    };

    let total = res.iter().try_fold(1u128, |acc, &r| acc.checked_mul(r as u128));
    let fits = matches!(total, Some(t) if t <= cfg.budget as u128);
    if d > cfg.max_tensor_dim || !fits {
        flags.push(format!(
            "tensor grid skipped ({d} active variables); randomized lattice estimate"
        ));
        return lattice_estimate(&c, p, cfg, flags);
    }

    let mut levels = Vec::new();
    let coarse: Vec<usize> = res.iter().map(|r| r / 2).collect();
    if coarse.iter().zip(&min_res).all(|(c, m)| c >= m) {
        let v = grid_mean(&c, &coarse, p).powf(1.0 / p);
        levels.push((coarse, v));
    }
    let v = grid_mean(&c, &res, p).powf(1.0 / p);
    levels.push((res, v));
    let delta = match levels.as_slice() {
        [(_, a), (_, b)] => Some((a - b).abs()),
        _ => None,
    };
    Ok(NormEstimate {
        value: v,
        p,
        method: NormMethodKind::Grid,
        error_report: Some(ErrorReport::Grid { levels, delta }),
        flags,
    })
}

/// Values of `norm_grid` along a doubling schedule of resolutions.
pub fn refinement_trace(
    f: &PolytorusPolynomial,
    p: f64,
    resolutions: &[usize],
) -> Result<Vec<f64>> {
    check_p(p)?;
    let c = compact(std::slice::from_ref(f));
    let d = c.max_deg.len();
    if d == 0 {
        let v = norm_grid(f, p, &NormConfig::default())?.value;
        return Ok(vec![v; resolutions.len()]);
    }
    resolutions
        .iter()
        .map(|&r| {
            if c.max_deg.iter().any(|&m| r < 2 * m as usize + 1) {
                return Err(Error::invalid(format!("resolution {r} too coarse")));
            }
            Ok(grid_mean(&c, &vec![r; d], p).powf(1.0 / p))
        })
        .collect()
}

fn plans(shape: &[usize]) -> Vec<Arc<dyn Fft<f64>>> {
    let mut planner = FftPlanner::new();
    shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect()
}

/// In-place unnormalized inverse DFT over a row-major array.
fn inverse_fft_nd(data: &mut [Complex64], shape: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    let total: usize = shape.iter().product();
    let mut line = Vec::new();
    for (axis, &len) in shape.iter().enumerate() {
        if len == 1 {
            continue;
        }
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (len * stride);
        line.resize(len, Complex64::default());
        for o in 0..outer {
            for s in 0..stride {
                let base = o * len * stride + s;
                for k in 0..len {
                    line[k] = data[base + k * stride];
                }
                plans[axis].process(&mut line);
                for k in 0..len {
                    data[base + k * stride] = line[k];
                }
            }
        }
    }
}

fn flat_index(e: &[i64], shape: &[usize]) -> usize {
    e.iter()
        .zip(shape)
        .fold(0usize, |acc, (&x, &n)| acc * n + x.rem_euclid(n as i64) as usize)
}

/// Grid mean of `(Σ_k |F_k|²)^{p/2}`.
fn grid_mean(c: &Compact, res: &[usize], p: f64) -> f64 {
    let half = p / 2.0;
    let total: usize = res.iter().product();
    if res.len() == 1 {
        let plans = plans(res);
        let mut sq = vec![0.0f64; total];
        for part in &c.parts {
            let mut buf = vec![Complex64::default(); total];
            for (e, a) in part {
                buf[flat_index(e, res)] += a;
            }
            inverse_fft_nd(&mut buf, res, &plans);
            for (s, v) in sq.iter_mut().zip(&buf) {
                *s += v.norm_sqr();
            }
        }
        return compensated_sum(sq.into_iter().map(|s| s.powf(half))) / total as f64;
    }

    let r0 = res[0];
    let rest = &res[1..];
    let m: usize = rest.iter().product();
    let plans = plans(rest);
    let slab_sums: Vec<f64> = (0..r0)
        .into_par_iter()
        .map(|k| {
            let mut sq = vec![0.0f64; m];
            let mut buf = vec![Complex64::default(); m];
            for part in &c.parts {
                buf.iter_mut().for_each(|b| *b = Complex64::default());
                for (e, a) in part {
                    let turns = (e[0] * k as i64).rem_euclid(r0 as i64) as f64 / r0 as f64;
                    buf[flat_index(&e[1..], rest)] += a * Complex64::cis(TAU * turns);
                }
                inverse_fft_nd(&mut buf, rest, &plans);
                for (s, v) in sq.iter_mut().zip(&buf) {
                    *s += v.norm_sqr();
                }
            }
            compensated_sum(sq.into_iter().map(|s| s.powf(half)))
        })
        .collect();
    compensated_sum(slab_sums) / total as f64
}

fn next_prime(mut n: usize) -> usize {
    let is_prime = |n: usize| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
    while !is_prime(n) {
        n += 1;
    }
    n
}

fn lattice_estimate(
    c: &Compact,
    p: f64,
    cfg: &NormConfig,
    flags: Vec<String>,
) -> Result<NormEstimate> {
    let d = c.max_deg.len();
    let n = next_prime(cfg.lattice_points.max(17));
    let shifts = cfg.lattice_shifts.max(2);
    if (n as u128) * (shifts as u128) > cfg.budget as u128 {
        return Err(Error::BudgetExhausted(format!(
            "lattice needs {n}×{shifts} points, budget is {}",
            cfg.budget
        )));
    }
    let mut rng = rng_stream(cfg.seed, 0x1a77_1ce);
    let a = rng.gen_range(2..n as u64);
    let mut gen = vec![1u64; d];
    for j in 1..d {
        gen[j] = gen[j - 1] * a % n as u64;
    }
    let offsets: Vec<Vec<f64>> = (0..shifts)
        .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let half = p / 2.0;
    let shift_means: Vec<f64> = offsets
        .par_iter()
        .map(|delta| {
            let vals = (0..n).map(|i| {
                let theta: Vec<f64> = (0..d)
                    .map(|j| {
                        let x = (i as u64 * gen[j] % n as u64) as f64 / n as f64 + delta[j];
                        TAU * x.fract()
                    })
                    .collect();
                let s: f64 = c
                    .parts
                    .iter()
                    .map(|part| {
                        part.iter()
                            .map(|(e, a)| {
                                let ph: f64 = e.iter().zip(&theta).map(|(&x, t)| x as f64 * t).sum();
                                a * Complex64::cis(ph)
                            })
                            .sum::<Complex64>()
                            .norm_sqr()
                    })
                    .sum();
                s.powf(half)
            });
            compensated_sum(vals) / n as f64
        })
        .collect();
    let mean = compensated_sum(shift_means.iter().copied()) / shifts as f64;
    let var = shift_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (shifts - 1) as f64;
    let se = (var / shifts as f64).sqrt();
    let value = mean.max(0.0).powf(1.0 / p);
    let half_width = if mean > 0.0 {
        1.96 * se * value / (p * mean)
    } else {
        0.0
    };
    Ok(NormEstimate {
        value,
        p,
        method: NormMethodKind::Grid,
        error_report: Some(ErrorReport::Lattice {
            points: n,
            shifts,
            std_error: se,
            half_width,
        }),
        flags,
    })
}

pub struct Grid;

impl NormMethod for Grid {
    fn name(&self) -> &'static str {
        "grid"
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
        grid_square_norm(parts, p, cfg)
    }
}
