//! Block decompositions along `I_k = [e^{η^k}, e^{η^{k+1}})`, square
//! functions, random-sign averages and the martingale differences `Δ_N`.
//!
//! In the log coordinate `x = log r` the blocks are
//!
//! ```text
//! k >= 1 : [η^k, η^{k+1})
//! k  = 0 : [-η, η)
//! k <= -1: [-η^{|k|+1}, -η^{|k|})
//! ```

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{num, polytorus_to_json};
use crate::multi_index::ReducedRational;
use crate::multipliers::{apply_multiplier, SignPattern, StepSigns, Symbol};
use crate::norms::{even_half, NormConfig, NormEstimate, NormRegistry};
use crate::numeric::rng_stream;
use crate::poly::{DirichletPolynomial, PolytorusPolynomial, TorusPoint};

/// Block memberships closer than this to an edge are flagged.
pub const MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalPartition {
    eta: ReducedRational,
    eta_f: f64,
}

impl IntervalPartition {
    pub fn new(eta: ReducedRational) -> Result<Self> {
        if eta <= ReducedRational::one() {
            return Err(Error::invalid(format!("eta = {eta} must exceed 1")));
        }
        Ok(IntervalPartition {
            eta_f: eta.to_f64(),
            eta,
        })
    }

    pub fn eta(&self) -> ReducedRational {
        self.eta
    }

    pub fn eta_f64(&self) -> f64 {
        self.eta_f
    }

    fn pow(&self, k: i64) -> f64 {
        self.eta_f.powi(k.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Left edge of `I_k` in log coordinates.
    pub fn lower_edge(&self, k: i64) -> f64 {
        if k >= 1 {
            self.pow(k)
        } else {
            -self.pow(1 - k)
        }
    }

    pub fn upper_edge(&self, k: i64) -> f64 {
        self.lower_edge(k + 1)
    }

    /// Block index of `x = log r` and the distance to the nearer edge.
    pub fn block_of_log(&self, x: f64) -> (i64, f64) {
        let ln_eta = self.eta_f.ln();
        let mut k = if x >= self.eta_f {
            (x.ln() / ln_eta).floor() as i64
        } else if x >= -self.eta_f {
            0
        } else {
            -((-x).ln() / ln_eta).floor() as i64
        };
        while self.lower_edge(k) > x {
            k -= 1;
        }
        while self.upper_edge(k) <= x {
            k += 1;
        }
        let margin = (x - self.lower_edge(k)).min(self.upper_edge(k) - x);
        (k, margin)
    }
}

/// Blocks `f_k` of a polytorus polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub partition: IntervalPartition,
    pub blocks: BTreeMap<i64, PolytorusPolynomial>,
    /// Smallest distance of any `log r_ν` to a block edge.
    pub min_margin: f64,
    pub flags: Vec<String>,
}

impl BlockDecomposition {
    pub fn parts(&self) -> Vec<PolytorusPolynomial> {
        self.blocks.values().cloned().collect()
    }

    pub fn reassemble(&self) -> PolytorusPolynomial {
        self.blocks
            .values()
            .fold(PolytorusPolynomial::zero(), |acc, b| acc.add(b))
    }

    pub fn certified(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "eta": self.partition.eta().to_string(),
            "min_margin": num(self.min_margin),
            "flags": self.flags,
            "blocks": self.blocks.iter().map(|(k, b)| json!({
                "k": k, "poly": polytorus_to_json(b),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn decompose(f: &PolytorusPolynomial, partition: &IntervalPartition) -> Result<BlockDecomposition> {
    let mut groups: BTreeMap<i64, Vec<_>> = BTreeMap::new();
    let mut min_margin = f64::INFINITY;
    let mut flags = Vec::new();
    for (nu, a) in f.terms() {
        let (k, margin) = partition.block_of_log(nu.log_rational()?);
        if margin < MARGIN {
            flags.push(format!("nu = {nu}: margin {margin:e} to an edge of I_{k}"));
        }
        min_margin = min_margin.min(margin);
        groups.entry(k).or_default().push((nu.clone(), a));
    }
    Ok(BlockDecomposition {
        partition: partition.clone(),
        blocks: groups
            .into_iter()
            .map(|(k, t)| (k, PolytorusPolynomial::from_terms(t)))
            .collect(),
        min_margin,
        flags,
    })
}

/// Dirichlet-side blocks: `log n` against `I_k` with `η = c`, the constant
/// term `a_1` kept apart.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletBlocks {
    pub constant: Complex64,
    pub blocks: BTreeMap<i64, DirichletPolynomial>,
    pub min_margin: f64,
}

pub fn dirichlet_blocks(f: &DirichletPolynomial, c: ReducedRational) -> Result<DirichletBlocks> {
    let partition = IntervalPartition::new(c)?;
    let mut groups: BTreeMap<i64, Vec<(u64, Complex64)>> = BTreeMap::new();
    let mut min_margin = f64::INFINITY;
    for (n, a) in f.terms().filter(|(n, _)| *n > 1) {
        let (k, margin) = partition.block_of_log((n as f64).ln());
        min_margin = min_margin.min(margin);
        groups.entry(k).or_default().push((n, a));
    }
    Ok(DirichletBlocks {
        constant: f.coeff(1),
        blocks: groups
            .into_iter()
            .map(|(k, t)| Ok((k, DirichletPolynomial::from_terms(t)?)))
            .collect::<Result<_>>()?,
        min_margin,
    })
}

/// `S(f)(z) = (Σ_k |f_k(z)|²)^{1/2}`.
pub fn square_function_at(d: &BlockDecomposition, z: &TorusPoint) -> Result<f64> {
    let mut s = 0.0;
    for b in d.blocks.values() {
        s += b.eval(z)?.norm_sqr();
    }
    Ok(s.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpRatio {
    pub square: NormEstimate,
    pub norm: NormEstimate,
    /// `‖S(f)‖_p / ‖f‖_p`.
    pub ratio: f64,
    /// `p <= 1`, outside the range where the equivalence is claimed.
    pub exploratory: bool,
}

impl LpRatio {
    pub fn to_json(&self) -> Value {
        json!({
            "square_norm": self.square.to_json(),
            "norm": self.norm.to_json(),
            "ratio": num(self.ratio),
            "exploratory": self.exploratory,
        })
    }
}

pub fn lp_ratio(
    f: &PolytorusPolynomial,
    partition: &IntervalPartition,
    p: f64,
    registry: &NormRegistry,
    method: &str,
    cfg: &NormConfig,
) -> Result<LpRatio> {
    let route = registry.resolve(method, p)?;
    let d = decompose(f, partition)?;
    let square = route.square_norm(&d.parts(), p, cfg)?;
    let norm = route.norm(f, p, cfg)?;
    let ratio = if norm.value == 0.0 && square.value == 0.0 {
        1.0
    } else {
        square.value / norm.value
    };
    Ok(LpRatio {
        square,
        norm,
        ratio,
        exploratory: p <= 1.0,
    })
}

/// `m_ε = Σ_k ε_k χ_{I_k}` with seeded independent signs.
pub fn random_sign_symbol(partition: &IntervalPartition, seed: u64) -> StepSigns {
    StepSigns::new(partition.clone(), SignPattern::Seeded(seed))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KhintchineAverage {
    /// Mean of `‖T_{m_ε}F‖_p^p`.
    pub mean: f64,
    pub std_error: f64,
    pub samples: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn khintchine_average(
    f: &PolytorusPolynomial,
    partition: &IntervalPartition,
    p: f64,
    num_samples: usize,
    seed: u64,
    registry: &NormRegistry,
    method: &str,
    cfg: &NormConfig,
) -> Result<KhintchineAverage> {
    if num_samples == 0 {
        return Err(Error::invalid("need at least one sign sample"));
    }
    let route = registry.resolve(method, p)?;
    let samples: Vec<f64> = (0..num_samples)
        .into_par_iter()
        .map(|s| {
            let sym_seed = rng_stream(seed, s as u64).gen::<u64>();
            let m = random_sign_symbol(partition, sym_seed);
            Ok(route.norm(&apply_multiplier(&m, f)?, p, cfg)?.value.powf(p))
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let mean = crate::numeric::compensated_sum(samples.iter().copied()) / n;
    let std_error = if samples.len() > 1 {
        (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(KhintchineAverage {
        mean,
        std_error,
        samples,
    })
}

/// Exhaustive sign enumeration at even `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct KhintchineExhaustive {
    pub blocks: usize,
    /// `E_ε ‖T_{m_ε}F‖_p^p` over all `2^blocks` sign patterns.
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `‖S(F)‖_p^p`.
    pub square: f64,
    /// `‖S‖_p^p <= mean`.
    pub lower_holds: bool,
    /// `mean <= B_p^p ‖S‖_p^p`.
    pub upper_holds: bool,
    pub upper_constant: f64,
}

/// `B_p^p` for even `p = 2q`: `(2q-1)!!`, the `p`-th Gaussian moment.
pub fn khintchine_upper_pth(q: u32) -> f64 {
    (1..=q).map(|i| (2 * i - 1) as f64).product()
}

pub fn khintchine_exhaustive(
    f: &PolytorusPolynomial,
    partition: &IntervalPartition,
    p: f64,
    max_blocks: usize,
) -> Result<KhintchineExhaustive> {
    let q = even_half(p).ok_or_else(|| Error::invalid("exhaustive Khintchine needs even p"))?;
    let d = decompose(f, partition)?;
    let ks: Vec<i64> = d.blocks.keys().copied().collect();
    if ks.len() > max_blocks.min(20) {
        return Err(Error::BudgetExhausted(format!(
            "{} blocks exceed the enumeration cap {max_blocks}",
            ks.len()
        )));
    }
    let registry = NormRegistry::default();
    let even = registry.get("even")?;
    let cfg = NormConfig::default();
    let values: Vec<f64> = (0..1u64 << ks.len())
        .into_par_iter()
        .map(|mask| {
            let overrides: BTreeMap<i64, i8> = ks
                .iter()
                .enumerate()
                .map(|(i, &k)| (k, if mask >> i & 1 == 1 { -1 } else { 1 }))
                .collect();
            let m = StepSigns::new(partition.clone(), SignPattern::Constant(1)).with_overrides(overrides);
            Ok(even.norm(&apply_multiplier(&m, f)?, p, &cfg)?.value.powf(p))
        })
        .collect::<Result<_>>()?;
    let mean = crate::numeric::compensated_sum(values.iter().copied()) / values.len() as f64;
    let square = even.square_norm(&d.parts(), p, &cfg)?.value.powf(p);
    let upper_constant = khintchine_upper_pth(q);
    let slack = 1e-12 * square.max(mean);
    Ok(KhintchineExhaustive {
        blocks: ks.len(),
        mean,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(0.0, f64::max),
        square,
        lower_holds: square <= mean + slack,
        upper_holds: mean <= upper_constant * square + slack,
        upper_constant,
    })
}

/// `Δ_0, Δ_1, ..., Δ_d`: `Δ_N` holds the monomials whose largest active
/// variable is exactly `N`, `Δ_0` the constant term.
pub fn martingale_blocks(f: &PolytorusPolynomial) -> Vec<PolytorusPolynomial> {
    let d = f.dimension() as usize;
    let mut groups: Vec<Vec<_>> = vec![Vec::new(); d + 1];
    for (nu, a) in f.terms() {
        groups[nu.dimension() as usize].push((nu.clone(), a));
    }
    groups.into_iter().map(PolytorusPolynomial::from_terms).collect()
}

/// Apply a symbol to each block (convenience for sign experiments).
pub fn apply_to_blocks(m: &dyn Symbol, d: &BlockDecomposition) -> Result<Vec<PolytorusPolynomial>> {
    d.blocks.values().map(|b| apply_multiplier(m, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;
    use crate::norms::{norm_parseval, NormMethod};
    use crate::poly::bohr_lift;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn eta(s: &str) -> IntervalPartition {
        IntervalPartition::new(ReducedRational::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn edges_and_membership() {
        let p = eta("2");
        assert_eq!((p.lower_edge(0), p.upper_edge(0)), (-2.0, 2.0));
        assert_eq!((p.lower_edge(-1), p.lower_edge(1), p.lower_edge(3)), (-4.0, 2.0, 8.0));
        assert_eq!(p.block_of_log(0.0).0, 0);
        assert_eq!(p.block_of_log(2.0).0, 1);
        assert_eq!(p.block_of_log(-2.0).0, 0);
        assert_eq!(p.block_of_log(-2.0000001).0, -1);
        assert_eq!(p.block_of_log(1e6).0, 19);
        assert!(IntervalPartition::new(ReducedRational::one()).is_err());
    }

    #[test]
    fn membership_is_total() {
        for s in ["3/2", "2", "3", "101/100"] {
            let p = eta(s);
            for i in -2000..2000 {
                let x = i as f64 * 0.37;
                let (k, _) = p.block_of_log(x);
                let claims = (k - 3..=k + 3)
                    .filter(|&j| p.lower_edge(j) <= x && x < p.upper_edge(j))
                    .count();
                assert_eq!(claims, 1, "eta {s}, x {x}");
            }
        }
    }

    #[test]
    fn small_integers_share_block_zero() {
        let f = bohr_lift(&DirichletPolynomial::from_terms((2..=7).map(|n| (n, c(1.0)))).unwrap()).unwrap();
        let d = decompose(&f, &eta("2")).unwrap();
        assert_eq!(d.blocks.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert!(d.certified());
        let one = decompose(&PolytorusPolynomial::constant(c(1.0)), &eta("2")).unwrap();
        assert_eq!(one.blocks.keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn separated_monomials_give_root_two() {
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::unit(1).unwrap(), c(1.0)),
            (MultiIndex::from_pairs([(2, 4)]).unwrap(), c(1.0)),
        ]);
        let d = decompose(&f, &eta("11/10")).unwrap();
        assert_eq!(d.blocks.len(), 2);
        for t in [0.0, 0.3, 2.0] {
            let z = TorusPoint::new([t, 1.0 - t]).unwrap();
            assert!((square_function_at(&d, &z).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn lp_ratio_examples() {
        let reg = NormRegistry::default();
        let cfg = NormConfig::default();
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(1.0)),
            (MultiIndex::unit(1).unwrap(), c(1.0)),
            (MultiIndex::unit(2).unwrap(), c(1.0)),
            (MultiIndex::from_dense(&[1, 1]), c(1.0)),
        ]);
        let r2 = lp_ratio(&f, &eta("2"), 2.0, &reg, "auto", &cfg).unwrap();
        assert!((r2.ratio - 1.0).abs() < 1e-10);
        // (1+z1)(1+z2) has r = 1, 2, 3, 6: blocks {1,2,3} and {6} for η = 3/2
        let r4 = lp_ratio(&f, &eta("3/2"), 4.0, &reg, "even", &cfg).unwrap();
        let ff = f.mul(&f).unwrap();
        let norm4 = norm_parseval(&ff).value.sqrt();
        assert!((r4.norm.value - norm4).abs() < 1e-14);
        let g = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(1.0)),
            (MultiIndex::unit(1).unwrap(), c(1.0)),
            (MultiIndex::unit(2).unwrap(), c(1.0)),
        ]);
        // ‖S‖_4^4 = ∫(|g|² + 1)² = ‖g‖_4^4 + 2‖g‖_2² + 1
        let g4 = norm_parseval(&g.mul(&g).unwrap()).value.powi(2);
        let s4 = g4 + 2.0 * 3.0 + 1.0;
        assert!((r4.square.value.powi(4) - s4).abs() < 1e-12 * s4);
        let k = lp_ratio(&PolytorusPolynomial::constant(c(2.0)), &eta("2"), 3.0, &reg, "grid", &cfg).unwrap();
        assert!((k.ratio - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_blocks_split_constant() {
        let f = DirichletPolynomial::from_terms([(1, c(5.0)), (2, c(1.0)), (10, c(1.0)), (2000, c(1.0))]).unwrap();
        let b = dirichlet_blocks(&f, ReducedRational::integer(2).unwrap()).unwrap();
        assert_eq!(b.constant, c(5.0));
        // log 2 < 2 <= log 10 < 4 <= log 2000 < 8
        assert_eq!(b.blocks.keys().copied().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn khintchine_p2_is_exact() {
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(0.4)),
            (MultiIndex::from_dense(&[3, 0]), Complex64::new(0.1, 0.9)),
            (MultiIndex::from_dense(&[0, 5]), c(-0.7)),
        ]);
        let reg = NormRegistry::default();
        let avg = khintchine_average(&f, &eta("2"), 2.0, 16, 3, &reg, "parseval", &NormConfig::default()).unwrap();
        let n2 = norm_parseval(&f).value.powi(2);
        assert!(avg.samples.iter().all(|s| (s - n2).abs() < 1e-12 * n2));
        assert!(avg.std_error < 1e-12);
    }

    #[test]
    fn khintchine_single_block_is_scalar() {
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(1.0)),
            (MultiIndex::unit(1).unwrap(), c(0.5)),
        ]);
        let reg = NormRegistry::default();
        let cfg = NormConfig::default();
        let avg = khintchine_average(&f, &eta("2"), 3.0, 8, 1, &reg, "grid", &cfg).unwrap();
        let n3 = crate::norms::Grid.norm(&f, 3.0, &cfg).unwrap().value.powi(3);
        assert!(avg.samples.iter().all(|s| (s - n3).abs() < 1e-12 * n3));
    }

    #[test]
    fn exhaustive_two_block_example() {
        // r = 1 sits in I_0 and r = 16 in I_1 for η = 2
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(1.0)),
            (MultiIndex::from_pairs([(1, 4)]).unwrap(), c(1.0)),
        ]);
        let k = khintchine_exhaustive(&f, &eta("2"), 4.0, 10).unwrap();
        assert_eq!(k.blocks, 2);
        // ‖1 ± z^4‖_4^4 = 6 for both signs, ‖S‖_4^4 = 4
        assert!((k.mean - 6.0).abs() < 1e-13);
        assert!((k.square - 4.0).abs() < 1e-13);
        assert!(k.lower_holds && k.upper_holds);
        assert_eq!(khintchine_upper_pth(2), 3.0);
    }

    #[test]
    fn martingale_examples() {
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(1.0)),
            (MultiIndex::unit(1).unwrap(), c(1.0)),
            (MultiIndex::from_dense(&[1, 1]), c(1.0)),
        ]);
        let deltas = martingale_blocks(&f);
        assert_eq!(deltas.len(), 3);
        assert_eq!(deltas[0], PolytorusPolynomial::constant(c(1.0)));
        assert_eq!(deltas[1], PolytorusPolynomial::monomial(MultiIndex::unit(1).unwrap(), c(1.0)));
        assert_eq!(deltas[2].len(), 1);
        let sum = deltas.iter().fold(PolytorusPolynomial::zero(), |a, b| a.add(b));
        assert_eq!(sum, f);
    }
}
