//! Dirichlet polynomials, trigonometric polynomials on the polytorus, and
//! the Bohr correspondence between them.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multi_index::{factorize, rational_of, MultiIndex};
use crate::primes;

const TAU: f64 = std::f64::consts::TAU;

/// Finite sum `Σ a_n n^{-s}`. Keys are `n >= 1`; zero coefficients are pruned.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DirichletPolynomial {
    coeffs: BTreeMap<u64, Complex64>,
}

impl DirichletPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms([(1, c)]).expect("n = 1 is valid")
    }

    /// Repeated indices add up.
    pub fn from_terms(terms: impl IntoIterator<Item = (u64, Complex64)>) -> Result<Self> {
        let mut coeffs: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (n, a) in terms {
            if n == 0 {
                return Err(Error::invalid("Dirichlet indices start at 1"));
            }
            *coeffs.entry(n).or_default() += a;
        }
        coeffs.retain(|_, a| *a != Complex64::new(0.0, 0.0));
        Ok(DirichletPolynomial { coeffs })
    }

    pub fn coeff(&self, n: u64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    /// Terms in ascending `n`.
    pub fn terms(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &a)| (n, a))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest index present (0 for the zero polynomial).
    pub fn max_index(&self) -> u64 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    /// `Σ a_n n^{-s}`, summed in ascending `n`.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.terms()
            .map(|(n, a)| a * (-s * (n as f64).ln()).exp())
            .sum()
    }

    /// Dirichlet convolution `c_n = Σ_{ab = n} a_a b_b`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let mut acc: HashMap<u64, Complex64> = HashMap::new();
        for (n, a) in self.terms() {
            for (m, b) in other.terms() {
                let k = n
                    .checked_mul(m)
                    .ok_or_else(|| Error::overflow(format!("Dirichlet index {n}·{m}")))?;
                *acc.entry(k).or_default() += a * b;
            }
        }
        Self::from_terms(acc)
    }

    pub fn map_coefficients(&self, mut f: impl FnMut(u64, Complex64) -> Complex64) -> Self {
        Self::from_terms(self.terms().map(|(n, a)| (n, f(n, a)))).expect("indices unchanged")
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms().map(|(n, a)| (n, -a))))
            .expect("indices unchanged")
    }
}

/// Trigonometric polynomial `Σ a_ν z^ν` on a finite-dimensional torus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolytorusPolynomial {
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl PolytorusPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms([(MultiIndex::empty(), c)])
    }

    pub fn monomial(nu: MultiIndex, c: Complex64) -> Self {
        Self::from_terms([(nu, c)])
    }

    /// Repeated multi-indices add up; zeros are pruned.
    pub fn from_terms(terms: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Self {
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (nu, a) in terms {
            *coeffs.entry(nu).or_default() += a;
        }
        coeffs.retain(|_, a| *a != Complex64::new(0.0, 0.0));
        PolytorusPolynomial { coeffs }
    }

    pub fn coeff(&self, nu: &MultiIndex) -> Complex64 {
        self.coeffs.get(nu).copied().unwrap_or_default()
    }

    /// Terms in lexicographic multi-index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(nu, &a)| (nu, a))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest prime index carried by any term.
    pub fn dimension(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::dimension).max().unwrap_or(0)
    }

    /// Variables that occur with a nonzero exponent, ascending.
    pub fn active_variables(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .coeffs
            .keys()
            .flat_map(|nu| nu.iter().map(|(j, _)| j))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Spectrum inside the analytic cone, i.e. an element of `H^p`.
    pub fn is_analytic(&self) -> bool {
        self.coeffs.keys().all(MultiIndex::is_nonnegative)
    }

    /// Sum of coefficient moduli; bounds the sup norm.
    pub fn l1_mass(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm()).sum()
    }

    /// `Σ a_ν e^{i ν·θ}` in lexicographic order of ν.
    pub fn eval(&self, z: &TorusPoint) -> Result<Complex64> {
        if (self.dimension() as usize) > z.dim() {
            return Err(Error::invalid(format!(
                "polynomial of dimension {} evaluated at a point of dimension {}",
                self.dimension(),
                z.dim()
            )));
        }
        Ok(self
            .terms()
            .map(|(nu, a)| {
                let phase: f64 = nu
                    .iter()
                    .map(|(j, e)| e as f64 * z.angles[j as usize - 1])
                    .sum();
                a * Complex64::cis(phase)
            })
            .sum())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut acc: HashMap<MultiIndex, Complex64> = HashMap::new();
        let mut order: Vec<MultiIndex> = Vec::new();
        for (nu, a) in self.terms() {
            for (mu, b) in other.terms() {
                let k = nu.checked_add(mu)?;
                match acc.get_mut(&k) {
                    Some(slot) => *slot += a * b,
                    None => {
                        order.push(k.clone());
                        acc.insert(k, a * b);
                    }
                }
            }
        }
        Ok(Self::from_terms(
            order.into_iter().map(|k| {
                let v = acc[&k];
                (k, v)
            }),
        ))
    }

    pub fn pow(&self, q: u32) -> Result<Self> {
        let mut out = Self::constant(Complex64::new(1.0, 0.0));
        for _ in 0..q {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// The polynomial `conj(F)`: coefficient `conj(a_ν)` moved to `-ν`.
    pub fn conj_reflect(&self) -> Self {
        Self::from_terms(self.terms().map(|(nu, a)| (nu.neg(), a.conj())))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(
            self.terms()
                .map(|(nu, a)| (nu.clone(), a))
                .chain(other.terms().map(|(nu, a)| (nu.clone(), a))),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_coefficients(|_, a| c * a)
    }

    /// Multiply by the character `z^μ` (exponent shift).
    pub fn shift(&self, mu: &MultiIndex) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.len());
        for (nu, a) in self.terms() {
            terms.push((nu.checked_add(mu)?, a));
        }
        Ok(Self::from_terms(terms))
    }

    pub fn map_coefficients(&self, mut f: impl FnMut(&MultiIndex, Complex64) -> Complex64) -> Self {
        Self::from_terms(self.terms().map(|(nu, a)| (nu.clone(), f(nu, a))))
    }

    /// Keep the terms selected by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&MultiIndex) -> bool) -> Self {
        PolytorusPolynomial {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(nu, _)| keep(nu))
                .map(|(nu, &a)| (nu.clone(), a))
                .collect(),
        }
    }

    /// Coefficientwise `max |a_ν - b_ν|`.
    pub fn max_coeff_deviation(&self, other: &Self) -> f64 {
        let diff = self.sub(other);
        diff.terms().map(|(_, a)| a.norm()).fold(0.0, f64::max)
    }
}

/// A point `e^{iθ}` of the `d`-torus, angles reduced to `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    angles: Vec<f64>,
}

impl TorusPoint {
    pub fn new(angles: impl IntoIterator<Item = f64>) -> Result<Self> {
        let angles: Vec<f64> = angles.into_iter().collect();
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("torus angles must be finite"));
        }
        Ok(TorusPoint {
            angles: angles.into_iter().map(reduce_angle).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// The Kronecker flow `t ↦ (2^{-it}, 3^{-it}, ..., p_d^{-it})`.
pub fn kronecker_flow(t: f64, d: u32) -> Result<TorusPoint> {
    if d == 0 {
        return Err(Error::invalid("kronecker_flow needs d >= 1"));
    }
    let mut angles = Vec::with_capacity(d as usize);
    for j in 1..=d {
        angles.push(-t * primes::log_nth(j)?);
    }
    TorusPoint::new(angles)
}

/// Lift `Σ a_n n^{-s}` to `Σ a_n z^{ν(n)}` with `ν(n)` the factorization of `n`.
pub fn bohr_lift(f: &DirichletPolynomial) -> Result<PolytorusPolynomial> {
    let mut terms = Vec::with_capacity(f.len());
    for (n, a) in f.terms() {
        terms.push((factorize(n)?, a));
    }
    Ok(PolytorusPolynomial::from_terms(terms))
}

/// Inverse of [`bohr_lift`]; only defined on analytic polynomials.
pub fn bohr_drop(f: &PolytorusPolynomial) -> Result<DirichletPolynomial> {
    let mut terms = Vec::with_capacity(f.len());
    for (nu, a) in f.terms() {
        if !nu.is_nonnegative() {
            return Err(Error::invalid(format!(
                "bohr_drop needs an analytic polynomial, found exponent vector {nu}"
            )));
        }
        terms.push((rational_of(nu)?.numerator(), a));
    }
    DirichletPolynomial::from_terms(terms)
}

/// Either kind of polynomial, as read from input files.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPolynomial {
    Dirichlet(DirichletPolynomial),
    Polytorus(PolytorusPolynomial),
}

impl AnyPolynomial {
    /// The polytorus form (lifting a Dirichlet polynomial).
    pub fn to_polytorus(&self) -> Result<PolytorusPolynomial> {
        match self {
            AnyPolynomial::Dirichlet(f) => bohr_lift(f),
            AnyPolynomial::Polytorus(f) => Ok(f.clone()),
        }
    }

    /// The Dirichlet form (dropping an analytic polytorus polynomial).
    pub fn to_dirichlet(&self) -> Result<DirichletPolynomial> {
        match self {
            AnyPolynomial::Dirichlet(f) => Ok(f.clone()),
            AnyPolynomial::Polytorus(f) => bohr_drop(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mi(p: &[(u32, i64)]) -> MultiIndex {
        MultiIndex::from_pairs(p.iter().copied()).unwrap()
    }

    #[test]
    fn lift_example() {
        let f = DirichletPolynomial::from_terms([(1, c(1.0)), (2, c(2.0)), (6, c(3.0))]).unwrap();
        let lifted = bohr_lift(&f).unwrap();
        let want = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(1.0)),
            (mi(&[(1, 1)]), c(2.0)),
            (mi(&[(1, 1), (2, 1)]), c(3.0)),
        ]);
        assert_eq!(lifted, want);
        assert_eq!(bohr_drop(&lifted).unwrap(), f);
    }

    #[test]
    fn single_term_lift() {
        let f = DirichletPolynomial::from_terms([(360, c(1.0))]).unwrap();
        let lifted = bohr_lift(&f).unwrap();
        assert_eq!(lifted.len(), 1);
        assert_eq!(lifted.coeff(&factorize(360).unwrap()), c(1.0));
    }

    #[test]
    fn drop_rejects_non_analytic() {
        let f = PolytorusPolynomial::monomial(mi(&[(1, -1)]), c(1.0));
        assert!(bohr_drop(&f).is_err());
    }

    #[test]
    fn zero_coefficients_pruned() {
        let f = DirichletPolynomial::from_terms([(2, c(1.0)), (2, c(-1.0)), (3, c(0.0))]).unwrap();
        assert!(f.is_empty());
        assert!(DirichletPolynomial::from_terms([(0, c(1.0))]).is_err());
    }

    #[test]
    fn zeta_partial_sum() {
        let f = DirichletPolynomial::from_terms((1..=3).map(|n| (n, c(1.0)))).unwrap();
        let v = f.eval(c(2.0));
        assert!((v.re - (1.0 + 0.25 + 1.0 / 9.0)).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn constant_evaluates_to_one() {
        let f = PolytorusPolynomial::constant(c(1.0));
        let z = TorusPoint::new([0.3, 1.7]).unwrap();
        assert_eq!(f.eval(&z).unwrap(), c(1.0));
    }

    #[test]
    fn flow_examples() {
        let z = kronecker_flow(0.0, 5).unwrap();
        assert!(z.angles().iter().all(|&a| a == 0.0));
        let z = kronecker_flow(TAU / 2f64.ln(), 1).unwrap();
        let a = z.angles()[0];
        assert!(a < 1e-12 || (TAU - a) < 1e-12, "angle {a}");
        assert!(kronecker_flow(1.0, 0).is_err());
    }

    #[test]
    fn square_of_binomial() {
        let f = DirichletPolynomial::from_terms([(1, c(1.0)), (2, c(1.0))]).unwrap();
        let sq = f.multiply(&f).unwrap();
        let want =
            DirichletPolynomial::from_terms([(1, c(1.0)), (2, c(2.0)), (4, c(1.0))]).unwrap();
        assert_eq!(sq, want);
        let one = DirichletPolynomial::constant(c(1.0));
        assert_eq!(f.multiply(&one).unwrap(), f);
    }

    #[test]
    fn convolution_overflow() {
        let f = DirichletPolynomial::from_terms([(u64::MAX / 2, c(1.0))]).unwrap();
        assert_eq!(f.multiply(&f).unwrap_err().code(), "overflow");
    }

    #[test]
    fn eval_dimension_mismatch() {
        let f = PolytorusPolynomial::monomial(mi(&[(3, 1)]), c(1.0));
        let z = TorusPoint::new([0.0]).unwrap();
        assert!(f.eval(&z).is_err());
    }
}
