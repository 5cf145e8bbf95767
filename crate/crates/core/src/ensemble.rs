//! Seeded random polynomial families used as test functions.
//!
//! Member `i` of an ensemble draws from its own ChaCha stream derived from
//! the master seed, so members can be generated in any order or in parallel
//! with identical results.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::numeric::rng_stream;
use crate::poly::{DirichletPolynomial, PolytorusPolynomial};

/// Uniform sample from the closed unit disk.
pub fn unit_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(r, phi)
}

/// Shape of random polytorus polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyShape {
    /// Number of torus variables (prime indices `1..=dims`).
    pub dims: u32,
    /// Per-variable exponent bound.
    pub max_degree: i64,
    /// Number of drawn terms (duplicates merge, so the support may be smaller).
    pub terms: usize,
    /// Exponents in `0..=max_degree` when set, `-max_degree..=max_degree` otherwise.
    pub analytic: bool,
}

impl Default for PolyShape {
    fn default() -> Self {
        PolyShape {
            dims: 2,
            max_degree: 3,
            terms: 6,
            analytic: true,
        }
    }
}

pub fn random_polytorus<R: Rng + ?Sized>(rng: &mut R, shape: &PolyShape) -> PolytorusPolynomial {
    let lo = if shape.analytic { 0 } else { -shape.max_degree };
    let terms: Vec<(MultiIndex, Complex64)> = (0..shape.terms)
        .map(|_| {
            let exps: Vec<i64> = (0..shape.dims)
                .map(|_| rng.gen_range(lo..=shape.max_degree))
                .collect();
            (MultiIndex::from_dense(&exps), unit_disk(rng))
        })
        .collect();
    PolytorusPolynomial::from_terms(terms)
}

/// Dense random Dirichlet polynomial `Σ_{n <= max_index} a_n n^{-s}`.
pub fn random_dirichlet<R: Rng + ?Sized>(rng: &mut R, max_index: u64) -> DirichletPolynomial {
    DirichletPolynomial::from_terms((1..=max_index).map(|n| (n, unit_disk(rng))))
        .expect("indices start at 1")
}

/// Random Dirichlet polynomial with `terms` indices drawn from `1..=max_index`,
/// always including `max_index` itself.
pub fn random_sparse_dirichlet<R: Rng + ?Sized>(
    rng: &mut R,
    max_index: u64,
    terms: usize,
) -> DirichletPolynomial {
    let mut idx: Vec<u64> = (0..terms.saturating_sub(1))
        .map(|_| rng.gen_range(1..=max_index))
        .collect();
    idx.push(max_index);
    DirichletPolynomial::from_terms(idx.into_iter().map(|n| (n, unit_disk(rng))))
        .expect("indices start at 1")
}

/// A seeded family of random polytorus polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub seed: u64,
    pub size: usize,
    pub shape: PolyShape,
    /// Append every monomial of the random members' supports as extra members.
    pub monomial_witnesses: bool,
}

impl Ensemble {
    pub fn new(seed: u64, size: usize, shape: PolyShape) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("ensemble size must be positive"));
        }
        Ok(Ensemble {
            seed,
            size,
            shape,
            monomial_witnesses: false,
        })
    }

    pub fn with_monomial_witnesses(mut self) -> Self {
        self.monomial_witnesses = true;
        self
    }

    pub fn member(&self, i: usize) -> PolytorusPolynomial {
        random_polytorus(&mut rng_stream(self.seed, i as u64), &self.shape)
    }

    pub fn members(&self) -> Vec<PolytorusPolynomial> {
        let mut out: Vec<PolytorusPolynomial> = (0..self.size).map(|i| self.member(i)).collect();
        if self.monomial_witnesses {
            let mut support: Vec<MultiIndex> = out
                .iter()
                .flat_map(|f| f.terms().map(|(nu, _)| nu.clone()).collect::<Vec<_>>())
                .collect();
            support.sort();
            support.dedup();
            out.extend(
                support
                    .into_iter()
                    .map(|nu| PolytorusPolynomial::monomial(nu, Complex64::new(1.0, 0.0))),
            );
        }
        out
    }
}
