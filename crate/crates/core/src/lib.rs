//! Hardy spaces of Dirichlet series made executable.
//!
//! A Dirichlet polynomial `Σ a_n n^{-s}` is identified with the polytorus
//! polynomial `Σ a_n z^{ν(n)}` through the prime factorization `n = Π p_j^{ν_j}`.
//! On that side the crate computes `L^p` norms, applies Fourier multipliers
//! `a_ν ↦ m(r_ν) a_ν`, builds Littlewood-Paley blocks and square functions,
//! runs the unimodular change-of-variables machinery used to transfer
//! multipliers between the line and the polytorus, and checks the partial-sum
//! and Riesz projection identities.

pub mod ensemble;
pub mod error;
pub mod json;
pub mod littlewood_paley;
pub mod multi_index;
pub mod multipliers;
pub mod norms;
pub mod numeric;
pub mod poly;
pub mod primes;
pub mod projections;
pub mod transference;

pub use error::{Error, Result};
pub use multi_index::{factorize, rational_of, MultiIndex, ReducedRational};
pub use poly::{
    bohr_drop, bohr_lift, kronecker_flow, AnyPolynomial, DirichletPolynomial, PolytorusPolynomial,
    TorusPoint,
};
