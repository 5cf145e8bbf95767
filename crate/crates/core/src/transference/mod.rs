//! Transference between multipliers on the line and on the polytorus.
//!
//! Forward: simultaneous approximation `a_j/Q ≈ log p_j` gives a unimodular
//! `A` whose first row is `a`, so `M(ν) = m(e^{(Aν)_1/Q})` depends on the
//! first new coordinate only and `T_M` acts fiberwise as a one-variable
//! multiplier. Backward: primes with `log p_j ≈ γ(b+1)`, `log p_k ≈ γb`
//! carry a one-variable polynomial to the exponents `(n, -n)`.

mod approx;
mod matrix;
mod verify;

pub use approx::{approx_logs, bezout, RationalApproximation};
pub use matrix::{build_matrix_a, build_matrix_b, change_variables, MatrixB, UnimodularMatrix};
pub use verify::{
    approx_symbol_m, symbol_gap, verify_backward, verify_forward, Check, TransferConfig,
    TransferenceReport,
};
