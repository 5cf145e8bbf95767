//! Exact `L^{2q}` norms: `‖F‖_{2q}^{2q} = ‖F^q‖_2²`, and for square
//! functions `‖S‖_{2q}^{2q} = [G^q]_0` with `G = Σ_k F_k·conj(F_k)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::order_free_sum;
use crate::poly::{DirichletPolynomial, PolytorusPolynomial};

use super::{even_half, NormConfig, NormEstimate, NormMethod, NormMethodKind};

fn from_power_sum(sum: f64, q: u32) -> NormEstimate {
    NormEstimate::exact(
        sum.max(0.0).powf(1.0 / (2.0 * q as f64)),
        2.0 * q as f64,
        NormMethodKind::EvenPExact,
    )
}

/// `‖F‖_{2q}` via `‖F^q‖_2^{1/q}`.
pub fn norm_even_exact(f: &PolytorusPolynomial, q: u32) -> Result<NormEstimate> {
    if q == 0 {
        return Err(Error::invalid("q must be >= 1"));
    }
    let power = f.pow(q)?;
    let sum = order_free_sum(power.terms().map(|(_, a)| a.norm_sqr()).collect());
    Ok(from_power_sum(sum, q))
}

/// `‖f‖_{2q}` for a Dirichlet polynomial via Dirichlet convolution powers.
pub fn norm_even_exact_dirichlet(f: &DirichletPolynomial, q: u32) -> Result<NormEstimate> {
    if q == 0 {
        return Err(Error::invalid("q must be >= 1"));
    }
    let mut power = DirichletPolynomial::constant(Complex64::new(1.0, 0.0));
    for _ in 0..q {
        power = power.multiply(f)?;
    }
    let sum = order_free_sum(power.terms().map(|(_, a)| a.norm_sqr()).collect());
    Ok(from_power_sum(sum, q))
}

fn square_function_even(parts: &[PolytorusPolynomial], q: u32) -> Result<NormEstimate> {
    let mut g = PolytorusPolynomial::zero();
    for f in parts {
        g = g.add(&f.mul(&f.conj_reflect())?);
    }
    // [G^q]_0 = Σ_ν (G^a)_ν (G^b)_{-ν} with a + b = q
    let a = q.div_ceil(2);
    let b = q - a;
    let ga = g.pow(a)?;
    let gb = g.pow(b)?;
    let mut products = Vec::with_capacity(ga.len());
    for (nu, x) in ga.terms() {
        let y = gb.coeff(&nu.neg());
        products.push((x * y).re);
    }
    Ok(from_power_sum(order_free_sum(products), q))
}

pub struct Even;

impl NormMethod for Even {
    fn name(&self) -> &'static str {
        "even"
    }

    fn accepts(&self, p: f64) -> bool {
        even_half(p).is_some()
    }

    fn square_norm(
        &self,
        parts: &[PolytorusPolynomial],
        p: f64,
        _cfg: &NormConfig,
    ) -> Result<NormEstimate> {
        let q = even_half(p)
            .ok_or_else(|| Error::invalid(format!("even-p route needs p = 2q, got {p}")))?;
        match parts {
            [single] => norm_even_exact(single, q),
            _ => square_function_even(parts, q),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;
    use crate::norms::norm_parseval;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn binomial_fourth_norm() {
        // (1 + 2^{-s})² = 1 + 2·2^{-s} + 4^{-s}, so ‖f‖_4^4 = 1 + 4 + 1
        let f = DirichletPolynomial::from_terms([(1, c(1.0)), (2, c(1.0))]).unwrap();
        let est = norm_even_exact_dirichlet(&f, 2).unwrap();
        assert!((est.value - 6f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(est.p, 4.0);
    }

    #[test]
    fn constant_norm_is_modulus() {
        let f = DirichletPolynomial::constant(Complex64::new(3.0, 4.0));
        for q in 1..4 {
            assert!((norm_even_exact_dirichlet(&f, q).unwrap().value - 5.0).abs() < 1e-14);
        }
    }

    #[test]
    fn q_one_matches_parseval() {
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), Complex64::new(0.3, -0.1)),
            (MultiIndex::unit(2).unwrap(), Complex64::new(-0.7, 0.2)),
        ]);
        let a = norm_even_exact(&f, 1).unwrap().value;
        let b = norm_parseval(&f).value;
        assert!((a - b).abs() <= 1e-14 * b);
    }

    #[test]
    fn square_function_of_one_part_matches_scalar() {
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), c(1.0)),
            (MultiIndex::unit(1).unwrap(), c(1.0)),
        ]);
        let s = square_function_even(std::slice::from_ref(&f), 2).unwrap().value;
        assert!((s - 6f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn zero_q_rejected() {
        assert!(norm_even_exact(&PolytorusPolynomial::zero(), 0).is_err());
    }
}
