use crate::error::{Error, Result};
use crate::numeric::order_free_sum;
use crate::poly::PolytorusPolynomial;

use super::{NormConfig, NormEstimate, NormMethod, NormMethodKind};

/// `‖F‖_2 = (Σ |a_ν|²)^{1/2}`, summed independently of term order.
pub fn norm_parseval(f: &PolytorusPolynomial) -> NormEstimate {
    square_parseval(std::slice::from_ref(f))
}

fn square_parseval(parts: &[PolytorusPolynomial]) -> NormEstimate {
    let squares: Vec<f64> = parts
        .iter()
        .flat_map(|f| f.terms().map(|(_, a)| a.norm_sqr()))
        .collect();
    NormEstimate::exact(order_free_sum(squares).sqrt(), 2.0, NormMethodKind::Parseval)
}

pub struct Parseval;

impl NormMethod for Parseval {
    fn name(&self) -> &'static str {
        "parseval"
    }

    fn accepts(&self, p: f64) -> bool {
        p == 2.0
    }

    fn square_norm(
        &self,
        parts: &[PolytorusPolynomial],
        p: f64,
        _cfg: &NormConfig,
    ) -> Result<NormEstimate> {
        if p != 2.0 {
            return Err(Error::invalid("parseval only computes p = 2"));
        }
        // disjoint or not, ‖(Σ|F_k|²)^{1/2}‖_2² = Σ_k ‖F_k‖_2²
        Ok(square_parseval(parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;
    use num_complex::Complex64;

    #[test]
    fn examples() {
        let f = PolytorusPolynomial::from_terms([
            (MultiIndex::empty(), Complex64::new(1.0, 0.0)),
            (MultiIndex::unit(1).unwrap(), Complex64::new(2.0, 0.0)),
        ]);
        assert!((norm_parseval(&f).value - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(norm_parseval(&PolytorusPolynomial::zero()).value, 0.0);
    }
}
