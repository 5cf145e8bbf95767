use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::poly::PolytorusPolynomial;
use crate::primes;

use super::approx::{bezout, RationalApproximation};

/// Integer matrix with determinant 1 and its integer inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularMatrix {
    entries: Vec<Vec<i64>>,
    inverse: Vec<Vec<i64>>,
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(m: &[Vec<i128>]) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                    .ok_or_else(|| Error::overflow("determinant"))?;
                a[i][j] = num / prev;
            }
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

fn minor(m: &[Vec<i128>], row: usize, col: usize) -> Vec<Vec<i128>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, x)| *x)
                .collect()
        })
        .collect()
}

impl UnimodularMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix must be square and nonempty"));
        }
        let wide: Vec<Vec<i128>> = entries
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let det = bareiss_det(&wide)?;
        if det != 1 {
            return Err(Error::invalid(format!("determinant is {det}, not 1")));
        }
        // det = 1, so the inverse is the adjugate
        let mut inverse = vec![vec![0i64; n]; n];
        for (i, row) in inverse.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let c = if n == 1 { 1 } else { bareiss_det(&minor(&wide, j, i))? };
                let c = if (i + j) % 2 == 0 { c } else { -c };
                *x = i64::try_from(c).map_err(|_| Error::overflow("inverse entry"))?;
            }
        }
        let m = UnimodularMatrix { entries, inverse };
        if !m.product_is_identity()? {
            return Err(Error::invalid("adjugate check failed"));
        }
        Ok(m)
    }

    fn product_is_identity(&self) -> Result<bool> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i128;
                for k in 0..n {
                    s = s
                        .checked_add(self.entries[i][k] as i128 * self.inverse[k][j] as i128)
                        .ok_or_else(|| Error::overflow("matrix product"))?;
                }
                if s != (i == j) as i128 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn inverse_entries(&self) -> &[Vec<i64>] {
        &self.inverse
    }

    pub fn determinant(&self) -> Result<i128> {
        bareiss_det(
            &self
                .entries
                .iter()
                .map(|r| r.iter().map(|&x| x as i128).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        )
    }

    pub fn inverse(&self) -> UnimodularMatrix {
        UnimodularMatrix {
            entries: self.inverse.clone(),
            inverse: self.entries.clone(),
        }
    }

    /// `ν ↦ Uν`, variable `j` of `ν` taken as coordinate `j`.
    pub fn apply(&self, nu: &MultiIndex) -> Result<MultiIndex> {
        let n = self.dim();
        if nu.dimension() as usize > n {
            return Err(Error::invalid(format!(
                "exponent vector {nu} exceeds matrix dimension {n}"
            )));
        }
        let v = nu.to_dense(n);
        let mut out = Vec::with_capacity(n);
        for row in &self.entries {
            let mut s = 0i128;
            for (a, x) in row.iter().zip(&v) {
                s += *a as i128 * *x as i128;
            }
            out.push(i64::try_from(s).map_err(|_| Error::overflow("transformed exponent"))?);
        }
        Ok(MultiIndex::from_dense(&out))
    }

    pub fn to_json(&self) -> Value {
        let det = self.determinant().ok().and_then(|d| i64::try_from(d).ok());
        json!({"entries": self.entries, "inverse": self.inverse, "determinant": det})
    }
}

/// Rows `(a_1..a_d)`, `(q_1, q_2, 0..0)`, then `e_3..e_d`.
pub fn build_matrix_a(r: &RationalApproximation) -> Result<UnimodularMatrix> {
    let d = r.dim();
    if d < 2 {
        return Err(Error::invalid("matrix A needs d >= 2"));
    }
    let (q1, q2) = bezout(r.a[0], r.a[1])?;
    let mut rows = vec![r.a.clone()];
    let mut second = vec![0i64; d];
    second[0] = q1;
    second[1] = q2;
    rows.push(second);
    for i in 2..d {
        let mut e = vec![0i64; d];
        e[i] = 1;
        rows.push(e);
    }
    UnimodularMatrix::new(rows)
}

/// Move the coefficient of `ν` to `Uν`.
pub fn change_variables(f: &PolytorusPolynomial, u: &UnimodularMatrix) -> Result<PolytorusPolynomial> {
    let terms = f
        .terms()
        .map(|(nu, a)| Ok((u.apply(nu)?, a)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PolytorusPolynomial::from_terms(terms))
}

/// Output of [`build_matrix_b`].
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixB {
    pub b: i64,
    /// Prime indices with `|γ(b+1) - log p_j|`, `|γb - log p_k|` below `δ/N`.
    pub j: u32,
    pub k: u32,
    pub p_j: u64,
    pub p_k: u64,
    pub matrix: UnimodularMatrix,
}

impl MatrixB {
    pub fn to_json(&self) -> Value {
        json!({
            "b": self.b, "j": self.j, "k": self.k, "p_j": self.p_j, "p_k": self.p_k,
            "matrix": self.matrix.to_json(),
        })
    }
}

/// Prime (with 1-based index) closest in log to `target`, within `tol`.
fn prime_near(table: &[u64], target: f64, tol: f64, avoid: Option<u64>) -> Option<(u32, u64)> {
    let lo = (target - tol).exp().floor() as u64;
    let hi = (target + tol).exp().ceil() as u64;
    let start = table.partition_point(|&p| p < lo);
    table[start..]
        .iter()
        .take_while(|&&p| p <= hi)
        .enumerate()
        .filter(|(_, &p)| Some(p) != avoid && ((p as f64).ln() - target).abs() < tol)
        .min_by(|(_, &p), (_, &q)| {
            ((p as f64).ln() - target)
                .abs()
                .total_cmp(&((q as f64).ln() - target).abs())
        })
        .map(|(i, &p)| ((start + i + 1) as u32, p))
}

/// Smallest `b <= b_cap` with primes `p_j`, `p_k` such that
/// `|γ(b+1) - log p_j| < δ/N` and `|γb - log p_k| < δ/N`, and
/// `B = [[b+1, b], [1, 1]]`.
pub fn build_matrix_b(gamma: f64, n: u64, delta: f64, b_cap: i64) -> Result<MatrixB> {
    if !(gamma.is_finite() && gamma > 0.0) || !(delta.is_finite() && delta > 0.0) || n == 0 {
        return Err(Error::invalid("need γ > 0, δ > 0 and N >= 1"));
    }
    let tol = delta / n as f64;
    primes::ensure_count(primes::cap())?;
    primes::with_full_table(|table| {
        let largest = (*table.last().expect("nonempty table") as f64).ln();
        for b in 1..=b_cap {
            let hi_target = gamma * (b + 1) as f64;
            if hi_target + tol > largest {
                return Err(Error::PrimeTableExhausted(format!(
                    "b = {b} needs primes near e^{hi_target:.3}, beyond the table's largest \
                     prime (log {largest:.3}); raise the prime cap"
                )));
            }
            let Some((k, p_k)) = prime_near(table, gamma * b as f64, tol, None) else {
                continue;
            };
            let Some((j, p_j)) = prime_near(table, hi_target, tol, Some(p_k)) else {
                continue;
            };
            let matrix = UnimodularMatrix::new(vec![vec![b + 1, b], vec![1, 1]])?;
            return Ok(MatrixB {
                b,
                j,
                k,
                p_j,
                p_k,
                matrix,
            });
        }
        Err(Error::Unattainable(format!("no b <= {b_cap} admits such primes")))
    })
}
