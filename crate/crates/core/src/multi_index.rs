//! Finitely supported exponent vectors and their rational numbers.
//!
//! A [`MultiIndex`] ν is a sparse map `j -> ν_j` over prime indices
//! `j >= 1`. It names the character `z^ν` of the infinite torus and, through
//! `r_ν = Π p_j^{ν_j}`, a positive rational.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::primes;

/// Sparse exponent vector, sorted by prime index, with no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<(u32, i64)>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// The coordinate vector `e_j`.
    pub fn unit(j: u32) -> Result<Self> {
        Self::from_pairs([(j, 1)])
    }

    /// Build from `(prime index, exponent)` pairs. Repeated indices add up;
    /// zero exponents are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, i64)>) -> Result<Self> {
        let mut v: Vec<(u32, i64)> = Vec::new();
        for (j, e) in pairs {
            if j == 0 {
                return Err(Error::invalid("prime indices start at 1"));
            }
            v.push((j, e));
        }
        v.sort_by_key(|&(j, _)| j);
        let mut out: Vec<(u32, i64)> = Vec::with_capacity(v.len());
        for (j, e) in v {
            match out.last_mut() {
                Some((lj, le)) if *lj == j => {
                    *le = le
                        .checked_add(e)
                        .ok_or_else(|| Error::overflow("exponent sum"))?;
                }
                _ => out.push((j, e)),
            }
        }
        out.retain(|&(_, e)| e != 0);
        Ok(MultiIndex(out))
    }

    /// Dense exponents `ν_1..ν_len` into a sparse index.
    pub fn from_dense(exps: &[i64]) -> Self {
        MultiIndex(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(i, &e)| (i as u32 + 1, e))
                .collect(),
        )
    }

    /// Dense exponents `ν_1..ν_d` (zero padded).
    pub fn to_dense(&self, d: usize) -> Vec<i64> {
        let mut out = vec![0; d];
        for &(j, e) in &self.0 {
            if (j as usize) <= d {
                out[j as usize - 1] = e;
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.0.iter().copied()
    }

    pub fn exponent(&self, j: u32) -> i64 {
        self.0
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest prime index present (0 for the empty index).
    pub fn dimension(&self) -> u32 {
        self.0.last().map_or(0, |&(j, _)| j)
    }

    /// All exponents non-negative (the analytic cone).
    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&(_, e)| e > 0)
    }

    pub fn max_abs_exponent(&self) -> i64 {
        self.0.iter().map(|&(_, e)| e.abs()).max().unwrap_or(0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(ja, ea)), Some(&&(jb, eb))) => match ja.cmp(&jb) {
                    Ordering::Less => {
                        out.push((ja, ea));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((jb, eb));
                        b.next();
                    }
                    Ordering::Equal => {
                        let e = ea
                            .checked_add(eb)
                            .ok_or_else(|| Error::overflow("exponent sum"))?;
                        if e != 0 {
                            out.push((ja, e));
                        }
                        a.next();
                        b.next();
                    }
                },
                (Some(&&p), None) => {
                    out.push(p);
                    a.next();
                }
                (None, Some(&&p)) => {
                    out.push(p);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Ok(MultiIndex(out))
    }

    pub fn neg(&self) -> Self {
        MultiIndex(self.0.iter().map(|&(j, e)| (j, -e)).collect())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    /// `log r_ν = Σ ν_j log p_j` in floating point.
    pub fn log_rational(&self) -> Result<f64> {
        let mut s = 0.0;
        for &(j, e) in &self.0 {
            s += e as f64 * primes::log_nth(j)?;
        }
        Ok(s)
    }

    /// Exact numerator and denominator of `r_ν` as big integers.
    pub fn rational_big(&self) -> Result<(BigUint, BigUint)> {
        let mut num = BigUint::from(1u32);
        let mut den = BigUint::from(1u32);
        for &(j, e) in &self.0 {
            let p = BigUint::from(primes::nth(j)?);
            let pow = p.pow(e.unsigned_abs() as u32);
            if e > 0 {
                num *= pow;
            } else {
                den *= pow;
            }
        }
        Ok((num, den))
    }

    /// Exact comparison of `r_ν` with 1, never overflowing.
    pub fn cmp_rational_to_one(&self) -> Result<Ordering> {
        let (num, den) = self.rational_big()?;
        Ok(num.cmp(&den))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (j, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}:{e}")?;
        }
        write!(f, "}}")
    }
}

/// Positive rational in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReducedRational {
    num: u64,
    den: u64,
}

impl ReducedRational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::invalid(format!(
                "rational {num}/{den} is not strictly positive"
            )));
        }
        let g = num.gcd(&den);
        Ok(ReducedRational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(n: u64) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn one() -> Self {
        ReducedRational { num: 1, den: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn ln(&self) -> f64 {
        (self.num as f64).ln() - (self.den as f64).ln()
    }

    /// Parse `"p/q"` or `"p"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::malformed(format!("bad rational `{s}`")))
        };
        match s.split_once('/') {
            Some((a, b)) => Self::new(parse(a)?, parse(b)?),
            None => Self::new(parse(s)?, 1),
        }
    }
}

impl Ord for ReducedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for ReducedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Prime factorization of `n >= 1` as a multi-index.
pub fn factorize(n: u64) -> Result<MultiIndex> {
    if n == 0 {
        return Err(Error::invalid("cannot factorize 0"));
    }
    let mut rest = n;
    let mut pairs = Vec::new();
    let mut j = 1u32;
    loop {
        if rest == 1 {
            break;
        }
        let p = primes::nth(j)?;
        if p.saturating_mul(p) > rest {
            // rest is prime
            let idx = primes::index_of(rest)?.ok_or_else(|| {
                Error::PrimeTableExhausted(format!("cofactor {rest} of {n} not tabulated"))
            })?;
            pairs.push((idx, 1));
            break;
        }
        let mut e = 0i64;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            pairs.push((j, e));
        }
        j += 1;
    }
    Ok(MultiIndex(pairs))
}

/// `r_ν` in lowest terms; fails loudly when it does not fit 64 bits.
pub fn rational_of(nu: &MultiIndex) -> Result<ReducedRational> {
    let mut num: u64 = 1;
    let mut den: u64 = 1;
    for (j, e) in nu.iter() {
        let p = primes::nth(j)?;
        let exp = u32::try_from(e.unsigned_abs())
            .map_err(|_| Error::overflow(format!("exponent {e} in {nu}")))?;
        let pow = p
            .checked_pow(exp)
            .ok_or_else(|| Error::overflow(format!("r_ν for ν = {nu} exceeds 64 bits")))?;
        let slot = if e > 0 { &mut num } else { &mut den };
        *slot = slot
            .checked_mul(pow)
            .ok_or_else(|| Error::overflow(format!("r_ν for ν = {nu} exceeds 64 bits")))?;
    }
    // distinct primes on each side, so already reduced
    ReducedRational::new(num, den)
}
