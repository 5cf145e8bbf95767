//! Shared, lazily grown table of the first primes.
//!
//! The table only ever grows (under a write lock) and is capped at a
//! configurable number of primes. Lookups past the cap fail with
//! [`Error::PrimeTableExhausted`] instead of growing without bound.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

/// Default number of primes the table may hold.
pub const DEFAULT_PRIME_CAP: usize = 10_000;

static CAP: AtomicUsize = AtomicUsize::new(DEFAULT_PRIME_CAP);

fn table() -> &'static RwLock<Vec<u64>> {
    static TABLE: OnceLock<RwLock<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]))
}

/// Current cap on the number of tabulated primes.
pub fn cap() -> usize {
    CAP.load(Ordering::Relaxed)
}

/// Raise the cap. Lowering is ignored: the table is append-only.
pub fn raise_cap(count: usize) {
    CAP.fetch_max(count, Ordering::Relaxed);
}

fn sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Upper bound for the n-th prime (Rosser), valid for n >= 6.
fn nth_prime_bound(n: usize) -> u64 {
    if n < 6 {
        return 15;
    }
    let n = n as f64;
    (n * (n.ln() + n.ln().ln())).ceil() as u64 + 3
}

/// Make sure the first `count` primes are tabulated.
pub fn ensure_count(count: usize) -> Result<()> {
    if count > cap() {
        return Err(Error::PrimeTableExhausted(format!(
            "{count} primes requested, cap is {} (raise it with primes::raise_cap)",
            cap()
        )));
    }
    if table().read().expect("prime table poisoned").len() >= count {
        return Ok(());
    }
    let mut guard = table().write().expect("prime table poisoned");
    if guard.len() < count {
        // grow geometrically so repeated small requests stay cheap
        let target = count.max(guard.len() * 2).min(cap());
        let mut primes = sieve(nth_prime_bound(target));
        primes.truncate(target);
        *guard = primes;
    }
    Ok(())
}

/// Make sure every prime `<= bound` is tabulated (subject to the cap).
pub fn ensure_up_to(bound: u64) -> Result<()> {
    loop {
        let (len, last) = {
            let g = table().read().expect("prime table poisoned");
            (g.len(), *g.last().unwrap())
        };
        if last >= bound {
            return Ok(());
        }
        if len >= cap() {
            return Err(Error::PrimeTableExhausted(format!(
                "primes up to {bound} requested, but the {}-prime cap ends at {last}",
                cap()
            )));
        }
        ensure_count((len * 2).min(cap()))?;
    }
}

/// The `j`-th prime, 1-indexed (`nth(1) == 2`).
pub fn nth(j: u32) -> Result<u64> {
    if j == 0 {
        return Err(Error::invalid("prime indices start at 1"));
    }
    ensure_count(j as usize)?;
    Ok(table().read().expect("prime table poisoned")[j as usize - 1])
}

/// 1-based index of `p` if it is prime.
pub fn index_of(p: u64) -> Result<Option<u32>> {
    ensure_up_to(p)?;
    let g = table().read().expect("prime table poisoned");
    Ok(g.binary_search(&p).ok().map(|i| i as u32 + 1))
}

/// Natural log of the `j`-th prime.
pub fn log_nth(j: u32) -> Result<f64> {
    Ok((nth(j)? as f64).ln())
}

/// Run `f` over the whole tabulated range, grown to the current cap first.
pub fn with_full_table<R>(f: impl FnOnce(&[u64]) -> R) -> R {
    // the cap is always reachable, so this cannot fail
    ensure_count(cap()).expect("cap is reachable");
    let g = table().read().expect("prime table poisoned");
    f(&g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes() {
        let got: Vec<u64> = (1..=10).map(|j| nth(j).unwrap()).collect();
        assert_eq!(got, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(nth(10_000).unwrap(), 104_729);
    }

    #[test]
    fn index_lookup() {
        assert_eq!(index_of(2).unwrap(), Some(1));
        assert_eq!(index_of(97).unwrap(), Some(25));
        assert_eq!(index_of(91).unwrap(), None);
    }

    #[test]
    fn zero_index_rejected() {
        assert!(nth(0).is_err());
    }

    #[test]
    fn past_cap_is_an_error() {
        let err = nth(cap() as u32 + 1_000_000).unwrap_err();
        assert_eq!(err.code(), "prime_table_exhausted");
    }
}
