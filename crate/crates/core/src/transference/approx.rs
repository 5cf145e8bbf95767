use num_integer::Integer;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{float_list, num};
use crate::primes;

/// Simultaneous approximation `a_j / Q ≈ log p_j`, `j = 1..d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalApproximation {
    pub q: i64,
    pub a: Vec<i64>,
    pub errors: Vec<f64>,
    pub delta: f64,
    /// `prime` when `a_1` and `a_2` are both prime, `coprime` otherwise.
    pub branch: &'static str,
}

impl RationalApproximation {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "Q": self.q,
            "a": self.a,
            "errors": float_list(&self.errors),
            "delta": num(self.delta),
            "branch": self.branch,
        })
    }
}

fn is_prime(n: i64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn candidate(q: i64, logs: &[f64]) -> Option<RationalApproximation> {
    let a: Vec<i64> = logs.iter().map(|l| (q as f64 * l).round() as i64).collect();
    if a.iter().any(|&x| x < 1) || a[0].gcd(&a[1]) != 1 {
        return None;
    }
    let errors: Vec<f64> = a
        .iter()
        .zip(logs)
        .map(|(&x, l)| (x as f64 / q as f64 - l).abs())
        .collect();
    let delta = errors.iter().copied().fold(0.0, f64::max);
    let branch = if is_prime(a[0]) && is_prime(a[1]) {
        "prime"
    } else {
        "coprime"
    };
    Some(RationalApproximation {
        q,
        a,
        errors,
        delta,
        branch,
    })
}

/// Exhaustive scan of `Q = 1..=q_max` with `a_j = round(Q log p_j)`.
///
/// The smallest `δ` wins; ties go to a prime pair `(a_1, a_2)`, then to the
/// smaller `Q`.
pub fn approx_logs(d: usize, q_max: i64) -> Result<RationalApproximation> {
    if d < 2 {
        return Err(Error::invalid("approx_logs needs d >= 2"));
    }
    if q_max < 1 {
        return Err(Error::invalid("Q_max must be positive"));
    }
    let logs: Vec<f64> = (1..=d as u32).map(primes::log_nth).collect::<Result<_>>()?;
    (1..=q_max)
        .into_par_iter()
        .filter_map(|q| candidate(q, &logs))
        .min_by(|x, y| {
            x.delta
                .total_cmp(&y.delta)
                .then((x.branch != "prime").cmp(&(y.branch != "prime")))
                .then(x.q.cmp(&y.q))
        })
        .ok_or_else(|| {
            Error::Unattainable(format!("no Q <= {q_max} gives coprime a_1, a_2"))
        })
}

/// `(q_1, q_2)` with `a_1 q_2 - a_2 q_1 = 1` and `0 <= q_1 < a_1`.
pub fn bezout(a1: i64, a2: i64) -> Result<(i64, i64)> {
    if a1 < 1 || a2 < 1 {
        return Err(Error::invalid("bezout needs positive integers"));
    }
    let e = a1.extended_gcd(&a2);
    if e.gcd != 1 {
        return Err(Error::invalid(format!("gcd({a1}, {a2}) = {} is not 1", e.gcd)));
    }
    // a1·x + a2·y = 1, so q2 = x, q1 = -y; shift along (a1, a2)
    let (q1, q2) = (-e.y, e.x);
    let t = Integer::div_floor(&q1, &a1);
    let (q1, q2) = (q1 - t * a1, q2 - t * a2);
    debug_assert_eq!(a1 as i128 * q2 as i128 - a2 as i128 * q1 as i128, 1);
    Ok((q1, q2))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent scan in plain loops, no tie-breaking beyond smallest Q.
    fn oracle(q_max: i64) -> (i64, i64, i64) {
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        let mut best = (f64::INFINITY, 0, 0, 0);
        for q in 1..=q_max {
            let a1 = (q as f64 * l2).round() as i64;
            let a2 = (q as f64 * l3).round() as i64;
            let g = num_integer::gcd(a1, a2);
            let d = (a1 as f64 / q as f64 - l2).abs().max((a2 as f64 / q as f64 - l3).abs());
            if g == 1 && d < best.0 {
                best = (d, q, a1, a2);
            }
        }
        (best.1, best.2, best.3)
    }

    #[test]
    fn q_max_ten() {
        let r = approx_logs(2, 10).unwrap();
        assert_eq!((r.q, r.a.clone()), (10, vec![7, 11]));
        assert_eq!(oracle(10), (10, 7, 11));
        assert!((r.errors[0] - 0.0069).abs() < 1e-4 && (r.errors[1] - 0.0014).abs() < 1e-4);
        assert_eq!(r.branch, "prime");
    }

    #[test]
    fn q_max_one() {
        let r = approx_logs(2, 1).unwrap();
        assert_eq!((r.q, r.a.clone()), (1, vec![1, 1]));
        assert!((r.errors[0] - 0.307).abs() < 1e-3 && (r.errors[1] - 0.099).abs() < 1e-3);
        assert_eq!(r.branch, "coprime");
    }

    #[test]
    fn agrees_with_oracle_and_improves() {
        let mut last = f64::INFINITY;
        for q_max in [10, 100, 1000, 10_000] {
            let r = approx_logs(2, q_max).unwrap();
            let (q, a1, a2) = oracle(q_max);
            assert_eq!(r.delta, {
                let l = [2f64.ln(), 3f64.ln()];
                (a1 as f64 / q as f64 - l[0]).abs().max((a2 as f64 / q as f64 - l[1]).abs())
            });
            assert!(r.delta <= last);
            last = r.delta;
        }
    }

    #[test]
    fn bezout_examples() {
        assert_eq!(bezout(7, 11).unwrap(), (5, 8));
        assert_eq!(bezout(1, 9).unwrap(), (0, 1));
        assert_eq!(bezout(2, 3).unwrap(), (1, 2));
        assert!(bezout(4, 6).is_err());
    }
}
