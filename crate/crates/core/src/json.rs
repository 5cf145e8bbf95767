//! Canonical JSON emission and the polynomial file format.
//!
//! Canonical output sorts object keys and prints every float with 17
//! significant digits in exponent form, so identical inputs give identical
//! bytes. Non-finite floats are written as the strings `"inf"`, `"-inf"`,
//! `"nan"`.
//!
//! Polynomial files look like
//!
//! ```text
//! {"dirichlet": {"2": [1.0, 0.0], "6": [0.5, -0.5]}}
//! {"polytorus": [{"nu": {"1": 2, "3": -1}, "c": [1.0, 0.0]}]}
//! ```

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::poly::{AnyPolynomial, DirichletPolynomial, PolytorusPolynomial};

/// A float as a JSON value; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn complex(c: Complex64) -> Value {
    Value::Array(vec![num(c.re), num(c.im)])
}

pub fn float_list(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Format a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // unreachable through `num`, kept for direct callers
        format!("\"{x}\"")
    }
}

/// Serialize with sorted keys and fixed float formatting, two-space indent.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric arrays stay on one line
            if items.len() <= 4 && items.iter().all(|x| x.is_number() || x.is_string()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, depth + 1);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, x, depth + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], depth + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn parse_complex(v: &Value) -> Result<Complex64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => {
            let re = re
                .as_f64()
                .ok_or_else(|| Error::malformed("coefficient real part is not a number"))?;
            let im = im
                .as_f64()
                .ok_or_else(|| Error::malformed("coefficient imaginary part is not a number"))?;
            Ok(Complex64::new(re, im))
        }
        _ => Err(Error::malformed("coefficient must be [re, im]")),
    }
}

fn parse_key<T: std::str::FromStr>(k: &str) -> Result<T> {
    k.parse()
        .map_err(|_| Error::malformed(format!("key `{k}` is not a decimal integer")))
}

pub fn dirichlet_to_json(f: &DirichletPolynomial) -> Value {
    let mut m = Map::new();
    for (n, a) in f.terms() {
        m.insert(n.to_string(), complex(a));
    }
    let mut root = Map::new();
    root.insert("dirichlet".into(), Value::Object(m));
    Value::Object(root)
}

pub fn multi_index_to_json(nu: &MultiIndex) -> Value {
    let mut m = Map::new();
    for (j, e) in nu.iter() {
        m.insert(j.to_string(), Value::from(e));
    }
    Value::Object(m)
}

pub fn polytorus_to_json(f: &PolytorusPolynomial) -> Value {
    let terms = f
        .terms()
        .map(|(nu, a)| {
            let mut t = Map::new();
            t.insert("nu".into(), multi_index_to_json(nu));
            t.insert("c".into(), complex(a));
            Value::Object(t)
        })
        .collect();
    let mut root = Map::new();
    root.insert("polytorus".into(), Value::Array(terms));
    Value::Object(root)
}

pub fn polynomial_to_json(f: &AnyPolynomial) -> Value {
    match f {
        AnyPolynomial::Dirichlet(f) => dirichlet_to_json(f),
        AnyPolynomial::Polytorus(f) => polytorus_to_json(f),
    }
}

pub fn parse_multi_index(v: &Value) -> Result<MultiIndex> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::malformed("`nu` must be an object"))?;
    let mut pairs = Vec::with_capacity(obj.len());
    for (k, e) in obj {
        let j: u32 = parse_key(k)?;
        let e = e
            .as_i64()
            .ok_or_else(|| Error::malformed(format!("exponent for `{k}` is not an integer")))?;
        pairs.push((j, e));
    }
    MultiIndex::from_pairs(pairs).map_err(|e| Error::malformed(e.to_string()))
}

pub fn polynomial_from_json(v: &Value) -> Result<AnyPolynomial> {
    if let Some(d) = v.get("dirichlet") {
        let obj = d
            .as_object()
            .ok_or_else(|| Error::malformed("`dirichlet` must be an object"))?;
        let mut terms = Vec::with_capacity(obj.len());
        for (k, c) in obj {
            terms.push((parse_key::<u64>(k)?, parse_complex(c)?));
        }
        let f = DirichletPolynomial::from_terms(terms).map_err(|e| Error::malformed(e.to_string()))?;
        return Ok(AnyPolynomial::Dirichlet(f));
    }
    if let Some(p) = v.get("polytorus") {
        let arr = p
            .as_array()
            .ok_or_else(|| Error::malformed("`polytorus` must be an array"))?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let nu = parse_multi_index(
                t.get("nu")
                    .ok_or_else(|| Error::malformed("term without `nu`"))?,
            )?;
            let c = parse_complex(t.get("c").ok_or_else(|| Error::malformed("term without `c`"))?)?;
            terms.push((nu, c));
        }
        return Ok(AnyPolynomial::Polytorus(PolytorusPolynomial::from_terms(terms)));
    }
    Err(Error::malformed(
        "expected a `dirichlet` or `polytorus` top-level key",
    ))
}

pub fn polynomial_from_str(s: &str) -> Result<AnyPolynomial> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::malformed(e.to_string()))?;
    polynomial_from_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_both_formats() {
        let d = polynomial_from_str(r#"{"dirichlet": {"2": [1, 0], "6": [0.5, -0.5]}}"#).unwrap();
        let AnyPolynomial::Dirichlet(f) = d else {
            panic!("wrong kind")
        };
        assert_eq!(f.coeff(6), Complex64::new(0.5, -0.5));

        let p = polynomial_from_str(r#"{"polytorus": [{"nu": {"1": 2, "3": -1}, "c": [1, 2]}]}"#)
            .unwrap();
        let AnyPolynomial::Polytorus(f) = p else {
            panic!("wrong kind")
        };
        let nu = MultiIndex::from_pairs([(1, 2), (3, -1)]).unwrap();
        assert_eq!(f.coeff(&nu), Complex64::new(1.0, 2.0));
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            r#"{"dirichlet": {"x": [1, 0]}}"#,
            r#"{"dirichlet": {"0": [1, 0]}}"#,
            r#"{"dirichlet": {"2": [1]}}"#,
            r#"{"polytorus": [{"nu": {"0": 1}, "c": [1, 0]}]}"#,
            r#"{"other": 1}"#,
            "not json",
        ] {
            let err = polynomial_from_str(bad).unwrap_err();
            assert_eq!(err.code(), "malformed_input", "{bad}");
        }
    }

    #[test]
    fn canonical_floats_and_keys() {
        let v = serde_json::json!({"b": 2.0_f64.sqrt(), "a": 3, "c": [1.0, "inf"]});
        let s = to_canonical_string(&v);
        assert_eq!(
            s,
            "{\n  \"a\": 3,\n  \"b\": 1.4142135623730951e0,\n  \"c\": [1.0000000000000000e0, \"inf\"]\n}\n"
        );
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
    }

    proptest! {
        #[test]
        fn polytorus_json_round_trip(
            terms in proptest::collection::vec(
                ((1u32..6, -3i64..4), (-1.0f64..1.0, -1.0f64..1.0)), 0..12)
        ) {
            let f = PolytorusPolynomial::from_terms(terms.into_iter().map(|((j, e), (re, im))| {
                (MultiIndex::from_pairs([(j, e)]).unwrap(), Complex64::new(re, im))
            }));
            let text = to_canonical_string(&polytorus_to_json(&f));
            let back = polynomial_from_str(&text).unwrap();
            prop_assert_eq!(back, AnyPolynomial::Polytorus(f));
        }
    }
}
