//! `L^p` norms of polytorus polynomials and of their square functions.
//!
//! Four interchangeable routes are registered in a [`NormRegistry`] by name:
//!
//! | name       | route                                                        |
//! |------------|--------------------------------------------------------------|
//! | `parseval` | `p = 2` only, `(Σ |a_ν|²)^{1/2}`                              |
//! | `even`     | `p = 2q`, exact through polynomial powers                     |
//! | `grid`     | tensor-grid quadrature on the active variables, with a lattice fallback |
//! | `ergodic`  | time average along the Kronecker flow over `[-T, T]`          |
//!
//! Every route works on a list of components `F_1..F_K` and returns the norm
//! of `(Σ_k |F_k|²)^{1/2}`; a single polynomial is the one-component case.

mod ergodic;
mod even;
mod grid;
mod parseval;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::json::{float_list, num};
use crate::poly::{DirichletPolynomial, PolytorusPolynomial};

pub use ergodic::{ergodic_average, norm_ergodic, norm_ergodic_dirichlet, Ergodic};
pub use even::{norm_even_exact, norm_even_exact_dirichlet, Even};
pub use grid::{norm_grid, refinement_trace, Grid};
pub use parseval::{norm_parseval, Parseval};

/// Which route produced a [`NormEstimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormMethodKind {
    Parseval,
    EvenPExact,
    Grid,
    Ergodic,
}

impl NormMethodKind {
    pub fn tag(&self) -> &'static str {
        match self {
            NormMethodKind::Parseval => "parseval",
            NormMethodKind::EvenPExact => "even-p-exact",
            NormMethodKind::Grid => "grid",
            NormMethodKind::Ergodic => "ergodic",
        }
    }
}

/// Convergence information attached to approximate routes.
#[derive(Clone, Debug, PartialEq)]
pub enum ErrorReport {
    /// Tensor grid: value at each refinement level (coarse to fine).
    Grid {
        levels: Vec<(Vec<usize>, f64)>,
        delta: Option<f64>,
    },
    /// Randomly shifted rank-1 lattice, used past the tensor-grid budget.
    Lattice {
        points: usize,
        shifts: usize,
        std_error: f64,
        half_width: f64,
    },
    /// Time averages at each scheduled `T`.
    Ergodic { trace: Vec<(f64, f64)> },
}

impl ErrorReport {
    pub fn to_json(&self) -> Value {
        match self {
            ErrorReport::Grid { levels, delta } => json!({
                "kind": "grid",
                "levels": levels.iter().map(|(r, v)| json!({
                    "resolution": r, "value": num(*v)
                })).collect::<Vec<_>>(),
                "delta": delta.map(num),
            }),
            ErrorReport::Lattice {
                points,
                shifts,
                std_error,
                half_width,
            } => json!({
                "kind": "lattice",
                "points": points,
                "shifts": shifts,
                "std_error": num(*std_error),
                "half_width": num(*half_width),
            }),
            ErrorReport::Ergodic { trace } => json!({
                "kind": "ergodic",
                "T": float_list(&trace.iter().map(|t| t.0).collect::<Vec<_>>()),
                "values": float_list(&trace.iter().map(|t| t.1).collect::<Vec<_>>()),
            }),
        }
    }
}

/// An `L^p` norm value with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub p: f64,
    pub method: NormMethodKind,
    pub error_report: Option<ErrorReport>,
    pub flags: Vec<String>,
}

impl NormEstimate {
    pub(crate) fn exact(value: f64, p: f64, method: NormMethodKind) -> Self {
        NormEstimate {
            value,
            p,
            method,
            error_report: None,
            flags: quasi_norm_flag(p),
        }
    }

    /// Absolute uncertainty implied by the error report (0 for exact routes).
    pub fn tolerance(&self) -> f64 {
        match &self.error_report {
            None => 0.0,
            Some(ErrorReport::Grid { delta, .. }) => delta.unwrap_or(0.0),
            Some(ErrorReport::Lattice { half_width, .. }) => *half_width,
            Some(ErrorReport::Ergodic { trace }) => match trace.as_slice() {
                [.., (_, a), (_, b)] => (a - b).abs(),
                _ => 0.0,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("value".into(), num(self.value));
        m.insert("p".into(), num(self.p));
        m.insert("method".into(), Value::from(self.method.tag()));
        m.insert(
            "error_report".into(),
            self.error_report
                .as_ref()
                .map_or(Value::Null, ErrorReport::to_json),
        );
        m.insert("flags".into(), json!(self.flags));
        Value::Object(m)
    }
}

pub(crate) fn quasi_norm_flag(p: f64) -> Vec<String> {
    if p < 1.0 {
        vec!["quasi-norm: p < 1".to_string()]
    } else {
        Vec::new()
    }
}

/// Knobs shared by all norm routes.
#[derive(Clone, Debug, PartialEq)]
pub struct NormConfig {
    /// Per-axis grid resolution; chosen from the degrees when absent.
    pub resolution: Option<usize>,
    pub oversample: usize,
    /// Tensor grids are used up to this many active variables.
    pub max_tensor_dim: usize,
    /// Point budget for tensor grids and lattice sampling.
    pub budget: u64,
    pub seed: u64,
    pub lattice_points: usize,
    pub lattice_shifts: usize,
    pub t_schedule: Vec<f64>,
    pub gl_order: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            resolution: None,
            oversample: 4,
            max_tensor_dim: 6,
            budget: 100_000_000,
            seed: 0,
            lattice_points: 1 << 14,
            lattice_shifts: 16,
            t_schedule: vec![1e2, 1e3, 1e4],
            gl_order: 16,
        }
    }
}

/// One route to `‖(Σ_k |F_k|²)^{1/2}‖_p`.
pub trait NormMethod: Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;

    fn accepts(&self, p: f64) -> bool;

    fn square_norm(
        &self,
        parts: &[PolytorusPolynomial],
        p: f64,
        cfg: &NormConfig,
    ) -> Result<NormEstimate>;

    fn norm(&self, f: &PolytorusPolynomial, p: f64, cfg: &NormConfig) -> Result<NormEstimate> {
        self.square_norm(std::slice::from_ref(f), p, cfg)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent p = {p} must be finite and > 0")))
    }
}

/// `Some(q)` when `p = 2q` for a positive integer `q`.
pub fn even_half(p: f64) -> Option<u32> {
    let q = p / 2.0;
    (q >= 1.0 && q.fract() == 0.0 && q <= 64.0).then_some(q as u32)
}

/// Norm routes by name.
#[derive(Clone)]
pub struct NormRegistry {
    methods: BTreeMap<&'static str, Arc<dyn NormMethod>>,
}

impl Default for NormRegistry {
    fn default() -> Self {
        let mut r = NormRegistry {
            methods: BTreeMap::new(),
        };
        r.register(Arc::new(Parseval));
        r.register(Arc::new(Even));
        r.register(Arc::new(Grid));
        r.register(Arc::new(Ergodic));
        r
    }
}

impl NormRegistry {
    pub fn register(&mut self, m: Arc<dyn NormMethod>) {
        self.methods.insert(m.name(), m);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn NormMethod>> {
        self.methods.get(name).cloned().ok_or_else(|| {
            Error::invalid(format!(
                "unknown norm method `{name}` (known: auto, {})",
                self.names().join(", ")
            ))
        })
    }

    /// Resolve `name` for exponent `p`; `auto` picks the cheapest exact route
    /// available and falls back to the grid.
    pub fn resolve(&self, name: &str, p: f64) -> Result<Arc<dyn NormMethod>> {
        check_p(p)?;
        let chosen = if name == "auto" {
            if p == 2.0 {
                "parseval"
            } else if even_half(p).is_some() {
                "even"
            } else {
                "grid"
            }
        } else {
            name
        };
        let m = self.get(chosen)?;
        if !m.accepts(p) {
            return Err(Error::invalid(format!(
                "method `{chosen}` does not handle p = {p}"
            )));
        }
        Ok(m)
    }
}

/// Convenience: norm of a Dirichlet polynomial through its Bohr lift.
pub fn norm_dirichlet(
    registry: &NormRegistry,
    method: &str,
    f: &DirichletPolynomial,
    p: f64,
    cfg: &NormConfig,
) -> Result<NormEstimate> {
    let lifted = crate::poly::bohr_lift(f)?;
    registry.resolve(method, p)?.norm(&lifted, p, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_resolution() {
        let r = NormRegistry::default();
        assert_eq!(r.resolve("auto", 2.0).unwrap().name(), "parseval");
        assert_eq!(r.resolve("auto", 4.0).unwrap().name(), "even");
        assert_eq!(r.resolve("auto", 3.0).unwrap().name(), "grid");
        assert!(r.resolve("parseval", 4.0).is_err());
        assert!(r.resolve("even", 3.0).is_err());
        assert!(r.resolve("nope", 2.0).is_err());
        assert!(r.resolve("grid", -1.0).is_err());
    }

    #[test]
    fn even_half_detection() {
        assert_eq!(even_half(4.0), Some(2));
        assert_eq!(even_half(2.0), Some(1));
        assert_eq!(even_half(3.0), None);
        assert_eq!(even_half(1.0), None);
    }
}
