use hardy_core::json::{num, polynomial_from_str, polynomial_to_json, polytorus_to_json};
use hardy_core::littlewood_paley::{decompose, khintchine_average, lp_ratio, IntervalPartition};
use hardy_core::multipliers::{
    apply_multiplier, hm_bound, marcinkiewicz_bound, multiplier_norm_lower, HmConfig, Symbol,
};
use hardy_core::norms::{NormConfig, NormRegistry};
use hardy_core::ensemble::{Ensemble, PolyShape};
use hardy_core::projections::{
    hilbert_transform, partial_sum, riesz_project, schauder_identity_check, truncation_norm_bench,
    LadderEnsemble, TruncationBench,
};
use hardy_core::transference::{verify_backward, verify_forward, TransferConfig, TransferenceReport};
use hardy_core::{AnyPolynomial, Error, PolytorusPolynomial, ReducedRational, Result};
use serde_json::{json, Map, Value};

pub fn parse_polynomial(text: &str) -> Result<AnyPolynomial> {
    polynomial_from_str(text)
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

pub fn norm_report(f: &AnyPolynomial, p: f64, method: &str, cfg: &NormConfig) -> Result<Value> {
    let g = f.to_polytorus()?;
    let est = NormRegistry::default().resolve(method, p)?.norm(&g, p, cfg)?;
    Ok(merge(est.to_json(), json!({"seed": cfg.seed, "requested_method": method})))
}

pub fn partition(eta: &str) -> Result<IntervalPartition> {
    IntervalPartition::new(ReducedRational::parse(eta)?)
}

pub struct LpOutput {
    pub report: Value,
    pub blocks: Vec<(i64, PolytorusPolynomial)>,
}

pub fn lp_report(
    f: &AnyPolynomial,
    eta: &str,
    p: f64,
    method: &str,
    samples: usize,
    cfg: &NormConfig,
) -> Result<LpOutput> {
    let g = f.to_polytorus()?;
    let part = partition(eta)?;
    let registry = NormRegistry::default();
    let r = lp_ratio(&g, &part, p, &registry, method, cfg)?;
    let d = decompose(&g, &part)?;
    let mut report = merge(
        r.to_json(),
        json!({
            "eta": part.eta().to_string(),
            "p": num(p),
            "seed": cfg.seed,
            "blocks": d.blocks.keys().copied().collect::<Vec<_>>(),
            "certified": d.certified(),
            "flags": d.flags.clone(),
        }),
    );
    if samples > 0 {
        let k = khintchine_average(&g, &part, p, samples, cfg.seed, &registry, method, cfg)?;
        report["khintchine"] = json!({
            "mean_pth_power": num(k.mean),
            "std_error": num(k.std_error),
            "samples": k.samples.len(),
            "square_pth_power": num(r.square.value.powf(p)),
        });
    }
    Ok(LpOutput {
        report,
        blocks: d.blocks.into_iter().collect(),
    })
}

/// CSV rows `member,norm,square_norm,ratio`.
pub fn lp_ratio_table(
    input: Option<&AnyPolynomial>,
    ensemble: Option<&Ensemble>,
    eta: &str,
    p: f64,
    method: &str,
    cfg: &NormConfig,
) -> Result<String> {
    let part = partition(eta)?;
    let registry = NormRegistry::default();
    let mut rows: Vec<(String, PolytorusPolynomial)> = Vec::new();
    if let Some(f) = input {
        rows.push(("input".into(), f.to_polytorus()?));
    }
    if let Some(e) = ensemble {
        rows.extend(e.members().into_iter().enumerate().map(|(i, f)| (i.to_string(), f)));
    }
    let mut out = String::from("member,norm,square_norm,ratio\n");
    for (id, f) in rows {
        let r = lp_ratio(&f, &part, p, &registry, method, cfg)?;
        out.push_str(&format!(
            "{id},{},{},{}\n",
            hardy_core::json::format_float(r.norm.value),
            hardy_core::json::format_float(r.square.value),
            hardy_core::json::format_float(r.ratio)
        ));
    }
    Ok(out)
}

pub fn lp_ensemble(seed: u64, size: usize) -> Result<Ensemble> {
    Ensemble::new(
        seed,
        size,
        PolyShape {
            dims: 3,
            max_degree: 3,
            terms: 8,
            analytic: true,
        },
    )
}

pub enum Bound {
    Marcinkiewicz,
    Hm,
}

#[allow(clippy::too_many_arguments)]
pub fn mult_report(
    m: &dyn Symbol,
    apply: Option<&AnyPolynomial>,
    bound: Option<Bound>,
    eta: &str,
    k_range: i64,
    p: f64,
    ensemble_size: usize,
    method: &str,
    cfg: &NormConfig,
) -> Result<Value> {
    let mut out = Map::new();
    out.insert("symbol".into(), m.to_json());
    out.insert("seed".into(), cfg.seed.into());
    if let Some(f) = apply {
        let g = apply_multiplier(m, &f.to_polytorus()?)?;
        let v = match f {
            AnyPolynomial::Dirichlet(_) => {
                polynomial_to_json(&AnyPolynomial::Dirichlet(hardy_core::bohr_drop(&g)?))
            }
            AnyPolynomial::Polytorus(_) => polytorus_to_json(&g),
        };
        out.insert("applied".into(), v);
    }
    match bound {
        Some(Bound::Marcinkiewicz) => {
            let r = marcinkiewicz_bound(m, ReducedRational::parse(eta)?, k_range)?;
            out.insert("bound".into(), r.to_json());
        }
        Some(Bound::Hm) => {
            out.insert("bound".into(), hm_bound(m, &HmConfig::default())?.to_json());
        }
        None => {}
    }
    if ensemble_size > 0 {
        let e = Ensemble::new(cfg.seed, ensemble_size, PolyShape::default())?.with_monomial_witnesses();
        let lb = multiplier_norm_lower(m, p, &e, &NormRegistry::default(), method, cfg)?;
        out.insert(
            "lower_bound".into(),
            json!({"p": num(p), "value": num(lb.value), "argmax": lb.argmax, "members": lb.ratios.len()}),
        );
    }
    Ok(Value::Object(out))
}

pub struct TransferArgs<'a> {
    pub forward: bool,
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub q_max: i64,
    pub method: &'a str,
}

pub fn transfer_report(
    m: &dyn Symbol,
    f: &AnyPolynomial,
    a: &TransferArgs,
    norms: &NormConfig,
) -> Result<TransferenceReport> {
    let g = f.to_polytorus()?;
    let cfg = TransferConfig {
        norms: norms.clone(),
        method: a.method.to_string(),
        ..TransferConfig::default()
    };
    if a.forward {
        verify_forward(m, &g, a.p, a.epsilon, a.q_max, &cfg)
    } else {
        verify_backward(m, &g, a.gamma, a.p, a.delta, &cfg)
    }
}

pub fn proj_partial(f: &AnyPolynomial, n: u64) -> Result<Value> {
    let d = f.to_dirichlet()?;
    Ok(json!({"N": n, "result": polynomial_to_json(&AnyPolynomial::Dirichlet(partial_sum(&d, n)))}))
}

pub fn proj_riesz(f: &AnyPolynomial, hilbert: bool) -> Result<Value> {
    let g = f.to_polytorus()?;
    let r = if hilbert { hilbert_transform(&g)? } else { riesz_project(&g)? };
    Ok(json!({"result": polytorus_to_json(&r)}))
}

pub fn proj_identity(f: &AnyPolynomial, n: u64) -> Result<Value> {
    Ok(schauder_identity_check(&f.to_dirichlet()?, n)?.to_json())
}

pub fn proj_bench(
    p: f64,
    schedule: &[u64],
    size: usize,
    max_index: Option<u64>,
    method: &str,
    cfg: &NormConfig,
) -> Result<TruncationBench> {
    let top = max_index.unwrap_or_else(|| schedule.iter().copied().max().unwrap_or(1));
    let e = LadderEnsemble::new(cfg.seed, size, top)?;
    truncation_norm_bench(p, schedule, &e, &NormRegistry::default(), method, cfg)
}

pub fn require<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("{what} is required")))
}
